#!/usr/bin/env node
import { convertScenes } from "./convert.js";
import { AdapterConfig, DEFAULT_CONFIG, DEFAULT_THRESHOLDS } from "./types.js";

function usage(): never {
  console.error(
    "usage: convert --root PATH --scenes a,b,c --out DIR " +
      "[--brake M_S2] [--accel M_S2] [--turn RAD_S] [--walk M_S] " +
      "[--dt SECONDS] [--horizon STEPS] [--classmap from=to,...]",
  );
  process.exit(2);
}

export function parseArgs(argv: string[]): AdapterConfig {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    if (!key.startsWith("--") || i + 1 >= argv.length) {
      usage();
    }
    flags.set(key.slice(2), argv[i + 1]);
  }
  const root = flags.get("root");
  const out = flags.get("out");
  if (!root || !out) {
    usage();
  }
  const classMap: Record<string, string> = { ...DEFAULT_CONFIG.classMap };
  for (const pair of (flags.get("classmap") ?? "").split(",")) {
    if (!pair) {
      continue;
    }
    const [from, to] = pair.split("=");
    if (!from || !to) {
      usage();
    }
    classMap[from] = to;
  }
  const num = (key: string, fallback: number) => {
    const raw = flags.get(key);
    if (raw === undefined) {
      return fallback;
    }
    const value = Number(raw);
    if (!Number.isFinite(value) || value <= 0) {
      usage();
    }
    return value;
  };
  return {
    root,
    outDir: out,
    scenes: (flags.get("scenes") ?? "").split(",").filter(Boolean),
    dt: num("dt", DEFAULT_CONFIG.dt),
    horizon: Math.round(num("horizon", DEFAULT_CONFIG.horizon)),
    thresholds: {
      brakeDecel: num("brake", DEFAULT_THRESHOLDS.brakeDecel),
      accel: num("accel", DEFAULT_THRESHOLDS.accel),
      turnYawRate: num("turn", DEFAULT_THRESHOLDS.turnYawRate),
      walkSpeed: num("walk", DEFAULT_THRESHOLDS.walkSpeed),
    },
    classMap,
  };
}

export function main(argv: string[]): number {
  const cfg = parseArgs(argv);
  if (cfg.scenes.length === 0) {
    console.log("no scenes requested; nothing to do");
    return 0;
  }
  const written = convertScenes(cfg);
  for (const path of written) {
    console.log(`wrote ${path}`);
  }
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url.endsWith(process.argv[1].split("/").pop()!);
if (invokedDirectly) {
  try {
    process.exit(main(process.argv.slice(2)));
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    process.exit(2);
  }
}
