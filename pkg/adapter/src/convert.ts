import { mkdirSync, writeFileSync } from "fs";
import { join } from "path";

import { loadTables, sceneByName, sceneSamples } from "./dataset.js";
import { labelActions } from "./labels.js";
import { normalizeQuat, Quat, yawFromQuat } from "./quat.js";
import {
  AdapterConfig,
  DatasetTables,
  TraceFile,
  TraceTrack,
} from "./types.js";

function emittedClass(categoryName: string, classMap: Record<string, string>): string {
  for (const [prefix, mapped] of Object.entries(classMap)) {
    if (categoryName.startsWith(prefix)) {
      return mapped;
    }
  }
  return categoryName;
}

interface Slot {
  x: number | null;
  y: number | null;
  pose: Quat | null;
  yaw: number | null;
}

function emptySlots(horizon: number): Slot[] {
  return Array.from({ length: horizon }, () => ({
    x: null,
    y: null,
    pose: null,
    yaw: null,
  }));
}

function toTrack(
  id: string,
  cls: string,
  desc: string,
  slots: Slot[],
  cfg: AdapterConfig,
): TraceTrack {
  const xs = slots.map((s) => s.x);
  const ys = slots.map((s) => s.y);
  const yaws = slots.map((s) => s.yaw);
  return {
    id,
    type: cls,
    desc,
    xs,
    ys,
    ts: slots.map((_, t) => t * cfg.dt),
    poses: slots.map((s) => s.pose),
    angles: yaws,
    actions: labelActions(xs, ys, yaws, cls, cfg.dt, cfg.thresholds),
  };
}

/** Convert one scene into a trace object (pure; no I/O). */
export function convertScene(tables: DatasetTables, name: string, cfg: AdapterConfig): TraceFile {
  const scene = sceneByName(tables, name);
  const samples = sceneSamples(tables, scene);
  const horizon = cfg.horizon;
  const kept = samples.slice(0, horizon); // truncate overlong scenes
  const slotOf = new Map(kept.map((s, i) => [s.token, i]));

  const categoryOf = new Map(tables.categories.map((c) => [c.token, c]));
  const instanceOf = new Map(tables.instances.map((i) => [i.token, i]));

  const egoSlots = emptySlots(horizon);
  for (const pose of tables.egoPoses) {
    const slot = slotOf.get(pose.sample_token);
    if (slot === undefined) {
      continue;
    }
    const quat = normalizeQuat(pose.rotation);
    egoSlots[slot] = {
      x: pose.translation[0],
      y: pose.translation[1],
      pose: quat,
      yaw: yawFromQuat(quat),
    };
  }

  const perInstance = new Map<string, Slot[]>();
  const skipped: string[] = [];
  for (const ann of tables.annotations) {
    const slot = slotOf.get(ann.sample_token);
    if (slot === undefined) {
      continue;
    }
    if (!instanceOf.has(ann.instance_token)) {
      skipped.push(ann.token);
      continue;
    }
    let slots = perInstance.get(ann.instance_token);
    if (!slots) {
      slots = emptySlots(horizon);
      perInstance.set(ann.instance_token, slots);
    }
    const quat = normalizeQuat(ann.rotation);
    slots[slot] = {
      x: ann.translation[0],
      y: ann.translation[1],
      pose: quat,
      yaw: yawFromQuat(quat),
    };
  }
  if (skipped.length > 0) {
    console.warn(
      `scene ${name}: ${skipped.length} annotation(s) without instance emitted as absent`,
    );
  }

  const tracks: TraceTrack[] = [
    toTrack("ego_0", "vehicle.ego", "Ego vehicle.", egoSlots, cfg),
  ];
  const classCounters = new Map<string, number>();
  const instanceTokens = [...perInstance.keys()].sort();
  for (const token of instanceTokens) {
    const instance = instanceOf.get(token)!;
    const category = categoryOf.get(instance.category_token);
    const rawName = category ? category.name : "unknown";
    const cls = emittedClass(rawName, cfg.classMap);
    const count = classCounters.get(cls) ?? 0;
    classCounters.set(cls, count + 1);
    tracks.push(
      toTrack(`${cls}_${count}`, cls, category?.description ?? "", perInstance.get(token)!, cfg),
    );
  }

  return {
    id: scene.name,
    dt: cfg.dt,
    T: horizon,
    ego_id: "ego_0",
    tracks,
    meta: {
      labeler: "kinematic-heuristic/0.1",
      thresholds: cfg.thresholds,
      source_scene_token: scene.token,
      keyframes: kept.length,
    },
  };
}

/** Convert every requested scene; returns written file paths. */
export function convertScenes(cfg: AdapterConfig): string[] {
  const tables = loadTables(cfg.root);
  mkdirSync(cfg.outDir, { recursive: true });
  const written: string[] = [];
  for (const name of cfg.scenes) {
    const trace = convertScene(tables, name, cfg);
    const path = join(cfg.outDir, `${trace.id}.trace.json`);
    writeFileSync(path, JSON.stringify(trace, null, 1) + "\n");
    written.push(path);
  }
  return written;
}
