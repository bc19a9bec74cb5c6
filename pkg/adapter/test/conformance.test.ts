/**
 * Cross-component conformance: converted scenes must pass the query
 * engine's `validate` command with zero errors, and a converted braking
 * scene must actually be retrievable by a braking-scenario query.
 */
import { execFileSync } from "child_process";
import { mkdtempSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";

import { describe, expect, it } from "vitest";

import { convertScene } from "../src/convert.js";
import { brakingEgoStates, buildTables, testConfig } from "./fixtures.js";

function runEngine(args: string[]): { status: number; stdout: string } {
  try {
    const stdout = execFileSync("python3", ["-m", "scenquery.cli", ...args], {
      encoding: "utf-8",
    });
    return { status: 0, stdout };
  } catch (err: any) {
    if (typeof err.status === "number") {
      return { status: err.status, stdout: String(err.stdout ?? "") };
    }
    throw err;
  }
}

function writeConverted(): string {
  const dir = mkdtempSync(join(tmpdir(), "adapter-out-"));
  const walker: ([number, number, number] | null)[] = Array.from(
    { length: 13 },
    (_, t) => [55 + 0.1 * t, -4 + 0.7 * t, 1.55] as [number, number, number],
  );
  const tables = buildTables("scene-conf", 40, brakingEgoStates(40), [
    { category: "human.pedestrian.adult", states: walker, description: "Adult subcategory." },
    { category: "vehicle.car", states: Array.from({ length: 20 }, (_, t) => [t * 4.0, 8, 0] as [number, number, number]) },
  ]);
  const trace = convertScene(tables, "scene-conf", testConfig());
  writeFileSync(join(dir, "scene-conf.trace.json"), JSON.stringify(trace, null, 1) + "\n");
  return dir;
}

describe("engine conformance", () => {
  it("converted scenes pass validate with zero errors", () => {
    const dir = writeConverted();
    const { status, stdout } = runEngine(["validate", "-d", dir]);
    expect(status).toBe(0);
    expect(stdout).toContain("ok");
    expect(stdout).not.toContain("ERROR");
  });

  it("a braking query retrieves the converted braking scene", () => {
    const dir = writeConverted();
    const program = join(dir, "braking.scenic");
    writeFileSync(
      program,
      "behavior EgoBehavior():\n" +
        "  try:\n" +
        "    do FollowLaneBehavior()\n" +
        "  interrupt when (distance from self to ped) < Range(1,40):\n" +
        "    do BrakingBehavior()\n\n" +
        "ego = new Car with behavior EgoBehavior()\n" +
        "ped = new Pedestrian\n",
    );
    const { status, stdout } = runEngine([
      "query", "-p", program, "-d", dir, "-m", "3", "--jobs", "1",
    ]);
    expect(status).toBe(0);
    const report = JSON.parse(stdout.trim().split("\n")[0]);
    expect(report.matched).toBe(true);
    expect(report.correspondence.ped).toBe("human.pedestrian.adult_0");
  });
});
