import { describe, expect, it } from "vitest";

import { convertScene } from "../src/convert.js";
import { MissingScene } from "../src/dataset.js";
import { BRAKE, CROSS_ROAD, FOLLOW_LANE } from "../src/labels.js";
import { brakingEgoStates, buildTables, testConfig } from "./fixtures.js";

function walkerStates(n: number): ([number, number, number] | null)[] {
  return Array.from({ length: n }, (_, t) => [20, -5 + 0.6 * t, 1.57] as [number, number, number]);
}

describe("convertScene", () => {
  it("emits dt=0.5 and T=40 for a full scene", () => {
    const tables = buildTables("scene-full", 40, brakingEgoStates(40), [
      { category: "human.pedestrian.adult", states: walkerStates(13) },
    ]);
    const trace = convertScene(tables, "scene-full", testConfig());
    expect(trace.dt).toBe(0.5);
    expect(trace.T).toBe(40);
    expect(trace.ego_id).toBe("ego_0");
    for (const track of trace.tracks) {
      expect(track.xs).toHaveLength(40);
      expect(track.actions).toHaveLength(40);
      expect(track.ts[3]).toBeCloseTo(1.5);
    }
  });

  it("a 13-keyframe pedestrian yields a run of 13", () => {
    const tables = buildTables("scene-ped", 40, brakingEgoStates(40), [
      { category: "human.pedestrian.adult", states: walkerStates(13) },
    ]);
    const trace = convertScene(tables, "scene-ped", testConfig());
    const ped = trace.tracks.find((t) => t.id === "human.pedestrian.adult_0")!;
    const present = ped.xs.map((x) => x !== null);
    expect(present.slice(0, 13)).toEqual(Array(13).fill(true));
    expect(present.slice(13)).toEqual(Array(27).fill(false));
    expect(ped.actions.slice(0, 13)).toEqual(Array(13).fill(CROSS_ROAD));
  });

  it("short scenes pad with absent timesteps", () => {
    const tables = buildTables("scene-short", 25, brakingEgoStates(25), []);
    const trace = convertScene(tables, "scene-short", testConfig());
    const ego = trace.tracks[0];
    expect(ego.xs.slice(25)).toEqual(Array(15).fill(null));
    expect(trace.T).toBe(40);
  });

  it("overlong scenes truncate to the horizon", () => {
    const tables = buildTables("scene-long", 55, brakingEgoStates(55), []);
    const trace = convertScene(tables, "scene-long", testConfig());
    expect(trace.tracks[0].xs).toHaveLength(40);
  });

  it("ego braking ramp is labeled BRAKE with FOLLOW_LANE around it", () => {
    const tables = buildTables("scene-brake", 40, brakingEgoStates(40), []);
    const trace = convertScene(tables, "scene-brake", testConfig());
    const ego = trace.tracks[0];
    for (let t = 11; t <= 13; t++) {
      expect(ego.actions[t]).toBe(BRAKE);
    }
    for (let t = 2; t <= 7; t++) {
      expect(ego.actions[t]).toBe(FOLLOW_LANE);
    }
    for (let t = 20; t <= 38; t++) {
      expect(ego.actions[t]).toBe(FOLLOW_LANE);
    }
  });

  it("derived yaw matches the synthesized heading within 1e-6", () => {
    const tables = buildTables("scene-yaw", 10, brakingEgoStates(10), [
      { category: "human.pedestrian.adult", states: walkerStates(10) },
    ]);
    const trace = convertScene(tables, "scene-yaw", testConfig());
    const ped = trace.tracks[1];
    for (let t = 0; t < 10; t++) {
      expect(Math.abs((ped.angles[t] as number) - 1.57)).toBeLessThan(1e-6);
    }
  });

  it("instances of one class get stable numbered ids", () => {
    const tables = buildTables("scene-ids", 12, brakingEgoStates(12), [
      { category: "human.pedestrian.adult", states: walkerStates(5) },
      { category: "human.pedestrian.adult", states: walkerStates(7) },
      { category: "vehicle.car", states: walkerStates(6) },
    ]);
    const trace = convertScene(tables, "scene-ids", testConfig());
    const ids = trace.tracks.map((t) => t.id).sort();
    expect(ids).toEqual([
      "ego_0", "human.pedestrian.adult_0", "human.pedestrian.adult_1",
      "vehicle.car_0",
    ]);
  });

  it("class map renames categories", () => {
    const tables = buildTables("scene-map", 8, brakingEgoStates(8), [
      { category: "human.pedestrian.construction_worker", states: walkerStates(5) },
    ]);
    const cfg = testConfig({
      classMap: { "human.pedestrian.construction": "human.pedestrian.adult" },
    });
    const trace = convertScene(tables, "scene-map", cfg);
    expect(trace.tracks[1].type).toBe("human.pedestrian.adult");
  });

  it("missing scenes raise MissingScene", () => {
    const tables = buildTables("scene-x", 5, brakingEgoStates(5), []);
    expect(() => convertScene(tables, "nope", testConfig())).toThrow(MissingScene);
  });

  it("records labeler provenance in metadata", () => {
    const tables = buildTables("scene-meta", 6, brakingEgoStates(6), []);
    const trace = convertScene(tables, "scene-meta", testConfig());
    expect(trace.meta?.labeler).toBe("kinematic-heuristic/0.1");
  });
});
