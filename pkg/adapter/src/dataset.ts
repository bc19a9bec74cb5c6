import { readFileSync } from "fs";
import { join } from "path";

import {
  AnnotationRecord,
  CategoryRecord,
  DatasetTables,
  EgoPoseRecord,
  InstanceRecord,
  SampleRecord,
  SceneRecord,
} from "./types.js";

const TABLE_FILES = {
  scenes: "scene.json",
  samples: "sample.json",
  annotations: "sample_annotation.json",
  instances: "instance.json",
  categories: "category.json",
  egoPoses: "ego_pose.json",
} as const;

export class MissingScene extends Error {}

export function loadTables(root: string): DatasetTables {
  const read = <T>(name: string): T[] =>
    JSON.parse(readFileSync(join(root, name), "utf-8")) as T[];
  return {
    scenes: read<SceneRecord>(TABLE_FILES.scenes),
    samples: read<SampleRecord>(TABLE_FILES.samples),
    annotations: read<AnnotationRecord>(TABLE_FILES.annotations),
    instances: read<InstanceRecord>(TABLE_FILES.instances),
    categories: read<CategoryRecord>(TABLE_FILES.categories),
    egoPoses: read<EgoPoseRecord>(TABLE_FILES.egoPoses),
  };
}

export function sceneByName(tables: DatasetTables, name: string): SceneRecord {
  const scene = tables.scenes.find((s) => s.name === name || s.token === name);
  if (!scene) {
    throw new MissingScene(`scene ${name} not found`);
  }
  return scene;
}

/** Keyframe sample tokens of a scene, in temporal order. */
export function sceneSamples(tables: DatasetTables, scene: SceneRecord): SampleRecord[] {
  const byToken = new Map(tables.samples.map((s) => [s.token, s]));
  const ordered: SampleRecord[] = [];
  let token = scene.first_sample_token;
  const seen = new Set<string>();
  while (token) {
    if (seen.has(token)) {
      throw new Error(`sample chain loops at ${token} in scene ${scene.name}`);
    }
    seen.add(token);
    const sample = byToken.get(token);
    if (!sample) {
      throw new Error(`dangling sample token ${token} in scene ${scene.name}`);
    }
    ordered.push(sample);
    token = sample.next;
  }
  return ordered;
}
