import { quatFromYaw } from "../src/quat.js";
import {
  AdapterConfig,
  AnnotationRecord,
  CategoryRecord,
  DatasetTables,
  DEFAULT_CONFIG,
  EgoPoseRecord,
  InstanceRecord,
  SampleRecord,
  SceneRecord,
} from "../src/types.js";

export interface TrackSpec {
  category: string;
  description?: string;
  // per keyframe index: [x, y, yaw] or null when unannotated
  states: ([number, number, number] | null)[];
}

export function buildTables(
  sceneName: string,
  nSamples: number,
  egoStates: [number, number, number][],
  tracks: TrackSpec[],
): DatasetTables {
  const scene: SceneRecord = {
    token: `scene-${sceneName}`,
    name: sceneName,
    first_sample_token: `${sceneName}-s0`,
  };
  const samples: SampleRecord[] = [];
  for (let i = 0; i < nSamples; i++) {
    samples.push({
      token: `${sceneName}-s${i}`,
      scene_token: scene.token,
      timestamp: i * 500_000,
      next: i + 1 < nSamples ? `${sceneName}-s${i + 1}` : "",
    });
  }
  const egoPoses: EgoPoseRecord[] = egoStates.map(([x, y, yaw], i) => ({
    sample_token: `${sceneName}-s${i}`,
    translation: [x, y, 0],
    rotation: quatFromYaw(yaw),
  }));

  const categories = new Map<string, CategoryRecord>();
  const instances: InstanceRecord[] = [];
  const annotations: AnnotationRecord[] = [];
  tracks.forEach((spec, index) => {
    if (!categories.has(spec.category)) {
      categories.set(spec.category, {
        token: `cat-${spec.category}`,
        name: spec.category,
        description: spec.description ?? "",
      });
    }
    const instanceToken = `${sceneName}-inst${index}`;
    instances.push({
      token: instanceToken,
      category_token: `cat-${spec.category}`,
    });
    spec.states.forEach((state, i) => {
      if (state === null || i >= nSamples) {
        return;
      }
      const [x, y, yaw] = state;
      annotations.push({
        token: `${instanceToken}-a${i}`,
        sample_token: `${sceneName}-s${i}`,
        instance_token: instanceToken,
        translation: [x, y, 0],
        rotation: quatFromYaw(yaw),
      });
    });
  });

  return {
    scenes: [scene],
    samples,
    annotations,
    instances,
    categories: [...categories.values()],
    egoPoses,
  };
}

export function testConfig(overrides: Partial<AdapterConfig> = {}): AdapterConfig {
  return {
    root: "",
    outDir: "",
    scenes: [],
    ...DEFAULT_CONFIG,
    ...overrides,
  };
}

/** Ego drive: constant 10 m/s, a 3 m/s^2 braking ramp over t=10..14, then
 * a steady 2.5 m/s crawl. */
export function brakingEgoStates(n: number): [number, number, number][] {
  const dt = DEFAULT_CONFIG.dt;
  const speed = (t: number) => {
    if (t <= 9) {
      return 10;
    }
    if (t <= 14) {
      return 10 - 3 * dt * (t - 9);
    }
    return 2.5;
  };
  const states: [number, number, number][] = [[0, 0, 0]];
  for (let t = 1; t < n; t++) {
    const [x] = states[t - 1];
    states.push([x + speed(t) * dt, 0, 0]);
  }
  return states;
}
