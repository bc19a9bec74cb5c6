// Input: a lean nuScenes-style table layout (one JSON array per table).
// Samples are 2 Hz keyframes linked by `next`; annotations attach per
// (sample, instance); the ego pose is keyed by sample token.

export interface SceneRecord {
  token: string;
  name: string;
  first_sample_token: string;
}

export interface SampleRecord {
  token: string;
  scene_token: string;
  timestamp: number; // microseconds
  next: string; // "" at the end of the scene
}

export interface AnnotationRecord {
  token: string;
  sample_token: string;
  instance_token: string;
  translation: [number, number, number];
  rotation: [number, number, number, number]; // (w, x, y, z)
}

export interface InstanceRecord {
  token: string;
  category_token: string;
}

export interface CategoryRecord {
  token: string;
  name: string;
  description?: string;
}

export interface EgoPoseRecord {
  sample_token: string;
  translation: [number, number, number];
  rotation: [number, number, number, number];
}

export interface DatasetTables {
  scenes: SceneRecord[];
  samples: SampleRecord[];
  annotations: AnnotationRecord[];
  instances: InstanceRecord[];
  categories: CategoryRecord[];
  egoPoses: EgoPoseRecord[];
}

// Output: the trace file schema consumed by the query engine.

export interface TraceTrack {
  id: string;
  type: string;
  desc: string;
  xs: (number | null)[];
  ys: (number | null)[];
  ts: number[];
  poses: ([number, number, number, number] | null)[];
  angles: (number | null)[];
  actions: (string | null)[];
}

export interface TraceFile {
  id: string;
  dt: number;
  T: number;
  ego_id: string;
  tracks: TraceTrack[];
  meta?: Record<string, unknown>;
}

export interface LabelThresholds {
  brakeDecel: number; // m/s^2
  accel: number; // m/s^2
  turnYawRate: number; // rad/s
  walkSpeed: number; // m/s
}

export const DEFAULT_THRESHOLDS: LabelThresholds = {
  brakeDecel: 1.5,
  accel: 1.0,
  turnYawRate: 0.15,
  walkSpeed: 0.3,
};

export interface AdapterConfig {
  root: string;
  outDir: string;
  scenes: string[]; // scene names; empty = nothing to do
  dt: number; // seconds per timestep
  horizon: number; // timesteps per trace file
  thresholds: LabelThresholds;
  classMap: Record<string, string>; // category name prefix -> emitted class
}

export const DEFAULT_CONFIG: Pick<AdapterConfig, "dt" | "horizon" | "thresholds" | "classMap"> = {
  dt: 0.5,
  horizon: 40,
  thresholds: DEFAULT_THRESHOLDS,
  classMap: {},
};
