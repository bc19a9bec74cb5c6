/**
 * Heuristic kinematic action labeling: a stand-in for a learned behavior
 * classifier. Vehicles are labeled from longitudinal acceleration and yaw
 * rate; pedestrians from walking speed. Derivatives use central differences
 * inside each contiguous run of present samples and one-sided differences at
 * the run endpoints.
 */
import { wrapAngle } from "./quat.js";
import { LabelThresholds } from "./types.js";

export const FOLLOW_LANE = "FOLLOW_LANE";
export const BRAKE = "BRAKE";
export const ACCELERATE = "ACCELERATE";
export const TURN_LEFT = "TURN_LEFT";
export const TURN_RIGHT = "TURN_RIGHT";
export const CROSS_ROAD = "CROSS_ROAD";
export const WAIT = "WAIT";

export interface RunView {
  start: number;
  xs: number[];
  ys: number[];
  yaws: number[];
}

export function presentRuns(
  xs: (number | null)[],
  ys: (number | null)[],
  yaws: (number | null)[],
): RunView[] {
  const runs: RunView[] = [];
  let current: RunView | null = null;
  for (let t = 0; t < xs.length; t++) {
    const x = xs[t];
    const y = ys[t];
    const yaw = yaws[t];
    if (x !== null && y !== null && yaw !== null) {
      if (current === null) {
        current = { start: t, xs: [], ys: [], yaws: [] };
      }
      current.xs.push(x);
      current.ys.push(y);
      current.yaws.push(yaw);
    } else if (current !== null) {
      runs.push(current);
      current = null;
    }
  }
  if (current !== null) {
    runs.push(current);
  }
  return runs;
}

/** d/dt by central differences, one-sided at the ends. length >= 2. */
export function differentiate(values: number[], dt: number): number[] {
  const n = values.length;
  const out = new Array<number>(n);
  out[0] = (values[1] - values[0]) / dt;
  out[n - 1] = (values[n - 1] - values[n - 2]) / dt;
  for (let i = 1; i < n - 1; i++) {
    out[i] = (values[i + 1] - values[i - 1]) / (2 * dt);
  }
  return out;
}

function speeds(run: RunView, dt: number): number[] {
  const vx = differentiate(run.xs, dt);
  const vy = differentiate(run.ys, dt);
  return vx.map((v, i) => Math.hypot(v, vy[i]));
}

function yawRates(run: RunView, dt: number): number[] {
  // unwrap before differentiating so pi-crossings do not spike
  const unwrapped = [run.yaws[0]];
  for (let i = 1; i < run.yaws.length; i++) {
    unwrapped.push(unwrapped[i - 1] + wrapAngle(run.yaws[i] - run.yaws[i - 1]));
  }
  return differentiate(unwrapped, dt);
}

export function labelVehicleRun(run: RunView, dt: number, th: LabelThresholds): string[] {
  const v = speeds(run, dt);
  const a = differentiate(v, dt);
  const w = yawRates(run, dt);
  return v.map((_, i) => {
    if (a[i] <= -th.brakeDecel) {
      return BRAKE;
    }
    if (a[i] >= th.accel) {
      return ACCELERATE;
    }
    if (Math.abs(w[i]) >= th.turnYawRate) {
      return w[i] > 0 ? TURN_LEFT : TURN_RIGHT;
    }
    return FOLLOW_LANE;
  });
}

export function labelPedestrianRun(run: RunView, dt: number, th: LabelThresholds): string[] {
  // without map regions, any walking pedestrian counts as crossing
  return speeds(run, dt).map((s) => (s > th.walkSpeed ? CROSS_ROAD : WAIT));
}

export function labelActions(
  xs: (number | null)[],
  ys: (number | null)[],
  yaws: (number | null)[],
  cls: string,
  dt: number,
  th: LabelThresholds,
): (string | null)[] {
  const actions: (string | null)[] = new Array(xs.length).fill(null);
  for (const run of presentRuns(xs, ys, yaws)) {
    if (run.xs.length < 2) {
      continue; // a single sample has no kinematics to label
    }
    const labels = cls.startsWith("human.pedestrian")
      ? labelPedestrianRun(run, dt, th)
      : labelVehicleRun(run, dt, th);
    labels.forEach((label, i) => {
      actions[run.start + i] = label;
    });
  }
  return actions;
}
