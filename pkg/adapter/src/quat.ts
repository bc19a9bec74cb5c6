export type Quat = [number, number, number, number]; // (w, x, y, z)

export function quatNorm(q: Quat): number {
  return Math.hypot(q[0], q[1], q[2], q[3]);
}

export function normalizeQuat(q: Quat): Quat {
  const n = quatNorm(q);
  if (n === 0) {
    throw new Error("zero quaternion");
  }
  return [q[0] / n, q[1] / n, q[2] / n, q[3] / n];
}

/** Heading (rotation about +z) of a unit quaternion, in (-pi, pi]. */
export function yawFromQuat(q: Quat): number {
  const [w, x, y, z] = q;
  const yaw = Math.atan2(2 * (w * z + x * y), 1 - 2 * (y * y + z * z));
  return wrapAngle(yaw);
}

export function quatFromYaw(yaw: number): Quat {
  return [Math.cos(yaw / 2), 0, 0, Math.sin(yaw / 2)];
}

export function wrapAngle(theta: number): number {
  let t = (theta + Math.PI) % (2 * Math.PI);
  if (t <= 0) {
    t += 2 * Math.PI;
  }
  return t - Math.PI;
}
