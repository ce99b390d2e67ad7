// Minimal SE(3) pose math for camera controls. The service owns all heavy
// geometry; the UI only maps input events to poses, so this file stays tiny.
//
// Conventions match the render service: +z forward, +y down, rotations are
// row-major 3x3 matrices, and a pose {r, t} maps source-camera coordinates
// to target-camera coordinates (x_t = R x_s + t).

export interface Pose {
  r: number[]; // 9 entries, row-major
  t: number[]; // 3 entries
}

export type Vec3 = [number, number, number];

export function identityPose(): Pose {
  return { r: [1, 0, 0, 0, 1, 0, 0, 0, 1], t: [0, 0, 0] };
}

export function matMul(a: number[], b: number[]): number[] {
  const out = new Array<number>(9).fill(0);
  for (let i = 0; i < 3; i++) {
    for (let j = 0; j < 3; j++) {
      let s = 0;
      for (let k = 0; k < 3; k++) s += a[3 * i + k] * b[3 * k + j];
      out[3 * i + j] = s;
    }
  }
  return out;
}

export function matVec(a: number[], v: Vec3): Vec3 {
  return [
    a[0] * v[0] + a[1] * v[1] + a[2] * v[2],
    a[3] * v[0] + a[4] * v[1] + a[5] * v[2],
    a[6] * v[0] + a[7] * v[1] + a[8] * v[2],
  ];
}

// Rodrigues' formula for a rotation about a unit axis.
export function axisAngleMatrix(axis: Vec3, degrees: number): number[] {
  const norm = Math.hypot(axis[0], axis[1], axis[2]);
  if (norm === 0) throw new Error("rotation axis must be nonzero");
  const [x, y, z] = [axis[0] / norm, axis[1] / norm, axis[2] / norm];
  const th = (degrees * Math.PI) / 180;
  const c = Math.cos(th);
  const s = Math.sin(th);
  const C = 1 - c;
  return [
    c + x * x * C, x * y * C - z * s, x * z * C + y * s,
    y * x * C + z * s, c + y * y * C, y * z * C - x * s,
    z * x * C - y * s, z * y * C + x * s, c + z * z * C,
  ];
}

// Orbit about the point (0, 0, pivotDepth) on the optical axis: rotate by R
// and translate by (I - R) c so the pivot stays fixed in camera coordinates.
export function orbitPose(axis: Vec3, degrees: number, pivotDepth: number): Pose {
  const r = axisAngleMatrix(axis, degrees);
  const c: Vec3 = [0, 0, pivotDepth];
  const rc = matVec(r, c);
  return { r, t: [c[0] - rc[0], c[1] - rc[1], c[2] - rc[2]] };
}

export function composePose(second: Pose, first: Pose): Pose {
  // x -> second(first(x))
  const r = matMul(second.r, first.r);
  const rt = matVec(second.r, first.t as Vec3);
  return {
    r,
    t: [rt[0] + second.t[0], rt[1] + second.t[1], rt[2] + second.t[2]],
  };
}

export function translatePose(pose: Pose, delta: Vec3): Pose {
  return { r: [...pose.r], t: [pose.t[0] + delta[0], pose.t[1] + delta[1], pose.t[2] + delta[2]] };
}

export function posesClose(a: Pose, b: Pose, tol: number): boolean {
  for (let i = 0; i < 9; i++) if (Math.abs(a.r[i] - b.r[i]) > tol) return false;
  for (let i = 0; i < 3; i++) if (Math.abs(a.t[i] - b.t[i]) > tol) return false;
  return true;
}

export function validatePose(pose: Pose): void {
  if (pose.r.length !== 9 || pose.t.length !== 3) {
    throw new Error(`pose needs 9 rotation and 3 translation entries, got ${pose.r.length}/${pose.t.length}`);
  }
  for (const v of [...pose.r, ...pose.t]) {
    if (!Number.isFinite(v)) throw new Error("pose entries must be finite");
  }
}
