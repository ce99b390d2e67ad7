import { execFileSync } from "node:child_process";
import { describe, expect, it } from "vitest";

import {
  axisAngleMatrix,
  composePose,
  identityPose,
  matMul,
  matVec,
  orbitPose,
  Pose,
  posesClose,
  validatePose,
} from "../src/pose.js";

// Authoritative parametric trajectory from the python library; the UI's
// control math must agree with it within 1e-4.
export function pythonOrbit(totalDegrees: number, pivotDepth: number, n: number): Pose[] {
  const code = [
    "import json, sys",
    "from retraj.trajectory import TrajectorySpec, generate",
    "deg, pivot, n = float(sys.argv[1]), float(sys.argv[2]), int(sys.argv[3])",
    "traj = generate(TrajectorySpec('orbit', {'axis': 'y', 'total_degrees': deg, 'pivot_depth': pivot}), n)",
    "print(json.dumps(traj.to_dict()))",
  ].join("\n");
  const out = execFileSync("python3", ["-c", code, String(totalDegrees), String(pivotDepth), String(n)], {
    encoding: "utf8",
  });
  return JSON.parse(out).poses as Pose[];
}

describe("pose math", () => {
  it("identity pose is the identity", () => {
    const p = identityPose();
    expect(p.r).toEqual([1, 0, 0, 0, 1, 0, 0, 0, 1]);
    expect(p.t).toEqual([0, 0, 0]);
  });

  it("axis-angle matrices are orthonormal", () => {
    const r = axisAngleMatrix([0.3, -0.8, 0.5], 37.5);
    const rt = [r[0], r[3], r[6], r[1], r[4], r[7], r[2], r[5], r[8]];
    const prod = matMul(rt, r);
    const eye = [1, 0, 0, 0, 1, 0, 0, 0, 1];
    for (let i = 0; i < 9; i++) expect(prod[i]).toBeCloseTo(eye[i], 12);
  });

  it("orbit keeps the pivot fixed", () => {
    const pivot = 2.5;
    const p = orbitPose([0, 1, 0], 63, pivot);
    const moved = matVec(p.r, [0, 0, pivot]);
    expect(moved[0] + p.t[0]).toBeCloseTo(0, 12);
    expect(moved[1] + p.t[1]).toBeCloseTo(0, 12);
    expect(moved[2] + p.t[2]).toBeCloseTo(pivot, 12);
  });

  it("orbit matches the service's parametric orbit", () => {
    const poses = pythonOrbit(90, 2.0, 3);
    for (const [i, deg] of [
      [0, 0],
      [1, 45],
      [2, 90],
    ] as const) {
      const mine = orbitPose([0, 1, 0], deg, 2.0);
      expect(posesClose(mine, poses[i], 1e-10)).toBe(true);
    }
  });

  it("compose applies right-to-left", () => {
    const a = orbitPose([0, 1, 0], 30, 2.0);
    const b = orbitPose([0, 1, 0], 60, 2.0);
    const ab = composePose(a, a);
    expect(posesClose(ab, b, 1e-12)).toBe(true);
  });

  it("validatePose rejects malformed poses", () => {
    expect(() => validatePose({ r: [1, 2, 3], t: [0, 0, 0] })).toThrow(/9 rotation/);
    expect(() => validatePose({ r: identityPose().r, t: [0, 0, Number.NaN] })).toThrow(/finite/);
  });
});
