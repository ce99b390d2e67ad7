// Input-event to pose mapping: drag = orbit about a configurable pivot depth,
// scroll = dolly along the optical axis, shift-drag = pan in the image plane.
// The orbit uses the same closed form as the service's parametric orbit
// (rotate about (0, 0, pivot), translate by (I - R) c), so a pure horizontal
// drag exports a pose identical to the parametric trajectory.

import { composePose, identityPose, orbitPose, Pose, translatePose } from "./pose.js";

export interface ControlConfig {
  pivotDepth: number;
  degreesPerPixel: number; // orbit sensitivity
  dollyPerTick: number; // scene units per wheel tick
  panPerPixel: number; // scene units per pixel of shift-drag
}

export const DEFAULT_CONFIG: ControlConfig = {
  pivotDepth: 2.0,
  degreesPerPixel: 0.4,
  dollyPerTick: 0.05,
  panPerPixel: 0.01,
};

export interface DragEventLike {
  dx: number; // pixels, +right
  dy: number; // pixels, +down
  shift: boolean;
}

export class CameraControls {
  yawDeg = 0; // orbit about +y (drag x)
  pitchDeg = 0; // orbit about +x (drag y)
  dollyZ = 0;
  panX = 0;
  panY = 0;
  maskOverlay = true;

  constructor(readonly config: ControlConfig = { ...DEFAULT_CONFIG }) {}

  reset(): void {
    this.yawDeg = 0;
    this.pitchDeg = 0;
    this.dollyZ = 0;
    this.panX = 0;
    this.panY = 0;
  }

  drag(ev: DragEventLike): void {
    if (ev.shift) {
      this.panX += ev.dx * this.config.panPerPixel;
      this.panY += ev.dy * this.config.panPerPixel;
    } else {
      this.yawDeg += ev.dx * this.config.degreesPerPixel;
      this.pitchDeg += ev.dy * this.config.degreesPerPixel;
    }
  }

  wheel(ticks: number): void {
    this.dollyZ += ticks * this.config.dollyPerTick;
  }

  toggleMaskOverlay(): boolean {
    this.maskOverlay = !this.maskOverlay;
    return this.maskOverlay;
  }

  // Current pose: pitch orbit composed onto yaw orbit (both about the same
  // pivot), then dolly/pan as a plain translation. With a single-axis drag
  // this reduces exactly to the parametric orbit formula.
  pose(): Pose {
    let p = identityPose();
    if (this.yawDeg !== 0) p = orbitPose([0, 1, 0], this.yawDeg, this.config.pivotDepth);
    if (this.pitchDeg !== 0) {
      p = composePose(orbitPose([1, 0, 0], this.pitchDeg, this.config.pivotDepth), p);
    }
    if (this.dollyZ !== 0 || this.panX !== 0 || this.panY !== 0) {
      p = translatePose(p, [this.panX, this.panY, this.dollyZ]);
    }
    return p;
  }
}
