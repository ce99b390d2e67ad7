// Keyframe capture and export. Keyframes live client-side; interpolation is
// delegated to the service so the exported trajectory is contract-identical
// to the library's own keyframe interpolation.

import { ApiClient, Keyframe, TrajectoryJSON } from "./api.js";
import { Pose } from "./pose.js";

export class Timeline {
  readonly keyframes = new Map<number, Pose>();

  constructor(readonly n: number) {
    if (!Number.isInteger(n) || n < 1) throw new Error(`invalid frame count ${n}`);
  }

  capture(frameIndex: number, pose: Pose): void {
    if (!Number.isInteger(frameIndex) || frameIndex < 0 || frameIndex >= this.n) {
      throw new Error(`frame index ${frameIndex} outside [0, ${this.n})`);
    }
    this.keyframes.set(frameIndex, pose);
  }

  remove(frameIndex: number): void {
    this.keyframes.delete(frameIndex);
  }

  sortedKeys(): Keyframe[] {
    return [...this.keyframes.entries()].sort((a, b) => a[0] - b[0]);
  }

  // Export requires at least two keyframes and coverage of both endpoints so
  // the server-side interpolation is total over [0, n).
  exportBlocker(): string | null {
    if (this.keyframes.size < 2) return "need at least 2 keyframes";
    if (!this.keyframes.has(0)) return "need a keyframe at frame 0";
    if (!this.keyframes.has(this.n - 1)) return `need a keyframe at frame ${this.n - 1}`;
    return null;
  }

  async export(api: ApiClient): Promise<TrajectoryJSON> {
    const blocker = this.exportBlocker();
    if (blocker) throw new Error(`export blocked: ${blocker}`);
    return api.interpolate(this.sortedKeys(), this.n);
  }
}
