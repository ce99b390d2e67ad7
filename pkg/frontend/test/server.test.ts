// Integration tests against a live preview service spawned from the CLI.
// These exercise the full UI contract: connect, preview, keyframe export,
// and CLI round-trip of the exported trajectory.

import { ChildProcess, execFileSync, spawn } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { PNG } from "pngjs";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient, ApiError, RenderResult } from "../src/api.js";
import { CameraControls } from "../src/controls.js";
import { identityPose } from "../src/pose.js";
import { Timeline } from "../src/timeline.js";
import { pythonOrbit } from "./pose.test.js";

const PORT = 8717;
const BASE = `http://127.0.0.1:${PORT}`;
const FRAMES = 4;

let workDir: string;
let clipDir: string;
let server: ChildProcess;
let api: ApiClient;

function decodePng(b64: string): PNG {
  return PNG.sync.read(Buffer.from(b64, "base64"));
}

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), "retraj-ui-"));
  clipDir = join(workDir, "clip");
  execFileSync("python3", [
    "-m", "retraj", "synth",
    "--seed", "3", "--frames", String(FRAMES),
    "--width", "32", "--height", "32", "--out", clipDir,
  ]);
  server = spawn("python3", [
    "-m", "retraj", "serve",
    "--clip", clipDir, "--port", String(PORT),
  ], { stdio: "ignore" });
  api = new ApiClient(BASE);
  for (let i = 0; ; i++) {
    try {
      const resp = await fetch(`${BASE}/healthz`);
      if (resp.ok) break;
    } catch {
      /* not up yet */
    }
    if (i > 100) throw new Error("preview service did not come up");
    await new Promise((r) => setTimeout(r, 200));
  }
}, 60000);

afterAll(() => {
  server?.kill();
  rmSync(workDir, { recursive: true, force: true });
});

describe("connect", () => {
  it("meta drives the timeline length", async () => {
    const meta = await api.meta();
    expect(meta.n).toBe(FRAMES);
    expect(meta.width).toBe(32);
    expect(meta.preview.factor).toBe(2);
    const timeline = new Timeline(meta.n);
    expect(() => timeline.capture(meta.n - 1, identityPose())).not.toThrow();
  });

  it("a bad URL surfaces an ApiError instead of crashing", async () => {
    const bad = new ApiClient("http://127.0.0.1:1");
    await expect(bad.meta()).rejects.toBeInstanceOf(ApiError);
  });
});

describe("preview rendering", () => {
  it("identity-pose preview equals the source frame at mask=1 pixels", async () => {
    const result = await api.render(identityPose(), 0, { fullResolution: true });
    const color = decodePng(result.color);
    const mask = decodePng(result.mask);
    const source = PNG.sync.read(readFileSync(join(clipDir, "frame_00000.png")));
    expect(color.width).toBe(source.width);
    expect(color.height).toBe(source.height);
    let covered = 0;
    for (let p = 0; p < color.width * color.height; p++) {
      if (mask.data[4 * p] === 0) continue; // hole
      covered++;
      for (let c = 0; c < 3; c++) {
        expect(color.data[4 * p + c]).toBe(source.data[4 * p + c]);
      }
    }
    expect(covered).toBeGreaterThan(0);
  });

  it("preview defaults to the downscaled resolution", async () => {
    const result = await api.render(identityPose(), 0);
    const color = decodePng(result.color);
    expect(color.width).toBe(16);
    expect(color.height).toBe(16);
  });

  it("out-of-range frame index is a 404", async () => {
    await expect(api.render(identityPose(), FRAMES)).rejects.toMatchObject({ status: 404 });
  });

  it("malformed pose is a 400 with detail", async () => {
    const resp = await fetch(`${BASE}/render`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ pose: { r: [1, 2], t: [0] }, frame_index: 0 }),
    });
    expect(resp.status).toBe(400);
    const body = await resp.json();
    expect(body.detail).toMatch(/pose/);
  });

  it("streams trajectory previews frame by frame", async () => {
    const traj = { n: FRAMES, poses: Array.from({ length: FRAMES }, () => identityPose()) };
    const seen: number[] = [];
    const count = await api.renderTrajectory(traj, (f: RenderResult) => seen.push(f.frame_index));
    expect(count).toBe(FRAMES);
    expect(seen).toEqual([0, 1, 2, 3]);
  });
});

describe("keyframe export", () => {
  it("two identity keyframes export a constant-identity trajectory", async () => {
    const timeline = new Timeline(FRAMES);
    timeline.capture(0, identityPose());
    timeline.capture(FRAMES - 1, identityPose());
    const traj = await timeline.export(api);
    expect(traj.n).toBe(FRAMES);
    for (const pose of traj.poses) {
      expect(pose.r).toEqual(identityPose().r);
      expect(pose.t).toEqual(identityPose().t);
    }
  });

  it("a drag-produced 90 degree orbit exports the parametric orbit and the CLI accepts it", async () => {
    // designer workflow: scrub through the clip, dragging 30 degrees (75 px
    // at 0.4 deg/px) between frames and capturing a keyframe at each one
    const controls = new CameraControls();
    const timeline = new Timeline(FRAMES);
    timeline.capture(0, controls.pose());
    for (let i = 1; i < FRAMES; i++) {
      for (let k = 0; k < 15; k++) controls.drag({ dx: 5, dy: 0, shift: false });
      timeline.capture(i, controls.pose());
    }
    expect(controls.yawDeg).toBeCloseTo(90, 10);
    const traj = await timeline.export(api);

    const expected = pythonOrbit(90, controls.config.pivotDepth, FRAMES);
    expect(traj.poses.length).toBe(FRAMES);
    for (let i = 0; i < FRAMES; i++) {
      for (let j = 0; j < 9; j++) {
        expect(Math.abs(traj.poses[i].r[j] - expected[i].r[j])).toBeLessThan(1e-4);
      }
      for (let j = 0; j < 3; j++) {
        expect(Math.abs(traj.poses[i].t[j] - expected[i].t[j])).toBeLessThan(1e-4);
      }
    }

    // the exported JSON must be accepted unmodified by the CLI
    const trajPath = join(workDir, "exported.json");
    writeFileSync(trajPath, JSON.stringify(traj));
    const outDir = join(workDir, "render-out");
    execFileSync("python3", [
      "-m", "retraj", "render",
      "--clip", clipDir, "--traj", trajPath, "--out", outDir,
    ]);
  }, 30000);

  it("export is blocked below two keyframes", async () => {
    const timeline = new Timeline(FRAMES);
    timeline.capture(0, identityPose());
    await expect(timeline.export(api)).rejects.toThrow(/export blocked/);
  });
});
