// HTTP client for the retraj preview service. The UI never computes geometry
// beyond input-to-pose mapping; every rendered pixel comes from the service.

import { Pose, validatePose } from "./pose.js";

export interface Meta {
  n: number;
  width: number;
  height: number;
  intrinsics: { fx: number; fy: number; cx: number; cy: number; width: number; height: number };
  preview: { width: number; height: number; factor: number };
}

export interface RenderResult {
  color: string; // base64 PNG, RGB
  mask: string; // base64 PNG, L (255 = covered, 0 = hole)
  frame_index: number;
}

export interface TrajectoryJSON {
  n: number;
  poses: { r: number[]; t: number[] }[];
}

export type Keyframe = [number, Pose];

export class ApiError extends Error {
  constructor(message: string, readonly status?: number) {
    super(message);
  }
}

async function readDetail(resp: Response): Promise<string> {
  try {
    const body = await resp.json();
    return body.detail ?? JSON.stringify(body);
  } catch {
    return resp.statusText;
  }
}

export class ApiClient {
  constructor(readonly baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async post(path: string, body: unknown): Promise<Response> {
    let resp: Response;
    try {
      resp = await fetch(this.baseUrl + path, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(body),
      });
    } catch (err) {
      throw new ApiError(`server unreachable: ${err}`);
    }
    if (!resp.ok) throw new ApiError(await readDetail(resp), resp.status);
    return resp;
  }

  async meta(): Promise<Meta> {
    let resp: Response;
    try {
      resp = await fetch(this.baseUrl + "/meta");
    } catch (err) {
      throw new ApiError(`server unreachable: ${err}`);
    }
    if (!resp.ok) throw new ApiError(await readDetail(resp), resp.status);
    return (await resp.json()) as Meta;
  }

  async render(
    pose: Pose,
    frameIndex: number,
    opts: { splatRadius?: number; fullResolution?: boolean } = {},
  ): Promise<RenderResult> {
    validatePose(pose);
    const resp = await this.post("/render", {
      pose,
      frame_index: frameIndex,
      splat_radius: opts.splatRadius ?? 0,
      full_resolution: opts.fullResolution ?? false,
    });
    return (await resp.json()) as RenderResult;
  }

  // Streams NDJSON frames; onFrame is invoked in order.
  async renderTrajectory(
    traj: TrajectoryJSON,
    onFrame: (frame: RenderResult) => void,
  ): Promise<number> {
    const resp = await this.post("/trajectory/render", traj);
    const reader = resp.body!.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    let count = 0;
    for (;;) {
      const { done, value } = await reader.read();
      if (done) break;
      buffer += decoder.decode(value, { stream: true });
      let nl;
      while ((nl = buffer.indexOf("\n")) >= 0) {
        const line = buffer.slice(0, nl).trim();
        buffer = buffer.slice(nl + 1);
        if (line) {
          onFrame(JSON.parse(line) as RenderResult);
          count++;
        }
      }
    }
    return count;
  }

  // Server-side keyframe interpolation; the returned object is the exact
  // Trajectory JSON accepted by the CLI.
  async interpolate(keys: Keyframe[], n: number): Promise<TrajectoryJSON> {
    const resp = await this.post("/trajectory/interpolate", {
      keys: keys.map(([i, p]) => [i, p]),
      n,
    });
    return (await resp.json()) as TrajectoryJSON;
  }
}

// Latest-wins scheduler: at most one request in flight; while one is running
// the newest submission replaces any queued one, stale results are dropped.
export class RenderQueue<T> {
  private inFlight = false;
  private pending: (() => Promise<T>) | null = null;
  private seq = 0;

  constructor(private readonly deliver: (result: T) => void) {}

  submit(job: () => Promise<T>): void {
    this.pending = job;
    void this.pump();
  }

  private async pump(): Promise<void> {
    if (this.inFlight || !this.pending) return;
    const job = this.pending;
    this.pending = null;
    this.inFlight = true;
    const ticket = ++this.seq;
    try {
      const result = await job();
      if (ticket === this.seq && !this.pending) this.deliver(result);
    } finally {
      this.inFlight = false;
      void this.pump();
    }
  }
}
