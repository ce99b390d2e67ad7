// Browser entry point: wires the controls, preview canvas, timeline, and
// export button to the preview service. All geometry and rendering is
// server-side; this file is DOM plumbing only.

import { ApiClient, ApiError, Meta, RenderQueue, RenderResult } from "./api.js";
import { CameraControls } from "./controls.js";
import { Timeline } from "./timeline.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function showError(message: string | null): void {
  const banner = el<HTMLDivElement>("error-banner");
  banner.textContent = message ?? "";
  banner.style.display = message ? "block" : "none";
}

async function drawPng(b64: string): Promise<ImageBitmap> {
  const bytes = Uint8Array.from(atob(b64), (c) => c.charCodeAt(0));
  return createImageBitmap(new Blob([bytes], { type: "image/png" }));
}

async function paint(result: RenderResult, controls: CameraControls): Promise<void> {
  const canvas = el<HTMLCanvasElement>("preview");
  const ctx = canvas.getContext("2d")!;
  const color = await drawPng(result.color);
  canvas.width = color.width;
  canvas.height = color.height;
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(color, 0, 0);
  if (controls.maskOverlay) {
    const mask = await drawPng(result.mask);
    const off = new OffscreenCanvas(mask.width, mask.height);
    const octx = off.getContext("2d")!;
    octx.drawImage(mask, 0, 0);
    const data = octx.getImageData(0, 0, mask.width, mask.height);
    const img = ctx.getImageData(0, 0, canvas.width, canvas.height);
    for (let i = 0; i < data.data.length; i += 4) {
      if (data.data[i] === 0) {
        // hole: tint red
        img.data[i] = Math.min(255, img.data[i] + 140);
        img.data[i + 1] = Math.floor(img.data[i + 1] * 0.4);
        img.data[i + 2] = Math.floor(img.data[i + 2] * 0.4);
      }
    }
    ctx.putImageData(img, 0, 0);
  }
}

export async function startApp(): Promise<void> {
  const serverInput = el<HTMLInputElement>("server-url");
  let api = new ApiClient(serverInput.value);
  let meta: Meta;
  try {
    meta = await api.meta();
    showError(null);
  } catch (err) {
    showError(err instanceof ApiError ? err.message : String(err));
    return;
  }

  const controls = new CameraControls();
  const timeline = new Timeline(meta.n);
  const scrubber = el<HTMLInputElement>("scrubber");
  scrubber.max = String(meta.n - 1);
  let frameIndex = 0;

  const queue = new RenderQueue<RenderResult>((result) => {
    void paint(result, controls);
  });
  const requestRender = (fullResolution = false) => {
    queue.submit(() => api.render(controls.pose(), frameIndex, { fullResolution }));
  };

  const canvas = el<HTMLCanvasElement>("preview");
  let dragging = false;
  canvas.addEventListener("pointerdown", (ev) => {
    dragging = true;
    canvas.setPointerCapture(ev.pointerId);
  });
  canvas.addEventListener("pointerup", () => {
    dragging = false;
    requestRender(true); // settle at full resolution
  });
  canvas.addEventListener("pointermove", (ev) => {
    if (!dragging) return;
    controls.drag({ dx: ev.movementX, dy: ev.movementY, shift: ev.shiftKey });
    requestRender();
  });
  canvas.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    controls.wheel(Math.sign(ev.deltaY));
    requestRender();
  });

  scrubber.addEventListener("input", () => {
    frameIndex = Number(scrubber.value);
    el<HTMLSpanElement>("frame-label").textContent = `frame ${frameIndex} / ${meta.n - 1}`;
    requestRender();
  });

  el<HTMLButtonElement>("mask-toggle").addEventListener("click", () => {
    controls.toggleMaskOverlay();
    requestRender();
  });
  el<HTMLButtonElement>("reset-camera").addEventListener("click", () => {
    controls.reset();
    requestRender();
  });

  const exportButton = el<HTMLButtonElement>("export-traj");
  const refreshExportState = () => {
    const blocker = timeline.exportBlocker();
    exportButton.disabled = blocker !== null;
    exportButton.title = blocker ?? "download Trajectory JSON";
    el<HTMLSpanElement>("keyframe-label").textContent =
      `${timeline.keyframes.size} keyframes` + (blocker ? ` (${blocker})` : "");
  };

  el<HTMLButtonElement>("capture-keyframe").addEventListener("click", () => {
    timeline.capture(frameIndex, controls.pose());
    refreshExportState();
  });

  exportButton.addEventListener("click", async () => {
    try {
      const traj = await timeline.export(api);
      const blob = new Blob([JSON.stringify(traj)], { type: "application/json" });
      const a = document.createElement("a");
      a.href = URL.createObjectURL(blob);
      a.download = "trajectory.json";
      a.click();
      URL.revokeObjectURL(a.href);
      showError(null);
    } catch (err) {
      showError(String(err));
    }
  });

  el<HTMLButtonElement>("reconnect").addEventListener("click", async () => {
    api = new ApiClient(serverInput.value);
    try {
      meta = await api.meta();
      scrubber.max = String(meta.n - 1);
      showError(null);
      requestRender();
    } catch (err) {
      showError(err instanceof ApiError ? err.message : String(err));
    }
  });

  refreshExportState();
  requestRender(); // identity preview of frame 0
}

if (typeof document !== "undefined" && document.getElementById("preview")) {
  void startApp();
}
