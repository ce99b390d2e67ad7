"""HTTP preview service for interactive trajectory design.

Loads one clip, lifts it to a dynamic point cloud once at startup, and serves
stateless point-cloud preview renders. Diffusion sampling stays in the CLI;
the service only does geometry, so previews are interactive.
"""
from __future__ import annotations

import base64
import io
import json

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, StreamingResponse
from PIL import Image

from . import clipio
from .errors import RetrajError, ValidationError
from .geometry import CameraIntrinsics, PoseSE3, lift_video
from .renderer import render_frame
from .trajectory import Trajectory, interpolate_keyframes


def _png_b64(arr_uint8: np.ndarray, mode: str) -> str:
    buf = io.BytesIO()
    Image.fromarray(arr_uint8, mode=mode).save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def _encode_render(out) -> dict:
    color = np.clip(np.rint(out.color * 255.0), 0, 255).astype(np.uint8)
    mask = np.where(out.mask, 255, 0).astype(np.uint8)
    return {"color": _png_b64(color, "RGB"), "mask": _png_b64(mask, "L")}


def _parse_pose(data) -> PoseSE3:
    if not isinstance(data, dict) or "r" not in data or "t" not in data:
        raise ValidationError("pose must be an object with 'r' (9 floats) and 't' (3 floats)")
    return PoseSE3.from_dict(data)


def make_app(clip_dir, resolution_factor: int = 2) -> FastAPI:
    colors, depths, k, _ = clipio.read_clip(clip_dir)
    cloud = lift_video(colors, depths, k)  # immutable after startup
    if resolution_factor < 1:
        raise ValidationError(f"resolution factor must be >= 1, got {resolution_factor}")
    f = resolution_factor
    preview_k = CameraIntrinsics(fx=k.fx / f, fy=k.fy / f, cx=k.cx / f, cy=k.cy / f,
                                 width=max(1, k.width // f), height=max(1, k.height // f))

    app = FastAPI(title="retraj preview service")

    @app.exception_handler(ValidationError)
    async def _validation_handler(request: Request, exc: ValidationError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok"}

    @app.get("/meta")
    async def meta():
        return {"n": len(cloud), "width": k.width, "height": k.height,
                "intrinsics": k.to_dict(),
                "preview": {"width": preview_k.width, "height": preview_k.height,
                            "factor": f}}

    def _render_one(pose: PoseSE3, frame_index: int, splat_radius: int,
                    full_resolution: bool):
        ki = k if full_resolution else preview_k
        return render_frame(cloud.frames[frame_index], pose, ki,
                            splat_radius=splat_radius)

    @app.post("/render")
    async def render(request: Request):
        body = await request.json()
        if not isinstance(body, dict):
            raise ValidationError("body must be a JSON object")
        frame_index = int(body.get("frame_index", 0))
        if not (0 <= frame_index < len(cloud)):
            return JSONResponse(status_code=404,
                                content={"detail": f"frame {frame_index} out of range "
                                                   f"[0, {len(cloud)})"})
        pose = _parse_pose(body.get("pose"))
        out = _render_one(pose, frame_index, int(body.get("splat_radius", 0)),
                          bool(body.get("full_resolution", False)))
        payload = _encode_render(out)
        payload["frame_index"] = frame_index
        return payload

    @app.post("/trajectory/render")
    async def trajectory_render(request: Request):
        body = await request.json()
        traj = Trajectory.from_dict(body)
        if len(traj) != len(cloud):
            raise ValidationError(f"trajectory has {len(traj)} poses, clip has {len(cloud)}")
        splat_radius = int(request.query_params.get("splat_radius", 0))

        def frames():
            for i, pose in enumerate(traj.poses):
                out = _render_one(pose, i, splat_radius, False)
                payload = _encode_render(out)
                payload["frame_index"] = i
                yield json.dumps(payload) + "\n"

        return StreamingResponse(frames(), media_type="application/x-ndjson")

    @app.post("/trajectory/interpolate")
    async def trajectory_interpolate(request: Request):
        body = await request.json()
        if not isinstance(body, dict) or "keys" not in body or "n" not in body:
            raise ValidationError("body must contain 'keys' and 'n'")
        keys = [(int(i), _parse_pose(p)) for i, p in body["keys"]]
        traj = interpolate_keyframes(keys, int(body["n"]))
        return traj.to_dict()

    return app
