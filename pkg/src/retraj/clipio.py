"""Clip directory I/O.

Layout per clip ("depth-raw v1"):
    meta.json          {width, height, frame_count, units: "arbitrary"}
    intrinsics.json    {fx, fy, cx, cy, width, height}
    frame_%05d.png     8-bit RGB color
    frame_%05d.depth   height*width little-endian float32, row-major, no header
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import FormatError, ShapeError
from .geometry import CameraIntrinsics


def save_png(path, color: np.ndarray):
    """color: (h, w, 3) float in [0, 1] or uint8."""
    if color.dtype != np.uint8:
        color = np.clip(np.rint(color * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(color, mode="RGB").save(path)


def load_png(path) -> np.ndarray:
    """Returns (h, w, 3) float64 in [0, 1]."""
    with Image.open(path) as im:
        arr = np.asarray(im.convert("RGB"))
    return arr.astype(np.float64) / 255.0


def save_mask_png(path, mask: np.ndarray):
    Image.fromarray(np.where(mask.astype(bool), 255, 0).astype(np.uint8), mode="L").save(path)


def load_mask_png(path) -> np.ndarray:
    with Image.open(path) as im:
        arr = np.asarray(im.convert("L"))
    return arr >= 128


def save_depth(path, depth: np.ndarray):
    np.asarray(depth, dtype="<f4").tofile(path)


def load_depth(path, width: int, height: int) -> np.ndarray:
    raw = np.fromfile(path, dtype="<f4")
    if raw.size != width * height:
        raise FormatError(f"{path}: expected {width * height} floats, got {raw.size}")
    return raw.reshape(height, width).astype(np.float64)


def write_clip(out_dir, colors, depths, k: CameraIntrinsics, extra_meta: dict | None = None):
    """Write a clip directory; colors are quantized to 8-bit PNG."""
    if len(colors) != len(depths):
        raise ShapeError(f"{len(colors)} color frames vs {len(depths)} depth frames")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta = {"width": k.width, "height": k.height, "frame_count": len(colors), "units": "arbitrary"}
    if extra_meta:
        meta.update(extra_meta)
    (out / "meta.json").write_text(json.dumps(meta, indent=2))
    (out / "intrinsics.json").write_text(json.dumps(k.to_dict(), indent=2))
    for i, (c, d) in enumerate(zip(colors, depths)):
        save_png(out / f"frame_{i:05d}.png", c)
        save_depth(out / f"frame_{i:05d}.depth", d)


def read_clip(clip_dir):
    """Returns (colors, depths, intrinsics, meta); colors float in [0, 1]."""
    clip = Path(clip_dir)
    try:
        meta = json.loads((clip / "meta.json").read_text())
        k = CameraIntrinsics.from_dict(json.loads((clip / "intrinsics.json").read_text()))
    except FileNotFoundError as e:
        raise FormatError(f"{clip}: not a clip directory ({e})") from e
    except (json.JSONDecodeError, KeyError) as e:
        raise FormatError(f"{clip}: malformed metadata ({e})") from e
    n = int(meta["frame_count"])
    colors, depths = [], []
    for i in range(n):
        png = clip / f"frame_{i:05d}.png"
        raw = clip / f"frame_{i:05d}.depth"
        if not png.exists() or not raw.exists():
            raise FormatError(f"{clip}: missing frame {i}")
        colors.append(load_png(png))
        depths.append(load_depth(raw, k.width, k.height))
    return colors, depths, k, meta
