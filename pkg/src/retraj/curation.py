"""Training-data curation.

Monocular clips become (condition, target) pairs via double-reprojection:
warp the clip to a random novel view and back, so the condition realigns with
the target but carries disocclusion holes. Posed multi-view material becomes
(source, condition, target) triplets by rendering the source clip's point
cloud at the target clip's poses.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import clipio
from .errors import FormatError, ShapeError, ValidationError
from .geometry import CameraIntrinsics, PoseSE3, compose, invert, lift_frame
from .renderer import render_frame
from .synthscene import SceneDescription, render_scene
from .trajectory import sample_transform

DEFAULT_RANGES = {"max_rotation_degrees": 15.0, "max_translation": None}
TRANSLATION_DEPTH_FRACTION = 0.15


@dataclass
class TrainingPair:
    condition_color: np.ndarray  # (n, h, w, 3), holes black
    condition_mask: np.ndarray   # (n, h, w) bool
    target_color: np.ndarray     # (n, h, w, 3)
    meta: dict = field(default_factory=dict)

    kind = "pair"


@dataclass
class TrainingTriplet:
    source_color: np.ndarray
    condition_color: np.ndarray
    condition_mask: np.ndarray
    target_color: np.ndarray
    meta: dict = field(default_factory=dict)

    kind = "triplet"


def double_reproject(target, depths, k: CameraIntrinsics, delta: PoseSE3,
                     splat_radius: int = 0):
    """Warp each frame to the delta view and back. Returns
    (condition_color (n,h,w,3), condition_mask (n,h,w) bool) aligned with the
    target; holes are black with mask 0."""
    target = np.asarray(target, dtype=np.float64)
    depths = np.asarray(depths, dtype=np.float64)
    if len(target) != len(depths):
        raise ShapeError(f"{len(target)} color frames vs {len(depths)} depth frames")
    inv_delta = invert(delta)
    cond = np.zeros_like(target)
    mask = np.zeros(depths.shape, dtype=bool)
    for i in range(len(target)):
        cloud = lift_frame(target[i], depths[i], k)
        away = render_frame(cloud, delta, k, splat_radius=splat_radius)
        back_cloud = lift_frame(away.color, away.depth, k)
        back = render_frame(back_cloud, inv_delta, k, splat_radius=splat_radius)
        cond[i] = back.color
        mask[i] = back.mask
    return cond, mask


def make_monocular_pair(clip_dir, seed: int, ranges: dict | None = None,
                        splat_radius: int = 0) -> TrainingPair:
    """Curate one pair from a clip directory with a seeded random transform.
    max_translation defaults to 0.15x the median depth of frame 0."""
    colors, depths, k, _ = clipio.read_clip(clip_dir)
    return make_pair_from_arrays(np.asarray(colors), np.asarray(depths), k, seed,
                                 ranges=ranges, splat_radius=splat_radius,
                                 clip_name=str(clip_dir))


def make_pair_from_arrays(colors, depths, k: CameraIntrinsics, seed: int,
                          ranges: dict | None = None, splat_radius: int = 0,
                          clip_name: str = "") -> TrainingPair:
    ranges = dict(ranges or DEFAULT_RANGES)
    if ranges.get("max_translation") is None:
        valid = depths[0][depths[0] > 0]
        med = float(np.median(valid)) if valid.size else 1.0
        ranges["max_translation"] = TRANSLATION_DEPTH_FRACTION * med
    delta = sample_transform(seed, ranges)
    cond, mask = double_reproject(colors, depths, k, delta, splat_radius=splat_radius)
    meta = {"seed": seed, "delta": delta.to_dict(), "intrinsics": k.to_dict(),
            "ranges": {kk: (list(v) if isinstance(v, (list, tuple, np.ndarray)) else v)
                       for kk, v in ranges.items()},
            "clip": clip_name}
    return TrainingPair(condition_color=cond, condition_mask=mask,
                        target_color=np.asarray(colors, dtype=np.float64), meta=meta)


MIN_OVERLAP = 0.2


def make_multiview_triplet(scene: SceneDescription, poses, src_window, tgt_window,
                           k: CameraIntrinsics | None = None,
                           splat_radius: int = 0) -> TrainingTriplet:
    """Triplet from a posed camera path over a scene: the source window's point
    cloud rendered at the target window's poses is the condition. Windows must
    have equal length and overlapping content (>= 20% mean mask coverage)."""
    k = k or scene.intrinsics
    s0, slen = src_window
    t0, tlen = tgt_window
    if slen != tlen:
        raise ShapeError(f"window lengths differ: {slen} vs {tlen}")
    if s0 < 0 or t0 < 0 or s0 + slen > len(poses) or t0 + tlen > len(poses):
        raise ValidationError("window exceeds camera path length")
    src_c, cond_c, tgt_c = [], [], []
    cond_m = []
    for j in range(slen):
        ps, pt = poses[s0 + j], poses[t0 + j]
        sc, sd = render_scene(scene, ps, k, min(s0 + j, scene.n - 1))
        tc, _ = render_scene(scene, pt, k, min(t0 + j, scene.n - 1))
        rel = compose(pt, invert(ps))  # source-camera -> target-camera coords
        out = render_frame(lift_frame(sc, sd, k), rel, k, splat_radius=splat_radius)
        src_c.append(sc)
        tgt_c.append(tc)
        cond_c.append(out.color)
        cond_m.append(out.mask)
    cond_m = np.asarray(cond_m)
    coverage = float(cond_m.mean())
    if coverage < MIN_OVERLAP:
        raise ValidationError(
            f"windows do not overlap enough: mask coverage {coverage:.2f} < {MIN_OVERLAP}")
    meta = {"intrinsics": k.to_dict(), "src_window": [s0, slen], "tgt_window": [t0, tlen],
            "source_poses": [poses[s0 + j].to_dict() for j in range(slen)],
            "target_poses": [poses[t0 + j].to_dict() for j in range(tlen)],
            "coverage": coverage}
    return TrainingTriplet(source_color=np.asarray(src_c), condition_color=np.asarray(cond_c),
                           condition_mask=cond_m, target_color=np.asarray(tgt_c), meta=meta)


def _write_video(dir_path: Path, video: np.ndarray):
    dir_path.mkdir(parents=True, exist_ok=True)
    for i, frame in enumerate(video):
        clipio.save_png(dir_path / f"frame_{i:05d}.png", frame)


def _read_video(dir_path: Path, n: int) -> np.ndarray:
    return np.asarray([clipio.load_png(dir_path / f"frame_{i:05d}.png") for i in range(n)])


def write_dataset(items, out_dir) -> dict:
    """dataset/{manifest.json, item_%06d/{target/, condition/, mask/,
    source/ (triplets only), meta.json}}. Returns the manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for idx, item in enumerate(items):
        d = out / f"item_{idx:06d}"
        _write_video(d / "target", item.target_color)
        _write_video(d / "condition", item.condition_color)
        (d / "mask").mkdir(parents=True, exist_ok=True)
        for i, m in enumerate(item.condition_mask):
            clipio.save_mask_png(d / "mask" / f"frame_{i:05d}.png", m)
        if item.kind == "triplet":
            _write_video(d / "source", item.source_color)
        meta = dict(item.meta)
        meta["kind"] = item.kind
        meta["frame_count"] = int(len(item.target_color))
        (d / "meta.json").write_text(json.dumps(meta, indent=2))
        entries.append({"id": f"item_{idx:06d}", "kind": item.kind,
                        "seed": item.meta.get("seed")})
    manifest = {"count": len(entries), "items": entries}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return manifest


def read_dataset(dataset_dir) -> list:
    """Inverse of write_dataset, up to 8-bit color quantization."""
    root = Path(dataset_dir)
    try:
        manifest = json.loads((root / "manifest.json").read_text())
    except FileNotFoundError as e:
        raise FormatError(f"{root}: no manifest.json") from e
    except json.JSONDecodeError as e:
        raise FormatError(f"{root}: corrupt manifest ({e})") from e
    if "items" not in manifest or "count" not in manifest:
        raise FormatError(f"{root}: manifest missing required keys")
    items = []
    for entry in manifest["items"]:
        d = root / entry["id"]
        if not d.is_dir():
            raise FormatError(f"{root}: manifest lists missing item {entry['id']}")
        meta = json.loads((d / "meta.json").read_text())
        n = int(meta["frame_count"])
        target = _read_video(d / "target", n)
        cond = _read_video(d / "condition", n)
        mask = np.asarray([clipio.load_mask_png(d / "mask" / f"frame_{i:05d}.png")
                           for i in range(n)])
        if meta["kind"] == "triplet":
            source = _read_video(d / "source", n)
            items.append(TrainingTriplet(source_color=source, condition_color=cond,
                                         condition_mask=mask, target_color=target, meta=meta))
        else:
            items.append(TrainingPair(condition_color=cond, condition_mask=mask,
                                      target_color=target, meta=meta))
    return items
