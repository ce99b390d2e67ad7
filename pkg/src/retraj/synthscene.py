"""Procedural layered scenes with analytic ray-plane geometry.

A scene is an ordered set of fronto-parallel textured rectangles (in the
canonical/source camera frame) whose depth is affine in time and whose
in-plane offset follows a linear or sinusoidal motion. The farthest layer is
a full-frame background, so every pixel ray hits something. Renders are
exact ray-plane intersections, which makes the scene usable as a brute-force
oracle for the point-splat renderer and the curation pipeline.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .geometry import Z_NEAR, CameraIntrinsics, PoseSE3

MIN_DEPTH = 0.2
MIN_SEPARATION = 0.05


@dataclass
class Layer:
    depth0: float             # depth at normalized time 0
    depth_rate: float         # depth(t) = depth0 + depth_rate * tn, tn in [0, 1]
    half_x: float             # rectangle half-extents; inf => full-frame background
    half_y: float
    motion_kind: str          # "linear" | "sinusoid" | "none"
    motion_ax: float          # linear: velocity; sinusoid: amplitude
    motion_ay: float
    motion_period: float      # sinusoid period in normalized time
    texture: dict             # per-channel gradient + stripe parameters

    def depth_at(self, tn: float) -> float:
        return self.depth0 + self.depth_rate * tn

    def offset_at(self, tn: float):
        if self.motion_kind == "linear":
            return self.motion_ax * tn, self.motion_ay * tn
        if self.motion_kind == "sinusoid":
            ph = 2 * np.pi * tn / self.motion_period
            return self.motion_ax * np.sin(ph), self.motion_ay * np.sin(ph)
        return 0.0, 0.0

    def to_dict(self) -> dict:
        return {"depth0": self.depth0, "depth_rate": self.depth_rate,
                "half_x": self.half_x, "half_y": self.half_y,
                "motion_kind": self.motion_kind, "motion_ax": self.motion_ax,
                "motion_ay": self.motion_ay, "motion_period": self.motion_period,
                "texture": self.texture}

    @classmethod
    def from_dict(cls, d: dict) -> "Layer":
        return cls(**d)


@dataclass
class SceneDescription:
    layers: list              # nearest-first not required; background must be farthest
    seed: int
    n: int                    # duration in frames
    width: int
    height: int
    intrinsics: CameraIntrinsics = field(default=None)

    def __post_init__(self):
        if self.intrinsics is None:
            self.intrinsics = CameraIntrinsics.default(self.width, self.height)
        self._check_invariants()

    def _check_invariants(self):
        ts = np.linspace(0.0, 1.0, max(self.n, 2) * 4)
        for tn in ts:
            depths = sorted(l.depth_at(tn) for l in self.layers)
            if depths[0] <= MIN_DEPTH:
                raise ValidationError(f"layer depth {depths[0]:.3f} <= {MIN_DEPTH} at t={tn:.2f}")
            gaps = np.diff(depths)
            if len(gaps) and gaps.min() < MIN_SEPARATION:
                raise ValidationError(
                    f"layer depths separated by {gaps.min():.3f} < {MIN_SEPARATION} at t={tn:.2f}")

    def tn(self, t: int) -> float:
        return t / (self.n - 1) if self.n > 1 else 0.0

    def to_dict(self) -> dict:
        return {"layers": [l.to_dict() for l in self.layers], "seed": self.seed,
                "n": self.n, "width": self.width, "height": self.height,
                "intrinsics": self.intrinsics.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "SceneDescription":
        return cls(layers=[Layer.from_dict(l) for l in d["layers"]], seed=int(d["seed"]),
                   n=int(d["n"]), width=int(d["width"]), height=int(d["height"]),
                   intrinsics=CameraIntrinsics.from_dict(d["intrinsics"]))

    def save(self, path):
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2)

    @classmethod
    def load(cls, path) -> "SceneDescription":
        with open(path) as f:
            return cls.from_dict(json.load(f))


def _random_texture(rng: np.random.Generator, scene_base: np.ndarray) -> dict:
    # band-limited: smooth gradient + one low-frequency stripe per channel.
    # Layer bases cluster around a shared scene color so occlusion-boundary
    # pixels (the only nearest-pixel resampling error of O(1)) stay moderate.
    theta = rng.uniform(0, 2 * np.pi)
    return {
        "base": (scene_base + rng.uniform(-0.05, 0.05, size=3)).tolist(),
        "grad": rng.uniform(-0.08, 0.08, size=(3, 2)).tolist(),
        "stripe_amp": rng.uniform(0.04, 0.12, size=3).tolist(),
        "stripe_freq": float(rng.uniform(0.3, 1.2)),
        "stripe_dir": [float(np.cos(theta)), float(np.sin(theta))],
        "stripe_phase": rng.uniform(0, 2 * np.pi, size=3).tolist(),
    }


def _texture_rgb(tex: dict, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    base = np.asarray(tex["base"])
    grad = np.asarray(tex["grad"])
    amp = np.asarray(tex["stripe_amp"])
    dx, dy = tex["stripe_dir"]
    phase = np.asarray(tex["stripe_phase"])
    s = 2 * np.pi * tex["stripe_freq"] * (dx * x + dy * y)
    out = (base[None, :]
           + x[:, None] * grad[None, :, 0] + y[:, None] * grad[None, :, 1]
           + amp[None, :] * np.sin(s[:, None] + phase[None, :]))
    return np.clip(out, 0.02, 0.98)


def make_scene(seed: int, config: dict | None = None) -> SceneDescription:
    """Deterministic scene from a seed. config: {n_layers, n, resolution,
    static, motion_scale}; static scenes have no in-plane motion or depth
    drift, motion_scale multiplies the in-plane motion amplitude."""
    config = dict(config or {})
    n_layers = int(config.get("n_layers", 3))
    n = int(config.get("n", 8))
    res = config.get("resolution", (16, 16))
    width, height = (res, res) if isinstance(res, int) else (int(res[0]), int(res[1]))
    static = bool(config.get("static", False))
    motion_scale = float(config.get("motion_scale", 1.0))
    if n_layers < 1:
        raise ValidationError(f"need n_layers >= 1, got {n_layers}")
    rng = np.random.default_rng(seed)
    k = CameraIntrinsics.default(width, height)
    scene_base = rng.uniform(0.4, 0.6, size=3)

    # Depth slots spaced so that |depth_rate| drift can never close the gap.
    gap = 0.6
    layers = []
    bg_depth = 1.2 + gap * n_layers + rng.uniform(0.0, 0.4)
    for i in range(n_layers - 1):
        depth0 = 1.0 + gap * i + rng.uniform(0.0, 0.2)
        rate = 0.0 if static else rng.uniform(-0.15, 0.15)
        span_x = depth0 * (width / 2) / k.fx       # half-width of the frustum at depth0
        span_y = depth0 * (height / 2) / k.fy
        layers.append(Layer(
            depth0=depth0, depth_rate=rate,
            half_x=rng.uniform(0.35, 0.8) * span_x,
            half_y=rng.uniform(0.35, 0.8) * span_y,
            motion_kind="none" if static else rng.choice(["linear", "sinusoid"]),
            motion_ax=0.0 if static else motion_scale * rng.uniform(-0.2, 0.2) * span_x,
            motion_ay=0.0 if static else motion_scale * rng.uniform(-0.2, 0.2) * span_y,
            motion_period=float(rng.uniform(0.8, 2.0)),
            texture=_random_texture(rng, scene_base)))
    layers.append(Layer(depth0=bg_depth, depth_rate=0.0,
                        half_x=np.inf, half_y=np.inf,
                        motion_kind="none", motion_ax=0.0, motion_ay=0.0,
                        motion_period=1.0, texture=_random_texture(rng, scene_base)))
    return SceneDescription(layers=layers, seed=seed, n=n,
                            width=width, height=height, intrinsics=k)


def render_scene(scene: SceneDescription, pose: PoseSE3, k: CameraIntrinsics | None,
                 t: int):
    """Analytic render from a camera at `pose` (canonical -> camera transform).
    Returns (color (h,w,3) in [0,1], depth (h,w)); depth is the exact
    camera-space intersection depth of the nearest layer."""
    if not (0 <= t < scene.n):
        raise ValidationError(f"frame index {t} outside [0, {scene.n})")
    k = k or scene.intrinsics
    tn = scene.tn(t)
    h, w = k.height, k.width
    vv, uu = np.mgrid[0:h, 0:w]
    # ray through each pixel in camera coords, z component 1 => ray param s == depth
    d_cam = np.stack([(uu - k.cx) / k.fx, (vv - k.cy) / k.fy, np.ones((h, w))], axis=-1)
    d_cam = d_cam.reshape(-1, 3)
    r, tr = pose.rotation, pose.translation
    o_scene = -r.T @ tr
    d_scene = d_cam @ r  # == R^T d per ray

    best_s = np.full(h * w, np.inf)
    color = np.zeros((h * w, 3))
    for layer in scene.layers:
        zl = layer.depth_at(tn)
        ox, oy = layer.offset_at(tn)
        dz = d_scene[:, 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            s = (zl - o_scene[2]) / dz
        hit = np.isfinite(s) & (s > Z_NEAR)
        x = o_scene[0] + s * d_scene[:, 0] - ox
        y = o_scene[1] + s * d_scene[:, 1] - oy
        if np.isfinite(layer.half_x):
            hit &= (np.abs(x) <= layer.half_x) & (np.abs(y) <= layer.half_y)
        hit &= s < best_s
        if hit.any():
            color[hit] = _texture_rgb(layer.texture, x[hit], y[hit])
            best_s[hit] = s[hit]
    depth = np.where(np.isfinite(best_s), best_s, 0.0)
    return color.reshape(h, w, 3), depth.reshape(h, w)


def render_clip(scene: SceneDescription, poses=None, k: CameraIntrinsics | None = None):
    """Render all frames; poses default to identity (the source capture)."""
    k = k or scene.intrinsics
    if poses is None:
        poses = [PoseSE3.identity()] * scene.n
    colors, depths = [], []
    for t, p in enumerate(poses):
        c, d = render_scene(scene, p, k, t)
        colors.append(c)
        depths.append(d)
    return colors, depths
