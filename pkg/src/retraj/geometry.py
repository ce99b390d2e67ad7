"""Pinhole camera model, SE(3) poses, and RGB-D -> point cloud lifting.

Conventions: right-handed camera frame with +z forward into the scene,
+x right, +y down (matching pixel row/col growth). Poses map source-camera
coordinates to target-camera coordinates. Invalid depth is encoded as 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BehindCameraError, InvalidDepthError, ShapeError, ValidationError

Z_NEAR = 1e-4


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValidationError(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")
        if self.width <= 0 or self.height <= 0:
            raise ValidationError(f"image size must be positive, got {self.width}x{self.height}")
        if not (0 <= self.cx <= self.width) or not (0 <= self.cy <= self.height):
            raise ValidationError(f"principal point ({self.cx}, {self.cy}) outside image")

    def to_dict(self) -> dict:
        return {"fx": self.fx, "fy": self.fy, "cx": self.cx, "cy": self.cy,
                "width": self.width, "height": self.height}

    @classmethod
    def from_dict(cls, d: dict) -> "CameraIntrinsics":
        return cls(fx=float(d["fx"]), fy=float(d["fy"]), cx=float(d["cx"]),
                   cy=float(d["cy"]), width=int(d["width"]), height=int(d["height"]))

    @classmethod
    def default(cls, width: int, height: int, hfov_degrees: float = 60.0) -> "CameraIntrinsics":
        f = width / (2.0 * math.tan(math.radians(hfov_degrees) / 2.0))
        return cls(fx=f, fy=f, cx=width / 2.0, cy=height / 2.0, width=width, height=height)


def _check_rotation(r: np.ndarray):
    if r.shape != (3, 3):
        raise ValidationError(f"rotation must be 3x3, got {r.shape}")
    err = np.abs(r.T @ r - np.eye(3)).max()
    if err >= 1e-6:
        raise ValidationError(f"rotation not orthonormal (|R^T R - I|_inf = {err:.2e})")
    if np.linalg.det(r) < 0:
        raise ValidationError("rotation has negative determinant (reflection)")


@dataclass(frozen=True)
class PoseSE3:
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=np.float64)
        t = np.asarray(self.translation, dtype=np.float64).reshape(3)
        _check_rotation(r)
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "PoseSE3":
        return cls(np.eye(3), np.zeros(3))

    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def to_dict(self) -> dict:
        return {"r": [float(x) for x in self.rotation.reshape(-1)],
                "t": [float(x) for x in self.translation]}

    @classmethod
    def from_dict(cls, d: dict) -> "PoseSE3":
        r = np.asarray(d["r"], dtype=np.float64)
        if r.size != 9:
            raise ValidationError(f"pose 'r' must have 9 entries, got {r.size}")
        t = np.asarray(d["t"], dtype=np.float64)
        if t.size != 3:
            raise ValidationError(f"pose 't' must have 3 entries, got {t.size}")
        return cls(r.reshape(3, 3), t)


def compose(a: PoseSE3, b: PoseSE3) -> PoseSE3:
    """Pose applying b first, then a: (a*b)(p) = a(b(p))."""
    return PoseSE3(a.rotation @ b.rotation, a.rotation @ b.translation + a.translation)


def invert(a: PoseSE3) -> PoseSE3:
    rt = a.rotation.T
    return PoseSE3(rt, -rt @ a.translation)


@dataclass
class PointCloudFrame:
    """Colored camera-space points lifted from one RGB-D frame."""
    positions: np.ndarray  # (N, 3) float64, z > 0
    colors: np.ndarray     # (N, 3) float in [0, 1]
    src_pixels: np.ndarray  # (N, 2) int, (row, col)

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64).reshape(-1, 3)
        self.colors = np.asarray(self.colors, dtype=np.float64).reshape(-1, 3)
        self.src_pixels = np.asarray(self.src_pixels, dtype=np.int64).reshape(-1, 2)
        n = len(self.positions)
        if len(self.colors) != n or len(self.src_pixels) != n:
            raise ShapeError("positions/colors/src_pixels length mismatch")

    def __len__(self) -> int:
        return len(self.positions)


@dataclass
class DynamicPointCloud:
    frames: list  # list[PointCloudFrame]
    intrinsics: CameraIntrinsics = field(default=None)

    def __post_init__(self):
        if len(self.frames) < 1:
            raise ValidationError("dynamic point cloud needs at least one frame")

    def __len__(self) -> int:
        return len(self.frames)


def _check_frame(color: np.ndarray, depth: np.ndarray, k: CameraIntrinsics):
    if color.shape != (k.height, k.width, 3):
        raise ShapeError(f"color frame shape {color.shape} != ({k.height}, {k.width}, 3)")
    if depth.shape != (k.height, k.width):
        raise ShapeError(f"depth frame shape {depth.shape} != ({k.height}, {k.width})")


def unproject_pixel(u: float, v: float, d: float, k: CameraIntrinsics) -> np.ndarray:
    """Pixel (col=u, row=v) at depth d -> camera-space point."""
    if not np.isfinite(d) or d <= 0:
        raise InvalidDepthError(f"depth must be positive and finite, got {d}")
    return np.array([(u - k.cx) * d / k.fx, (v - k.cy) * d / k.fy, d])


def project_point(p, k: CameraIntrinsics, z_near: float = Z_NEAR):
    """Camera-space point -> (u, v, depth). u/v may fall outside the frame."""
    x, y, z = np.asarray(p, dtype=np.float64)
    if z <= z_near:
        raise BehindCameraError(f"point z={z} is at or behind the near plane {z_near}")
    return (k.fx * x / z + k.cx, k.fy * y / z + k.cy, z)


def lift_frame(color: np.ndarray, depth: np.ndarray, k: CameraIntrinsics) -> PointCloudFrame:
    """One point per valid-depth pixel (depth > 0 and finite); row-major order."""
    color = np.asarray(color, dtype=np.float64)
    depth = np.asarray(depth, dtype=np.float64)
    _check_frame(color, depth, k)
    valid = (depth > 0) & np.isfinite(depth)
    vv, uu = np.nonzero(valid)
    d = depth[vv, uu]
    positions = np.stack([(uu - k.cx) * d / k.fx, (vv - k.cy) * d / k.fy, d], axis=1)
    return PointCloudFrame(positions=positions, colors=color[vv, uu],
                           src_pixels=np.stack([vv, uu], axis=1))


def lift_video(colors, depths, k: CameraIntrinsics) -> DynamicPointCloud:
    if len(colors) != len(depths):
        raise ShapeError(f"{len(colors)} color frames vs {len(depths)} depth frames")
    frames = [lift_frame(c, d, k) for c, d in zip(colors, depths)]
    return DynamicPointCloud(frames=frames, intrinsics=k)


def transform_points(pose: PoseSE3, frame: PointCloudFrame) -> PointCloudFrame:
    """Rigidly move points into the pose's target frame; culling is the renderer's job."""
    positions = frame.positions @ pose.rotation.T + pose.translation
    return PointCloudFrame(positions=positions, colors=frame.colors.copy(),
                           src_pixels=frame.src_pixels.copy())
