"""Per-frame relative camera trajectories: parametric generators, keyframe
interpolation, and random transform sampling for data curation.

All poses are relative to the source camera of the same frame index.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .geometry import PoseSE3

_AXES = {"x": np.array([1.0, 0.0, 0.0]),
         "y": np.array([0.0, 1.0, 0.0]),
         "z": np.array([0.0, 0.0, 1.0])}


@dataclass
class Trajectory:
    poses: list  # list[PoseSE3]

    def __len__(self):
        return len(self.poses)

    def __getitem__(self, i) -> PoseSE3:
        return self.poses[i]

    def to_dict(self) -> dict:
        return {"n": len(self.poses), "poses": [p.to_dict() for p in self.poses]}

    @classmethod
    def from_dict(cls, d: dict) -> "Trajectory":
        poses = [PoseSE3.from_dict(p) for p in d["poses"]]
        if len(poses) != int(d["n"]):
            raise ValidationError(f"trajectory n={d['n']} but {len(poses)} poses given")
        return cls(poses=poses)

    def save(self, path):
        with open(path, "w") as f:
            json.dump(self.to_dict(), f)

    @classmethod
    def load(cls, path) -> "Trajectory":
        with open(path) as f:
            return cls.from_dict(json.load(f))


def axis_angle_matrix(axis, degrees: float) -> np.ndarray:
    """Rodrigues rotation about a (not necessarily unit) axis or axis name."""
    if isinstance(axis, str):
        if axis not in _AXES:
            raise ValidationError(f"unknown axis name {axis!r}")
        axis = _AXES[axis]
    a = np.asarray(axis, dtype=np.float64)
    norm = np.linalg.norm(a)
    if norm == 0:
        raise ValidationError("rotation axis must be nonzero")
    a = a / norm
    th = np.radians(degrees)
    kx = np.array([[0, -a[2], a[1]], [a[2], 0, -a[0]], [-a[1], a[0], 0]])
    return np.eye(3) + np.sin(th) * kx + (1 - np.cos(th)) * (kx @ kx)


def quat_from_matrix(r: np.ndarray) -> np.ndarray:
    """Unit quaternion (w, x, y, z) with w >= 0."""
    m = np.asarray(r, dtype=np.float64)
    tr = np.trace(m)
    if tr > 0:
        s = np.sqrt(tr + 1.0) * 2
        q = np.array([0.25 * s, (m[2, 1] - m[1, 2]) / s,
                      (m[0, 2] - m[2, 0]) / s, (m[1, 0] - m[0, 1]) / s])
    else:
        i = int(np.argmax(np.diag(m)))
        j, l = (i + 1) % 3, (i + 2) % 3
        s = np.sqrt(max(1.0 + m[i, i] - m[j, j] - m[l, l], 0.0)) * 2
        q = np.empty(4)
        q[0] = (m[l, j] - m[j, l]) / s
        q[1 + i] = 0.25 * s
        q[1 + j] = (m[j, i] + m[i, j]) / s
        q[1 + l] = (m[l, i] + m[i, l]) / s
    if q[0] < 0:
        q = -q
    return q / np.linalg.norm(q)


def matrix_from_quat(q: np.ndarray) -> np.ndarray:
    w, x, y, z = np.asarray(q, dtype=np.float64) / np.linalg.norm(q)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def slerp(q0: np.ndarray, q1: np.ndarray, t: float) -> np.ndarray:
    """Shortest-arc spherical interpolation between unit quaternions."""
    q0 = np.asarray(q0, dtype=np.float64)
    q1 = np.asarray(q1, dtype=np.float64)
    dot = float(np.dot(q0, q1))
    if dot < 0:
        q1 = -q1
        dot = -dot
    if dot > 0.9995:
        out = q0 + t * (q1 - q0)
        return out / np.linalg.norm(out)
    th0 = np.arccos(np.clip(dot, -1.0, 1.0))
    s0 = np.sin((1 - t) * th0) / np.sin(th0)
    s1 = np.sin(t * th0) / np.sin(th0)
    return s0 * q0 + s1 * q1


@dataclass
class TrajectorySpec:
    kind: str  # orbit | dolly | pan | keyframes
    params: dict

    def to_dict(self) -> dict:
        params = dict(self.params)
        if self.kind == "keyframes":
            params["keys"] = [[int(i), p.to_dict()] for i, p in params["keys"]]
        return {"kind": self.kind, "params": params}

    @classmethod
    def from_dict(cls, d: dict) -> "TrajectorySpec":
        kind = d.get("kind")
        params = dict(d.get("params", {}))
        if kind == "keyframes":
            params["keys"] = [(int(i), PoseSE3.from_dict(p)) for i, p in params["keys"]]
        return cls(kind=kind, params=params)


def _orbit_pose(axis, degrees: float, pivot_depth: float) -> PoseSE3:
    r = axis_angle_matrix(axis, degrees)
    c = np.array([0.0, 0.0, pivot_depth])
    return PoseSE3(r, (np.eye(3) - r) @ c)


def generate(spec: TrajectorySpec, n: int) -> Trajectory:
    """Realize a parametric trajectory; pose 0 is identity (departs from the
    source view), parameters interpolated linearly in frame index."""
    if n < 1:
        raise ValidationError(f"frame count must be >= 1, got {n}")
    fracs = np.zeros(1) if n == 1 else np.arange(n) / (n - 1)
    if spec.kind == "orbit":
        axis = spec.params.get("axis", "y")
        axis = _AXES[axis] if isinstance(axis, str) else np.asarray(axis, dtype=np.float64)
        total = float(spec.params.get("total_degrees", 0.0))
        pivot = float(spec.params.get("pivot_depth", 1.0))
        if pivot <= 0:
            raise ValidationError(f"pivot_depth must be positive, got {pivot}")
        poses = [_orbit_pose(axis, total * f, pivot) for f in fracs]
    elif spec.kind == "dolly":
        disp = np.asarray(spec.params.get("displacement", [0, 0, 0]), dtype=np.float64)
        if disp.shape != (3,):
            raise ValidationError("dolly displacement must be a 3-vector")
        poses = [PoseSE3(np.eye(3), disp * f) for f in fracs]
    elif spec.kind == "pan":
        total = float(spec.params.get("total_degrees", spec.params.get("sweep", 0.0)))
        axis = spec.params.get("axis", "y")
        axis = _AXES[axis] if isinstance(axis, str) else np.asarray(axis, dtype=np.float64)
        poses = [PoseSE3(axis_angle_matrix(axis, total * f), np.zeros(3)) for f in fracs]
    elif spec.kind == "keyframes":
        return interpolate_keyframes(spec.params["keys"], n)
    else:
        raise ValidationError(f"unknown trajectory kind {spec.kind!r}")
    return Trajectory(poses=poses)


def interpolate_keyframes(keys, n: int) -> Trajectory:
    """Slerp rotations / lerp translations between keyframes. Keys must cover
    frame 0 and frame n-1 with strictly increasing indices."""
    if n < 1:
        raise ValidationError(f"frame count must be >= 1, got {n}")
    if not keys:
        raise ValidationError("at least one keyframe required")
    keys = sorted(keys, key=lambda kp: kp[0])
    idxs = [int(i) for i, _ in keys]
    if len(set(idxs)) != len(idxs):
        raise ValidationError(f"duplicate keyframe indices: {idxs}")
    if idxs[0] != 0 or idxs[-1] != n - 1:
        raise ValidationError(f"keyframes must span frames 0..{n - 1}, got {idxs}")
    quats = [quat_from_matrix(p.rotation) for _, p in keys]
    poses = []
    seg = 0
    for i in range(n):
        while seg < len(keys) - 1 and i > idxs[seg + 1]:
            seg += 1
        if i == idxs[seg]:
            poses.append(keys[seg][1])
            continue
        if i == idxs[seg + 1]:
            poses.append(keys[seg + 1][1])
            continue
        f = (i - idxs[seg]) / (idxs[seg + 1] - idxs[seg])
        r = matrix_from_quat(slerp(quats[seg], quats[seg + 1], f))
        t = (1 - f) * keys[seg][1].translation + f * keys[seg + 1][1].translation
        poses.append(PoseSE3(r, t))
    return Trajectory(poses=poses)


def sample_transform(rng_seed: int, ranges: dict) -> PoseSE3:
    """Random relative transform for curation: rotation angle uniform in
    [-max, max] degrees about a uniform random axis, translation uniform
    per axis. Deterministic per seed."""
    max_rot = float(ranges.get("max_rotation_degrees", 0.0))
    max_t = ranges.get("max_translation", 0.0)
    max_t = np.broadcast_to(np.asarray(max_t, dtype=np.float64), (3,))
    if max_rot < 0 or (max_t < 0).any():
        raise ValidationError("sampling ranges must be non-negative")
    rng = np.random.default_rng(rng_seed)
    vec = rng.normal(size=3)
    while np.linalg.norm(vec) < 1e-12:
        vec = rng.normal(size=3)
    angle = rng.uniform(-max_rot, max_rot) if max_rot > 0 else 0.0
    r = axis_angle_matrix(vec, angle)
    t = rng.uniform(-max_t, max_t)
    return PoseSE3(r, t)
