"""Z-buffered point-splat rendering of point-cloud frames into novel views.

Each point is rigidly transformed, culled against the near plane, projected,
rounded to the nearest pixel, and splatted over a (2r+1)^2 square clipped to
the frame. Per pixel the smallest-depth splat wins; depths within 1e-9 of the
per-pixel minimum tie, broken by lower point index. The tie-break makes the
output independent of any parallel schedule.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .geometry import Z_NEAR, CameraIntrinsics, DynamicPointCloud, PointCloudFrame, PoseSE3

DEPTH_TIE = 1e-9


@dataclass
class RenderOutput:
    color: np.ndarray  # (h, w, 3), black where mask == 0
    mask: np.ndarray   # (h, w) bool, True where >= 1 splat landed
    depth: np.ndarray  # (h, w), winning splat depth where mask, else 0


def render_frame(frame: PointCloudFrame, pose: PoseSE3, k: CameraIntrinsics,
                 splat_radius: int = 0, z_near: float = Z_NEAR) -> RenderOutput:
    if splat_radius < 0:
        raise ShapeError(f"splat_radius must be >= 0, got {splat_radius}")
    h, w = k.height, k.width
    color = np.zeros((h, w, 3))
    depth = np.zeros((h, w))
    mask = np.zeros((h, w), dtype=bool)
    if len(frame) == 0:
        return RenderOutput(color=color, mask=mask, depth=depth)

    pts = frame.positions @ pose.rotation.T + pose.translation
    keep = pts[:, 2] > z_near
    orig_idx = np.nonzero(keep)[0]
    if orig_idx.size == 0:
        return RenderOutput(color=color, mask=mask, depth=depth)
    pts = pts[keep]
    z = pts[:, 2]
    ui = np.rint(k.fx * pts[:, 0] / z + k.cx).astype(np.int64)
    vi = np.rint(k.fy * pts[:, 1] / z + k.cy).astype(np.int64)

    r = int(splat_radius)
    offs = np.arange(-r, r + 1)
    drc = np.stack(np.meshgrid(offs, offs, indexing="ij"), axis=-1).reshape(-1, 2)
    rows = (vi[None, :] + drc[:, 0:1]).ravel()
    cols = (ui[None, :] + drc[:, 1:2]).ravel()
    m = (rows >= 0) & (rows < h) & (cols >= 0) & (cols < w)
    if not m.any():
        return RenderOutput(color=color, mask=mask, depth=depth)
    n_splat = drc.shape[0]
    ids = np.tile(orig_idx, n_splat)[m]
    ds = np.tile(z, n_splat)[m]
    pid = rows[m] * w + cols[m]

    dmin = np.full(h * w, np.inf)
    np.minimum.at(dmin, pid, ds)
    elig = ds - dmin[pid] < DEPTH_TIE
    winner = np.full(h * w, np.iinfo(np.int64).max, dtype=np.int64)
    np.minimum.at(winner, pid[elig], ids[elig])

    covered = np.isfinite(dmin)
    win = winner[covered]
    flat_color = color.reshape(-1, 3)
    flat_color[covered] = frame.colors[win]
    zfull = np.zeros(len(frame))
    zfull[orig_idx] = z
    depth.reshape(-1)[covered] = zfull[win]
    mask.reshape(-1)[covered] = True
    return RenderOutput(color=color, mask=mask, depth=depth)


def render_trajectory(cloud: DynamicPointCloud, traj, k: CameraIntrinsics,
                      splat_radius: int = 0) -> list:
    poses = traj.poses if hasattr(traj, "poses") else traj
    if len(poses) != len(cloud.frames):
        raise ShapeError(f"trajectory length {len(poses)} != clip length {len(cloud.frames)}")
    return [render_frame(f, p, k, splat_radius=splat_radius)
            for f, p in zip(cloud.frames, poses)]
