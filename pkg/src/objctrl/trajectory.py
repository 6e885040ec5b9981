"""2D stroke to N-frame 3D trajectory: resampling, depth pickup, depth smoothing.

Trajectories are plain float arrays: (M, 2) columns (x, y) for 2D strokes and
(N, 3) columns (x, y, depth) once lifted.  Points live in the image rectangle
[0, W) x [0, H); depth is read from the conditioning image's depth map at the
nearest pixel.  A stroke that crosses a depth discontinuity (object edge)
would make the object lurch in z, so when the per-step depth gradient is too
spread out the whole depth channel falls back to the starting depth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .tensor_io import read_json, write_json


@dataclass(frozen=True)
class SmoothingConfig:
    """Depth smoothing rule: reset all depths to depth[0] when the population
    std of consecutive depth gradients exceeds `theta`.  With `normalize` the
    gradients are measured on depths divided by the depth map's max, keeping
    `theta` dimensionless."""

    theta: float = 0.2
    normalize: bool = True

    def __post_init__(self):
        if not (self.theta > 0):
            raise ValidationError("smoothing: theta must be > 0")


def resample(traj, n: int) -> np.ndarray:
    """Resample a stroke to exactly n points, uniform in cumulative arc length.

    Endpoints are preserved exactly.  A degenerate stroke of identical points
    yields n copies of that point.
    """
    pts = np.asarray(traj, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise ValidationError("stroke must be an (M, 2) array with M >= 2")
    if n < 2:
        raise ValidationError("frame count must be >= 2")
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    if total == 0:
        return np.repeat(pts[:1], n, axis=0)
    targets = np.linspace(0.0, total, n)
    out = np.column_stack(
        [np.interp(targets, cum, pts[:, 0]), np.interp(targets, cum, pts[:, 1])]
    )
    out[0] = pts[0]
    out[-1] = pts[-1]
    return out


def sample_depth(traj, depth: np.ndarray) -> np.ndarray:
    """Depth at the nearest integer pixel to each (x, y) point.

    Ties round half up; indices are clamped to the raster so an in-bounds
    continuous point never falls off the edge pixel.
    """
    pts = np.asarray(traj, dtype=np.float64)
    depth = np.asarray(depth)
    if depth.ndim != 2:
        raise ValidationError("depth map must be 2D")
    h, w = depth.shape
    xs, ys = pts[:, 0], pts[:, 1]
    if np.any((xs < 0) | (xs >= w) | (ys < 0) | (ys >= h)):
        raise ValidationError(f"trajectory point outside image rectangle [0,{w})x[0,{h})")
    ix = np.clip(np.floor(xs + 0.5).astype(np.int64), 0, w - 1)
    iy = np.clip(np.floor(ys + 0.5).astype(np.int64), 0, h - 1)
    return depth[iy, ix].astype(np.float64)


def smooth_depths(ds, cfg: SmoothingConfig, max_depth: float | None = None) -> np.ndarray:
    """Apply the gradient-spread reset rule to a depth series.

    grad_i = d_i - d_{i-1}, computed on depths divided by `max_depth` (the
    depth map's max; defaults to max(ds)) when cfg.normalize.  If the
    population std of the gradients exceeds cfg.theta every entry is reset to
    ds[0]; otherwise the series is returned unchanged.
    """
    ds = np.asarray(ds, dtype=np.float64)
    if ds.ndim != 1 or ds.shape[0] < 2:
        raise ValidationError("depth series must be 1D with length >= 2")
    if np.any(ds <= 0):
        raise ValidationError("depth series must be strictly positive")
    if cfg.normalize:
        denom = float(max_depth) if max_depth is not None else float(ds.max())
        if denom <= 0:
            raise ValidationError("normalization depth must be > 0")
        grads = np.diff(ds / denom)
    else:
        grads = np.diff(ds)
    if grads.std() > cfg.theta:
        return np.full_like(ds, ds[0])
    return ds.copy()


def lift(traj, depth: np.ndarray, n: int, cfg: SmoothingConfig = SmoothingConfig()) -> np.ndarray:
    """2D stroke + depth map -> (n, 3) trajectory of (x, y, depth).

    Composition: resample to n points, read depth at each, smooth the depth
    channel.  The (x, y) columns are exactly the resampled stroke.
    """
    pts = resample(traj, n)
    ds = sample_depth(pts, depth)
    if np.any(ds <= 0):
        raise ValidationError("sampled depth must be > 0 along the whole stroke")
    ds = smooth_depths(ds, cfg, max_depth=float(np.asarray(depth).max()))
    return np.column_stack([pts, ds])


def save_trajectory(points, path) -> None:
    """Write trajectory JSON: {"points": [[x, y], ...]} or [[x, y, d], ...]."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] not in (2, 3):
        raise ValidationError("trajectory must be (M, 2) or (N, 3)")
    write_json(path, {"points": [[float(v) for v in row] for row in pts]})


def load_trajectory(path, dims: int | None = None) -> np.ndarray:
    doc = read_json(path)
    try:
        pts = np.asarray(doc["points"], dtype=np.float64)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"{path}: malformed trajectory file") from exc
    if pts.ndim != 2 or pts.shape[1] not in (2, 3):
        raise ValidationError(f"{path}: points must be (M, 2) or (N, 3)")
    if dims is not None and pts.shape[1] != dims:
        raise ValidationError(f"{path}: expected {dims}-column points, got {pts.shape[1]}")
    return pts
