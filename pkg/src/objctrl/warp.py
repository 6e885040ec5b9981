"""Depth-based forward warping between camera poses.

Every source pixel is lifted into the source camera's frame with its depth,
expressed in world coordinates, re-expressed in the destination camera's
frame, projected, and splatted onto the nearest destination pixel.  When two
source pixels land on the same destination, the one with the smaller
destination z wins (front-most); exact z ties go to the smaller source
row-major index, so the result is bitwise independent of processing order.

Holes (destination pixels no source pixel reached) are reported through the
validity mask and left zero in the warped grid; downstream blending treats
them as "keep the original value" rather than inpainting.

Warping a whole pose sequence shares the source unprojection across frames;
collision resolution is two scatter-min passes (z, then source index among
exact z ties) rather than a sort, which keeps 320x576 sequences interactive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._parallel import parallel_map
from .camera import CameraPose, Intrinsics, PoseSequence
from .errors import ValidationError

FRAME0_TOL = 1e-9


@dataclass(frozen=True)
class WarpResult:
    """Warped grid plus the mask of destination pixels that received a splat."""

    warped: np.ndarray  # float32 [C, H, W], zero where validity == 0
    validity: np.ndarray  # uint8 [H, W]


def forward_warp(
    grid: np.ndarray,
    depth: np.ndarray,
    src: CameraPose,
    dst: CameraPose,
    K: Intrinsics,
) -> WarpResult:
    """Splat a [C, H, W] grid from the src camera to the dst camera.

    Source pixels with depth <= 0 cannot be unprojected and are skipped.
    Splats that land outside the frame or behind the destination camera are
    dropped.
    """
    values, world, src_idx, shape = _prepare_sources(grid, depth, src, K)
    return _splat_frame(values, world, src_idx, dst, K, shape)


def warp_sequence(grid: np.ndarray, depth: np.ndarray, poses: PoseSequence) -> list:
    """Forward-warp a grid from the canonical first pose to every pose.

    poses.frames[0] must be [I|0]; the source unprojection is computed once
    and shared by all frames.
    """
    require_canonical_start(poses)
    values, world, src_idx, shape = _prepare_sources(
        grid, depth, poses.frames[0], poses.intrinsics
    )
    return parallel_map(
        lambda pose: _splat_frame(values, world, src_idx, pose, poses.intrinsics, shape),
        poses.frames,
    )


def warp_mask_sequence(m0: np.ndarray, depth: np.ndarray, poses: PoseSequence) -> list:
    """Warp a binary mask from the canonical frame to every pose in sequence.

    Frame i is the forward warp of m0 from poses.frames[0] (which must be
    [I|0]) to poses.frames[i], re-binarized at 0.5.
    """
    m0 = np.asarray(m0)
    if m0.ndim != 2 or not np.isin(m0, (0, 1)).all():
        raise ValidationError("mask must be a 2D array of {0,1}")
    results = warp_sequence(m0[None].astype(np.float32), depth, poses)
    return [(r.warped[0] >= 0.5).astype(np.uint8) for r in results]


def require_canonical_start(poses: PoseSequence, tol: float = FRAME0_TOL) -> None:
    if not poses.frames[0].is_identity(tol):
        raise ValidationError("pose sequence must start at the canonical frame [I|0]")


def _prepare_sources(grid, depth, src: CameraPose, K: Intrinsics):
    grid = np.asarray(grid)
    depth = np.asarray(depth, dtype=np.float64)
    if grid.ndim != 3:
        raise ValidationError(f"grid must be [C, H, W], got shape {grid.shape}")
    if depth.shape != grid.shape[1:]:
        raise ValidationError(
            f"depth shape {depth.shape} does not match grid spatial shape {grid.shape[1:]}"
        )
    c, h, w = grid.shape

    if h * w >= np.iinfo(np.int32).max:
        raise ValidationError("grid too large to index")
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    xs, ys, d = xs.ravel(), ys.ravel(), depth.ravel()
    src_idx = np.arange(xs.size, dtype=np.int32)

    usable = d > 0
    if not usable.all():
        xs, ys, d, src_idx = xs[usable], ys[usable], d[usable], src_idx[usable]

    # unproject into the source camera frame, then into world coordinates
    pc = np.stack([(xs - K.cx) * d / K.fx, (ys - K.cy) * d / K.fy, d])
    if src.is_identity():
        world = pc
    else:
        world = src.R.T @ (pc - src.t[:, None])
    values = grid.reshape(c, -1).astype(np.float32, copy=False)
    return values, world, src_idx, (c, h, w)


def _splat_frame(values, world, src_idx, dst: CameraPose, K: Intrinsics, shape) -> WarpResult:
    c, h, w = shape
    if np.array_equal(dst.R, np.eye(3)):
        pd = world + dst.t[:, None]
    else:
        pd = dst.R @ world + dst.t[:, None]

    # pd is a fresh buffer: project in place, rows 0/1 become pixel indices
    z = pd[2]
    px, py = pd[0], pd[1]
    with np.errstate(divide="ignore", invalid="ignore"):
        np.multiply(px, K.fx, out=px)
        np.divide(px, z, out=px)
        px += K.cx + 0.5
        np.floor(px, out=px)
        np.multiply(py, K.fy, out=py)
        np.divide(py, z, out=py)
        py += K.cy + 0.5
        np.floor(py, out=py)
    keep = z > 0
    keep &= px >= 0
    keep &= px < w
    keep &= py >= 0
    keep &= py < h

    warped = np.zeros((c, h, w), dtype=np.float32)
    validity = np.zeros((h, w), dtype=np.uint8)
    if keep.all():
        dest = py.astype(np.int32)
        dest *= w
        dest += px.astype(np.int32)
        z_k, idx_k = z, src_idx
        keep_any = True
    else:
        keep_any = bool(keep.any())
        if keep_any:
            dest = py[keep].astype(np.int32)
            dest *= w
            dest += px[keep].astype(np.int32)
            z_k = z[keep]
            idx_k = src_idx[keep]
    if keep_any:
        # pass 1: min destination z per target pixel
        zbuf = np.full(h * w, np.inf)
        np.minimum.at(zbuf, dest, z_k)
        front = z_k == zbuf[dest]
        # pass 2: min source index among exact z ties
        ibuf = np.full(h * w, np.iinfo(np.int32).max, dtype=np.int32)
        np.minimum.at(ibuf, dest[front], idx_k[front])
        win = front.copy()
        win[front] = idx_k[front] == ibuf[dest[front]]

        dest_w = dest[win]
        warped.reshape(c, -1)[:, dest_w] = values[:, idx_k[win]]
        validity.reshape(-1)[dest_w] = 1
    return WarpResult(warped=warped, validity=validity)


def pool_depth(depth: np.ndarray, factor: int) -> np.ndarray:
    """Average-pool a depth map by an integer factor (ceil division at edges).

    Used to carry the conditioning depth down to latent resolution while
    preserving mean scene scale.
    """
    if factor < 1:
        raise ValidationError("pool factor must be >= 1")
    d = np.asarray(depth, dtype=np.float64)
    if d.ndim != 2:
        raise ValidationError("depth map must be 2D")
    h, w = d.shape
    rows = np.arange(0, h, factor)
    cols = np.arange(0, w, factor)
    sums = np.add.reduceat(np.add.reduceat(d, rows, axis=0), cols, axis=1)
    counts = np.minimum(factor, h - rows)[:, None] * np.minimum(factor, w - cols)[None, :]
    return (sums / counts).astype(np.float32)
