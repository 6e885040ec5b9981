"""Mask machinery for layered motion control.

The object's poses should govern every pixel the object ever covers, so the
per-frame warped masks are OR-ed into a union mask, which is then dilated and
downsampled into a scale pyramid (one level per feature scale).  Dilation
before each scale keeps small objects from vanishing when the mask is
shrunk; downsampling is 2x max-pooling so any covered pixel stays covered.

Fusion composes an object-driven volume and a background-driven volume
pixelwise:  f = f_obj * m + f_bg * (1 - m).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from ._parallel import parallel_map
from .camera import CameraPose, PoseSequence, identity_pose, plucker_volume
from .errors import ValidationError
from .tensor_io import load_mask, read_json, save_mask, write_json

BACKGROUND_MODES = ("static", "reversed", "none")


@dataclass(frozen=True)
class MaskPyramid:
    """Dilated masks, one per scale; level s has ceil-halved resolution of s-1."""

    levels: tuple
    kernel_size: int

    def __post_init__(self):
        if len(self.levels) < 1:
            raise ValidationError("pyramid needs at least one level")
        object.__setattr__(self, "levels", tuple(self.levels))

    def __len__(self) -> int:
        return len(self.levels)


def union_mask(masks) -> np.ndarray:
    """OR of all masks; pixel is 1 iff it is 1 in any input."""
    masks = list(masks)
    if not masks:
        raise ValidationError("union needs at least one mask")
    out = np.asarray(masks[0]).astype(np.uint8)
    for m in masks[1:]:
        m = np.asarray(m)
        if m.shape != out.shape:
            raise ValidationError(f"mask shape {m.shape} != {out.shape}")
        out = np.maximum(out, m.astype(np.uint8))
    return out


def dilate(mask: np.ndarray, kernel: int) -> np.ndarray:
    """Binary dilation with a kernel x kernel square structuring element."""
    if kernel < 1 or kernel % 2 == 0:
        raise ValidationError("dilation kernel must be odd and >= 1")
    mask = np.asarray(mask).astype(bool)
    if kernel == 1:
        return mask.astype(np.uint8)
    out = ndimage.binary_dilation(mask, structure=np.ones((kernel, kernel), dtype=bool))
    return out.astype(np.uint8)


def maxpool(mask: np.ndarray, factor: int) -> np.ndarray:
    """Max-pooling by an integer factor with ceil division: any covered pixel
    keeps its block on."""
    if factor < 1:
        raise ValidationError("pool factor must be >= 1")
    m = np.asarray(mask)
    h, w = m.shape
    rows = np.arange(0, h, factor)
    cols = np.arange(0, w, factor)
    return np.maximum.reduceat(np.maximum.reduceat(m, rows, axis=0), cols, axis=1).astype(
        np.uint8
    )


def maxpool2(mask: np.ndarray) -> np.ndarray:
    return maxpool(mask, 2)


def mask_pyramid(mu: np.ndarray, s_levels: int, kernel: int = 3) -> MaskPyramid:
    """Dilate the union mask progressively across scales.

    Level 0 dilates mu at full resolution; level s dilates the 2x max-pooled
    previous level, so every level covers the pooled union mask.
    """
    if s_levels < 1:
        raise ValidationError("pyramid needs s_levels >= 1")
    mu = np.asarray(mu)
    if mu.ndim != 2 or not np.isin(mu, (0, 1)).all():
        raise ValidationError("union mask must be a 2D array of {0,1}")
    levels = [dilate(mu, kernel)]
    for _ in range(1, s_levels):
        levels.append(dilate(maxpool2(levels[-1]), kernel))
    return MaskPyramid(levels=tuple(levels), kernel_size=kernel)


def fuse_volumes(f_obj: np.ndarray, f_bg: np.ndarray, level_mask: np.ndarray) -> np.ndarray:
    """Pixelwise selection: object volume where the mask is 1, background where 0."""
    f_obj = np.asarray(f_obj)
    f_bg = np.asarray(f_bg)
    mask = np.asarray(level_mask)
    if f_obj.shape != f_bg.shape:
        raise ValidationError(f"volume shapes differ: {f_obj.shape} vs {f_bg.shape}")
    if f_obj.ndim != 4 or mask.shape != f_obj.shape[2:]:
        raise ValidationError(
            f"mask shape {mask.shape} does not match volume spatial dims {f_obj.shape[2:]}"
        )
    m = mask.astype(f_obj.dtype)
    return f_obj * m + f_bg * (1 - m)


def background_poses(mode: str, obj: PoseSequence):
    """Pose sequence driving the background region, or None for mode "none".

    static   -> [I|0] every frame
    reversed -> R = I, t = -t_obj (object poses must be translation-only)
    none     -> background contributes a zero volume
    """
    if mode not in BACKGROUND_MODES:
        raise ValidationError(f"unknown background mode {mode!r}, pick one of {BACKGROUND_MODES}")
    if mode == "none":
        return None
    n = len(obj)
    if mode == "static":
        return PoseSequence(obj.intrinsics, [identity_pose() for _ in range(n)])
    if not obj.all_identity_rotation():
        raise ValidationError("reversed background requires translation-only object poses")
    eye = np.eye(3)
    return PoseSequence(obj.intrinsics, [CameraPose(eye, -pose.t) for pose in obj.frames])


def build_control_volume(
    obj: PoseSequence,
    bg_mode: str,
    pyramid: MaskPyramid,
    width: int,
    height: int,
) -> list:
    """Fused per-pixel ray volumes, one [N, 6, h_s, w_s] tensor per scale.

    Scale s uses intrinsics divided by 2^s and the pyramid's level-s mask;
    object rays fill the mask, background rays (or zeros for mode "none")
    fill the complement.
    """
    if pyramid.levels[0].shape != (height, width):
        raise ValidationError(
            f"pyramid level 0 shape {pyramid.levels[0].shape} != ({height}, {width})"
        )
    bg = background_poses(bg_mode, obj)

    def one_scale(s: int) -> np.ndarray:
        level = pyramid.levels[s]
        h_s, w_s = level.shape
        k_s = obj.intrinsics.scaled(2.0**s)
        vol_obj = plucker_volume(PoseSequence(k_s, obj.frames), w_s, h_s)
        if bg is None:
            vol_bg = np.zeros_like(vol_obj)
        else:
            vol_bg = plucker_volume(PoseSequence(k_s, bg.frames), w_s, h_s)
        return fuse_volumes(vol_obj, vol_bg, level)

    return parallel_map(one_scale, range(len(pyramid)))


def save_mask_pyramid(pyramid: MaskPyramid, directory, stem: str = "mask_pyramid") -> Path:
    """Write one PNG per level plus a JSON manifest; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    files = []
    for s, level in enumerate(pyramid.levels):
        name = f"{stem}_level{s}.png"
        save_mask(level, directory / name)
        files.append(name)
    manifest = directory / f"{stem}.json"
    write_json(manifest, {"levels": len(pyramid), "kernel": pyramid.kernel_size, "files": files})
    return manifest


def load_mask_pyramid(manifest_path) -> MaskPyramid:
    manifest_path = Path(manifest_path)
    doc = read_json(manifest_path)
    try:
        files = doc["files"]
        kernel = int(doc["kernel"])
        if len(files) != int(doc["levels"]):
            raise ValidationError(f"{manifest_path}: level count does not match file list")
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"{manifest_path}: malformed pyramid manifest") from exc
    levels = [load_mask(manifest_path.parent / name) for name in files]
    return MaskPyramid(levels=tuple(levels), kernel_size=kernel)
