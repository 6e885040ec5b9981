"""Shared warping latent: correlated initial noise inside the object region.

Frame 0's noise slice is geometrically warped to every frame, blended back
into the full noise volume inside the warped object masks, and finally mixed
with the original noise in the frequency domain so that only low-frequency
content of the blended volume survives.  The result seeds the downstream
sampler with a consistent object appearance while keeping background noise
i.i.d. and high frequencies untouched.

All randomness comes from numpy's default_rng (PCG64) with an explicit seed;
identical inputs give bitwise-identical volumes.
"""

from __future__ import annotations

import numpy as np

from .camera import PoseSequence
from .errors import ValidationError
from .warp import warp_sequence


def seeded_noise(seed: int, n: int, c: int, h: int, w: int) -> np.ndarray:
    """I.i.d. standard-normal volume [n, c, h, w], float32, PCG64-seeded."""
    if min(n, c, h, w) < 1:
        raise ValidationError("noise dimensions must all be >= 1")
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n, c, h, w), dtype=np.float32)


def warp_noise(z0: np.ndarray, depth: np.ndarray, poses: PoseSequence):
    """Warp the frame-0 noise slice [C, h, w] to every pose.

    poses must start at [I|0] and carry latent-scale intrinsics (full-camera
    fx, fy, cx, cy divided by the latent downsample factor).  Returns the
    warped volume [N, C, h, w] and the per-frame validity masks.
    """
    z0 = np.asarray(z0, dtype=np.float32)
    if z0.ndim != 3:
        raise ValidationError(f"frame-0 noise must be [C, h, w], got shape {z0.shape}")
    results = warp_sequence(z0, depth, poses)
    z_w = np.stack([r.warped for r in results])
    validity = [r.validity for r in results]
    return z_w, validity


def blend_masked(z: np.ndarray, z_w: np.ndarray, masks, validity=None) -> np.ndarray:
    """Per-frame masked blend: warped noise inside the masks, original outside.

    Warp holes carry no signal, so when validity masks are given the blend
    region is mask AND validity; invalid pixels fall back to z.
    """
    z = np.asarray(z)
    z_w = np.asarray(z_w)
    if z.shape != z_w.shape or z.ndim != 4:
        raise ValidationError(f"volume shapes differ: {z.shape} vs {z_w.shape}")
    n = z.shape[0]
    masks = list(masks)
    if len(masks) != n:
        raise ValidationError(f"need {n} masks, got {len(masks)}")
    out = z.copy()
    for i in range(n):
        m = np.asarray(masks[i])
        if m.shape != z.shape[2:]:
            raise ValidationError(f"mask {i} shape {m.shape} != latent dims {z.shape[2:]}")
        if validity is not None:
            m = m * np.asarray(validity[i])
        out[i] = np.where(m.astype(bool)[None, :, :], z_w[i], z[i])
    return out


def gaussian_lowpass(n: int, h: int, w: int, d0: float) -> np.ndarray:
    """DC-centered Gaussian low-pass filter volume [n, 1, h, w] in [0, 1].

    H(f) = exp(-|f|^2 / (2 d0^2)) with each axis's frequency coordinate
    normalized to [-1, 1]; the temporal axis is filtered like the spatial
    ones.  H at DC is exactly 1.
    """
    if d0 <= 0:
        raise ValidationError("cutoff d0 must be > 0")
    ft = np.fft.fftshift(np.fft.fftfreq(n)) * 2.0
    fy = np.fft.fftshift(np.fft.fftfreq(h)) * 2.0
    fx = np.fft.fftshift(np.fft.fftfreq(w)) * 2.0
    radius2 = (
        ft[:, None, None] ** 2 + fy[None, :, None] ** 2 + fx[None, None, :] ** 2
    )
    filt = np.exp(-radius2 / (2.0 * d0 * d0))
    return filt[:, None, :, :].astype(np.float32)


def lowpass_blend(zl: np.ndarray, z: np.ndarray, filt: np.ndarray) -> np.ndarray:
    """Frequency-domain mix: low bands from zl, high bands from z.

    3D FFT runs over (frame, height, width) per channel; filt is DC-centered
    [N, 1, h, w] and broadcasts across channels.  The inverse transform's
    imaginary residue is asserted tiny before taking the real part.
    """
    zl = np.asarray(zl)
    z = np.asarray(z)
    if zl.shape != z.shape or zl.ndim != 4:
        raise ValidationError(f"volume shapes differ: {zl.shape} vs {z.shape}")
    filt = np.asarray(filt, dtype=np.float64)
    if filt.shape != (zl.shape[0], 1, zl.shape[2], zl.shape[3]):
        raise ValidationError(
            f"filter shape {filt.shape} incompatible with volume {zl.shape}"
        )
    axes = (0, 2, 3)
    spec = np.fft.ifftshift(filt, axes=axes)  # back to numpy's unshifted layout
    mix = np.fft.fftn(zl, axes=axes) * spec + np.fft.fftn(z, axes=axes) * (1.0 - spec)
    out = np.fft.ifftn(mix, axes=axes)
    assert np.abs(out.imag).max() < 1e-6, "inverse FFT produced non-real output"
    return out.real.astype(np.float32)


def make_swl(
    seed: int,
    depth: np.ndarray,
    poses: PoseSequence,
    mask_sequence,
    channels: int = 4,
    d0: float = 0.25,
) -> np.ndarray:
    """Full shared-warping-latent pipeline; deterministic given its inputs.

    depth and mask_sequence are at latent resolution, poses carry latent
    intrinsics.  Composition: seeded noise -> warp frame 0 -> masked blend
    (masks gated by warp validity) -> low-frequency mix.
    """
    depth = np.asarray(depth)
    n = len(poses)
    h, w = depth.shape
    masks = list(mask_sequence)
    if len(masks) != n:
        raise ValidationError(f"need {n} masks, got {len(masks)}")
    z = seeded_noise(seed, n, channels, h, w)
    z_w, validity = warp_noise(z[0], depth, poses)
    z_l = blend_masked(z, z_w, masks, validity=validity)
    filt = gaussian_lowpass(n, h, w, d0)
    return lowpass_blend(z_l, z, filt)
