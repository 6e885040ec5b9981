"""Raster and tensor file I/O.

Array conventions used throughout the toolkit:
  Image    -- uint8, (H, W) grayscale or (H, W, 3) RGB, row-major
  DepthMap -- float32, (H, W), finite and >= 0, scene units
  Mask     -- uint8, (H, W), values strictly in {0, 1}
  Tensor   -- float32, any rank, all values finite

File formats:
  OTSR (binary tensor, bit-exact round trip, endianness fixed):
    bytes 0-7   magic b"OTSR\\x00\\x00\\x00\\x01" (last byte = format version)
    byte 8      dtype code (0 = 32-bit float, little-endian)
    byte 9      rank r (u8)
    next 4*r    dimension sizes, u32 little-endian
    rest        row-major payload

  Depth PNG: 16-bit grayscale PNG plus a JSON sidecar {"min": m, "max": M}
    next to it (same stem, .json extension). Sample s decodes to
    min + (s / 65535) * (max - min).

  Masks and images are ordinary PNGs (8-bit).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from .errors import FileFormatError, ValidationError

OTSR_MAGIC = b"OTSR\x00\x00\x00\x01"
DTYPE_F32 = 0


def save_tensor(t: np.ndarray, path) -> None:
    """Write a float32 tensor to an OTSR file."""
    arr = np.ascontiguousarray(t, dtype="<f4")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("tensor contains non-finite values")
    header = bytearray(OTSR_MAGIC)
    header.append(DTYPE_F32)
    header.append(arr.ndim)
    header += np.asarray(arr.shape, dtype="<u4").tobytes()
    Path(path).write_bytes(bytes(header) + arr.tobytes())


def load_tensor(path) -> np.ndarray:
    """Read an OTSR file back into a float32 array (bit-exact)."""
    raw = Path(path).read_bytes()
    if len(raw) < 10:
        raise FileFormatError(f"{path}: truncated OTSR header")
    if raw[:4] != OTSR_MAGIC[:4]:
        raise FileFormatError(f"{path}: bad magic, not an OTSR file")
    if raw[4:8] != OTSR_MAGIC[4:8]:
        raise FileFormatError(f"{path}: unsupported OTSR version")
    if raw[8] != DTYPE_F32:
        raise FileFormatError(f"{path}: unsupported dtype code {raw[8]}")
    rank = raw[9]
    dims_end = 10 + 4 * rank
    if len(raw) < dims_end:
        raise FileFormatError(f"{path}: truncated dimension list")
    shape = tuple(int(d) for d in np.frombuffer(raw[10:dims_end], dtype="<u4"))
    count = int(np.prod(shape)) if rank else 1
    payload = raw[dims_end:]
    if len(payload) != 4 * count:
        raise FileFormatError(
            f"{path}: payload holds {len(payload) // 4} values, shape needs {count}"
        )
    data = np.frombuffer(payload, dtype="<f4").reshape(shape)
    if not np.all(np.isfinite(data)):
        raise FileFormatError(f"{path}: tensor contains non-finite values")
    return data.astype(np.float32, copy=True)


def load_mask(path, threshold: int = 128) -> np.ndarray:
    """Load an 8-bit grayscale PNG as a binary mask: sample >= threshold -> 1."""
    img = _open_png(path)
    if img.mode != "L":
        raise FileFormatError(f"{path}: mask must be 8-bit grayscale, got mode {img.mode}")
    samples = np.asarray(img, dtype=np.uint8)
    return (samples >= threshold).astype(np.uint8)


def save_mask(mask: np.ndarray, path) -> None:
    """Write a {0,1} mask as an 8-bit grayscale PNG (1 -> 255)."""
    mask = np.asarray(mask)
    if mask.ndim != 2 or not np.isin(mask, (0, 1)).all():
        raise ValidationError("mask must be a 2D array of {0,1}")
    PILImage.fromarray((mask * 255).astype(np.uint8), mode="L").save(path, format="PNG")


def depth_sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def load_depth(path) -> np.ndarray:
    """Load a depth map from a 16-bit PNG + JSON sidecar, or an OTSR rank-2 file."""
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == OTSR_MAGIC[:4]:
        depth = load_tensor(path)
        if depth.ndim != 2:
            raise ValidationError(f"{path}: depth tensor must be rank 2, got rank {depth.ndim}")
        if np.any(depth < 0):
            raise ValidationError(f"{path}: depth values must be non-negative")
        return depth

    img = _open_png(path)
    if img.mode not in ("I;16", "I"):
        raise FileFormatError(f"{path}: depth PNG must be 16-bit grayscale, got mode {img.mode}")
    sidecar = depth_sidecar_path(path)
    if not sidecar.exists():
        raise FileFormatError(f"{path}: missing JSON sidecar {sidecar}")
    meta = json.loads(sidecar.read_text(encoding="utf-8"))
    try:
        lo, hi = float(meta["min"]), float(meta["max"])
    except (KeyError, TypeError) as exc:
        raise FileFormatError(f"{sidecar}: sidecar needs numeric 'min' and 'max'") from exc
    if lo < 0 or hi < lo:
        raise ValidationError(f"{sidecar}: need 0 <= min <= max, got min={lo} max={hi}")
    samples = np.asarray(img, dtype=np.float64)
    depth = lo + (samples / 65535.0) * (hi - lo)
    return depth.astype(np.float32)


def save_depth(depth: np.ndarray, path) -> None:
    """Write a depth map as a 16-bit PNG with a min/max JSON sidecar."""
    depth = np.asarray(depth, dtype=np.float64)
    if depth.ndim != 2:
        raise ValidationError("depth map must be 2D")
    if not np.all(np.isfinite(depth)) or np.any(depth < 0):
        raise ValidationError("depth values must be finite and >= 0")
    lo, hi = float(depth.min()), float(depth.max())
    span = hi - lo
    samples = np.zeros_like(depth) if span == 0 else (depth - lo) / span * 65535.0
    quantized = np.round(samples).astype(np.uint16)
    PILImage.fromarray(quantized).save(path, format="PNG")
    depth_sidecar_path(path).write_text(
        json.dumps({"min": lo, "max": hi}), encoding="utf-8"
    )


def load_image(path) -> np.ndarray:
    """Load a PNG image as uint8 (H, W) grayscale or (H, W, 3) RGB."""
    img = _open_png(path)
    if img.mode == "L":
        return np.asarray(img, dtype=np.uint8)
    if img.mode != "RGB":
        img = img.convert("RGB")
    return np.asarray(img, dtype=np.uint8)


def save_image(image: np.ndarray, path) -> None:
    image = np.asarray(image, dtype=np.uint8)
    if image.ndim not in (2, 3):
        raise ValidationError("image must be (H, W) or (H, W, 3)")
    PILImage.fromarray(image).save(path, format="PNG")


def write_json(path, obj) -> None:
    """Canonical JSON writer: sorted keys, 2-space indent, trailing newline.

    Every JSON artifact goes through here so that library and CLI output are
    byte-identical and bundles are reproducible.
    """
    Path(path).write_text(dumps_json(obj), encoding="utf-8")


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def read_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: invalid JSON ({exc})") from exc


def _open_png(path):
    try:
        img = PILImage.open(path)
        img.load()
    except FileNotFoundError:
        raise
    except OSError as exc:
        raise FileFormatError(f"{path}: unreadable image ({exc})") from exc
    return img
