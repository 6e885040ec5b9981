"""Pinhole camera model, per-frame extrinsics, and Plucker ray volumes.

COORDINATE CONVENTIONS
======================
Image frame:
  - Origin at the top-left corner, x right, y down, units in pixels.
  - Pixel coordinates are continuous; pixel centers sit at integer coordinates.

Camera frame (standard computer vision):
  - X right, Y down, Z forward along the optical axis. Visible points have z > 0.

Extrinsics [R|t] map world to camera:  p_cam = R @ p_world + t.

Canonical frame: pose sequences derived from trajectories declare frame 0's
camera space to be the world frame, so frames[0] is exactly [I|0] and every
later translation is the camera-space displacement of the tracked point.
Rotation is not recovered from trajectories; those poses all carry R = I.

Plucker volumes: per pixel (x, y) and frame i the ray is encoded as the
6-vector (o x d, d) with o = t and d = R @ K^-1 @ (x, y, 1)^T + t.  The "+ t"
term follows the pose-conditioning convention this toolkit feeds; set
include_translation=False for the conventional parameterization, and
normalize=True to unit-normalize d.  Both are off by default.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._parallel import parallel_map
from .errors import ValidationError
from .tensor_io import read_json, write_json

ROTATION_TOL = 1e-6


@dataclass(frozen=True)
class Intrinsics:
    """Pinhole parameters in pixels: focal lengths (fx, fy), principal point (cx, cy)."""

    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        for name in ("fx", "fy", "cx", "cy"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ValidationError(f"intrinsics: {name} must be finite")
            object.__setattr__(self, name, value)
        if self.fx <= 0 or self.fy <= 0:
            raise ValidationError("intrinsics: focal lengths must be > 0")

    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]]
        )

    def scaled(self, factor: float) -> "Intrinsics":
        """Intrinsics for the same camera at resolution divided by `factor`."""
        return Intrinsics(self.fx / factor, self.fy / factor, self.cx / factor, self.cy / factor)


@dataclass(frozen=True)
class CameraPose:
    """World-to-camera rigid transform: p_cam = R @ p_world + t."""

    R: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        R = np.array(self.R, dtype=np.float64).reshape(3, 3)
        t = np.array(self.t, dtype=np.float64).reshape(3)
        if not (np.all(np.isfinite(R)) and np.all(np.isfinite(t))):
            raise ValidationError("pose: R and t must be finite")
        if np.max(np.abs(R.T @ R - np.eye(3))) > ROTATION_TOL:
            raise ValidationError("pose: R is not orthonormal within 1e-6")
        if abs(np.linalg.det(R) - 1.0) > ROTATION_TOL:
            raise ValidationError("pose: det(R) != 1 within 1e-6")
        R.flags.writeable = False
        t.flags.writeable = False
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "t", t)

    def is_identity(self, tol: float = 0.0) -> bool:
        return bool(
            np.max(np.abs(self.R - np.eye(3))) <= tol and np.max(np.abs(self.t)) <= tol
        )


def identity_pose() -> CameraPose:
    return CameraPose(np.eye(3), np.zeros(3))


@dataclass(frozen=True)
class PoseSequence:
    """Shared intrinsics plus one CameraPose per frame."""

    intrinsics: Intrinsics
    frames: tuple = field(default_factory=tuple)

    def __post_init__(self):
        frames = tuple(self.frames)
        if len(frames) < 1:
            raise ValidationError("pose sequence needs at least one frame")
        object.__setattr__(self, "frames", frames)

    def __len__(self) -> int:
        return len(self.frames)

    def translations(self) -> np.ndarray:
        return np.stack([pose.t for pose in self.frames])

    def all_identity_rotation(self, tol: float = ROTATION_TOL) -> bool:
        return all(np.max(np.abs(p.R - np.eye(3))) <= tol for p in self.frames)


def default_intrinsics(width: int, height: int) -> Intrinsics:
    """Rough intrinsics from frame size: f = max(W, H), principal point at center."""
    if width < 1 or height < 1:
        raise ValidationError("frame dimensions must be >= 1")
    f = float(max(width, height))
    return Intrinsics(f, f, width / 2.0, height / 2.0)


def unproject(px: float, py: float, d: float, K: Intrinsics) -> np.ndarray:
    """Pixel + depth to camera-frame point: ((px-cx)*d/fx, (py-cy)*d/fy, d)."""
    if d <= 0:
        raise ValidationError(f"unproject: depth must be > 0, got {d}")
    x = (px - K.cx) * d / K.fx
    y = (py - K.cy) * d / K.fy
    return np.array([x, y, d], dtype=np.float64)


def project(p, K: Intrinsics) -> tuple:
    """Camera-frame point to continuous pixel coordinates."""
    x, y, z = float(p[0]), float(p[1]), float(p[2])
    if z <= 0:
        raise ValidationError(f"project: point behind camera, z={z}")
    return (K.fx * x / z + K.cx, K.fy * y / z + K.cy)


def world_to_camera(p, pose: CameraPose) -> np.ndarray:
    return pose.R @ np.asarray(p, dtype=np.float64) + pose.t


def camera_to_world(p, pose: CameraPose) -> np.ndarray:
    """Inverse of world_to_camera: p_world = R^T @ (p_cam - t)."""
    return pose.R.T @ (np.asarray(p, dtype=np.float64) - pose.t)


def trajectory_to_poses(traj3d, K: Intrinsics) -> PoseSequence:
    """Convert an (N, 3) trajectory of (x, y, depth) points into camera poses.

    Each frame keeps R = I; the translation is the camera-space displacement
    of the tracked point relative to frame 0, so frames[0] is exactly [I|0]:

        C_i = ((x_i - cx) * d_i / fx, (y_i - cy) * d_i / fy, d_i)
        t_i = C_i - C_0
    """
    pts = np.asarray(traj3d, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] < 1:
        raise ValidationError("trajectory must be an (N, 3) array with N >= 1")
    depths = pts[:, 2]
    if np.any(depths <= 0):
        raise ValidationError("trajectory depths must all be > 0")
    xc = (pts[:, 0] - K.cx) * depths / K.fx
    yc = (pts[:, 1] - K.cy) * depths / K.fy
    zc = depths
    tx = xc - xc[0]
    ty = yc - yc[0]
    tz = zc - zc[0]
    eye = np.eye(3)
    frames = [CameraPose(eye, np.array([tx[i], ty[i], tz[i]])) for i in range(len(pts))]
    return PoseSequence(K, frames)


def plucker_volume(
    poses: PoseSequence,
    width: int,
    height: int,
    include_translation: bool = True,
    normalize: bool = False,
) -> np.ndarray:
    """Per-pixel ray volume of shape [N, 6, H, W], float32.

    For every pixel u = (x, y, 1) and frame [R|t]:
        d = R @ K^-1 @ u (+ t when include_translation)
        embedding = (t x d, d), optionally with d unit-normalized first.
    """
    if width < 1 or height < 1:
        raise ValidationError("frame dimensions must be >= 1")
    K = poses.intrinsics
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    rays = np.stack(
        [(xs - K.cx) / K.fx, (ys - K.cy) / K.fy, np.ones_like(xs)], axis=0
    )  # K^-1 @ u, shape (3, H, W)

    def one_frame(pose: CameraPose) -> np.ndarray:
        d = np.tensordot(pose.R, rays, axes=([1], [0]))
        if include_translation:
            d = d + pose.t[:, None, None]
        if normalize:
            d = d / np.linalg.norm(d, axis=0, keepdims=True)
        o = np.broadcast_to(pose.t[:, None, None], d.shape)
        moment = np.cross(o, d, axis=0)
        return np.concatenate([moment, d], axis=0)

    volume = np.stack(parallel_map(one_frame, poses.frames))
    return volume.astype(np.float32)


def save_poses(seq: PoseSequence, path) -> None:
    """Write pose JSON: intrinsics plus per-frame row-major R and t."""
    doc = {
        "fx": seq.intrinsics.fx,
        "fy": seq.intrinsics.fy,
        "cx": seq.intrinsics.cx,
        "cy": seq.intrinsics.cy,
        "frames": [
            {"R": [float(v) for v in pose.R.ravel()], "t": [float(v) for v in pose.t]}
            for pose in seq.frames
        ],
    }
    write_json(path, doc)


def load_poses(path) -> PoseSequence:
    doc = read_json(path)
    try:
        K = Intrinsics(doc["fx"], doc["fy"], doc["cx"], doc["cy"])
        frames = [CameraPose(np.asarray(f["R"]).reshape(3, 3), f["t"]) for f in doc["frames"]]
    except (KeyError, TypeError, AttributeError) as exc:
        raise ValidationError(f"{path}: malformed pose file ({exc})") from exc
    return PoseSequence(K, frames)
