"""User-selectable camera-pose presets: zoom, pan, orbit.

SIGN CONVENTION (the most likely integration bug, so stated up front):
camera translation here equals the OBJECT's camera-space displacement (the
world point stays fixed), the opposite of conventional camera-pan semantics.
pan_right therefore has positive t_x and moves the object right; zoom_in has
negative t_z and brings the object closer.

Schedules are linear: frame i of N reaches fraction i/(N-1) of the requested
magnitude, hitting it exactly on the final frame.  The orbit preset rotates
about the camera-frame y axis through a pivot on the optical axis at
pivot_depth; the pivot point itself stays fixed in camera coordinates, so
whether an object self-rotates or sweeps through space depends on where it
sits relative to the pivot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .camera import CameraPose, Intrinsics, PoseSequence
from .errors import ValidationError

PRESET_KINDS = ("zoom_in", "zoom_out", "pan_left", "pan_right", "orbit")


@dataclass(frozen=True)
class PresetSpec:
    """kind, magnitude (scene units; degrees for orbit), frame count, and the
    orbit pivot depth."""

    kind: str
    magnitude: float
    frames: int
    pivot_depth: float = 1.0

    def __post_init__(self):
        if self.kind not in PRESET_KINDS:
            raise ValidationError(f"unknown preset kind {self.kind!r}, pick one of {PRESET_KINDS}")
        if not math.isfinite(self.magnitude):
            raise ValidationError("preset magnitude must be finite")
        if self.frames < 2:
            raise ValidationError("preset needs at least 2 frames")
        if self.kind == "orbit" and not self.pivot_depth > 0:
            raise ValidationError("orbit pivot depth must be > 0")


def rotation_y(degrees: float) -> np.ndarray:
    c = math.cos(math.radians(degrees))
    s = math.sin(math.radians(degrees))
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def preset_poses(spec: PresetSpec, K: Intrinsics) -> PoseSequence:
    """Pose sequence for a preset; frame 0 is always [I|0]."""
    n = spec.frames
    eye = np.eye(3)
    frames = []
    for i in range(n):
        alpha = i / (n - 1)
        step = alpha * spec.magnitude
        if spec.kind == "zoom_in":
            frames.append(CameraPose(eye, np.array([0.0, 0.0, -step])))
        elif spec.kind == "zoom_out":
            frames.append(CameraPose(eye, np.array([0.0, 0.0, step])))
        elif spec.kind == "pan_right":
            frames.append(CameraPose(eye, np.array([step, 0.0, 0.0])))
        elif spec.kind == "pan_left":
            frames.append(CameraPose(eye, np.array([-step, 0.0, 0.0])))
        else:  # orbit
            R = rotation_y(step)
            pivot = np.array([0.0, 0.0, spec.pivot_depth])
            frames.append(CameraPose(R, (np.eye(3) - R) @ pivot))
    return PoseSequence(K, frames)
