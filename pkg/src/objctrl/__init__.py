"""objctrl: object-motion control signals for camera-pose-conditioned video models.

Lifts 2D strokes to depth-aware 3D trajectories, converts them (or presets)
to per-frame camera poses, and synthesizes the derived control artifacts:
per-pixel ray volumes, warped object masks with scale-wise dilation, fused
object/background control volumes, and the shared warping latent.
"""

__version__ = "0.1.0"

from .camera import (
    CameraPose,
    Intrinsics,
    PoseSequence,
    default_intrinsics,
    plucker_volume,
    project,
    trajectory_to_poses,
    unproject,
    world_to_camera,
)
from .errors import FileFormatError, ValidationError
from .layer_control import (
    BACKGROUND_MODES,
    MaskPyramid,
    background_poses,
    build_control_volume,
    fuse_volumes,
    mask_pyramid,
    union_mask,
)
from .metrics import ObjMCReport, objmc, objmc_batch
from .pipeline import ControlBundle, RunOptions, run, run_from_manifest
from .presets import PRESET_KINDS, PresetSpec, preset_poses
from .swl import blend_masked, gaussian_lowpass, lowpass_blend, make_swl, seeded_noise, warp_noise
from .trajectory import SmoothingConfig, lift, resample, sample_depth, smooth_depths
from .warp import WarpResult, forward_warp, pool_depth, warp_mask_sequence

__all__ = [
    "BACKGROUND_MODES",
    "CameraPose",
    "ControlBundle",
    "FileFormatError",
    "Intrinsics",
    "MaskPyramid",
    "ObjMCReport",
    "PRESET_KINDS",
    "PoseSequence",
    "PresetSpec",
    "RunOptions",
    "SmoothingConfig",
    "ValidationError",
    "WarpResult",
    "background_poses",
    "blend_masked",
    "build_control_volume",
    "default_intrinsics",
    "forward_warp",
    "fuse_volumes",
    "gaussian_lowpass",
    "lift",
    "lowpass_blend",
    "make_swl",
    "mask_pyramid",
    "objmc",
    "objmc_batch",
    "plucker_volume",
    "pool_depth",
    "preset_poses",
    "project",
    "resample",
    "run",
    "run_from_manifest",
    "sample_depth",
    "seeded_noise",
    "smooth_depths",
    "trajectory_to_poses",
    "union_mask",
    "unproject",
    "warp_mask_sequence",
    "warp_noise",
    "world_to_camera",
]
