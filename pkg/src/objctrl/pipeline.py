"""One-call orchestration from (image, depth, mask, guidance) to a bundle.

The bundle directory holds every control signal the downstream generator
consumes: object and background pose files, per-frame warped masks, the
union-mask pyramid, fused per-scale ray volumes, and optionally the shared
warping latent.  A manifest records all parameters plus SHA-256 hashes of
inputs and outputs; re-running from the manifest reproduces the bundle
bitwise.

Guidance is exactly one of:
    {"traj2d": path}   2D stroke JSON, lifted with the depth map
    {"traj3d": path}   (N, 3) trajectory JSON, used as-is
    {"preset": {"kind": ..., "magnitude": ..., "pivot_depth": ...}}
    {"poses": path}    pose JSON (may include rotation)
"""

from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from . import layer_control, swl, tensor_io, trajectory, warp
from .camera import PoseSequence, default_intrinsics, load_poses, save_poses, trajectory_to_poses
from .errors import ValidationError
from .presets import PresetSpec, preset_poses

GUIDANCE_KINDS = ("traj2d", "traj3d", "preset", "poses")
MANIFEST_FORMAT = "control-bundle-manifest/1"


@dataclass(frozen=True)
class RunOptions:
    frames: int = 14
    levels: int = 4
    kernel: int = 3
    theta: float = 0.2
    normalize_theta: bool = True
    background: str = "static"
    swl: bool = False
    seed: int = 0
    d0: float = 0.25
    latent_channels: int = 4
    latent_downsample: int = 8
    mask_threshold: int = 128


@dataclass(frozen=True)
class ControlBundle:
    directory: Path
    manifest_path: Path
    manifest: dict
    poses_obj: Path
    poses_bg: Path | None
    warped_masks: tuple
    pyramid_manifest: Path
    plucker_fused: tuple
    swl_volume: Path | None = None
    trajectory3d: Path | None = None


def run(image_path, depth_path, mask_path, guidance: dict, out_dir, options: RunOptions = RunOptions()) -> ControlBundle:
    """Execute the full preprocessing pipeline and write the bundle."""
    kind, payload = _parse_guidance(guidance)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    image = tensor_io.load_image(image_path)
    depth = tensor_io.load_depth(depth_path)
    mask = tensor_io.load_mask(mask_path, threshold=options.mask_threshold)
    height, width = image.shape[:2]
    if depth.shape != (height, width) or mask.shape != (height, width):
        raise ValidationError(
            f"dimension mismatch: image {(height, width)}, depth {depth.shape}, mask {mask.shape}"
        )
    if not mask.any():
        raise ValidationError("object mask is empty; layered control needs an object region")

    K = default_intrinsics(width, height)
    outputs = {}
    traj3d_path = None

    if kind in ("traj2d", "traj3d"):
        if kind == "traj2d":
            stroke = trajectory.load_trajectory(payload, dims=2)
            cfg = trajectory.SmoothingConfig(theta=options.theta, normalize=options.normalize_theta)
            traj3d = trajectory.lift(stroke, depth, options.frames, cfg)
        else:
            traj3d = trajectory.load_trajectory(payload, dims=3)
            if traj3d.shape[0] != options.frames:
                raise ValidationError(
                    f"3D trajectory has {traj3d.shape[0]} points, expected {options.frames} frames"
                )
        traj3d_path = out_dir / "traj3d.json"
        trajectory.save_trajectory(traj3d, traj3d_path)
        outputs["traj3d.json"] = traj3d_path
        poses_obj = trajectory_to_poses(traj3d, K)
    elif kind == "preset":
        spec = PresetSpec(
            kind=payload["kind"],
            magnitude=float(payload["magnitude"]),
            frames=options.frames,
            pivot_depth=float(payload.get("pivot_depth", 1.0)),
        )
        poses_obj = preset_poses(spec, K)
    else:  # poses file
        poses_obj = load_poses(payload)
        if len(poses_obj) != options.frames:
            options = replace(options, frames=len(poses_obj))

    poses_obj_path = out_dir / "poses_obj.json"
    save_poses(poses_obj, poses_obj_path)
    outputs["poses_obj.json"] = poses_obj_path

    warped = warp.warp_mask_sequence(mask, depth, poses_obj)
    mask_paths = []
    for i, m in enumerate(warped):
        name = f"warped_mask_{i:03d}.png"
        tensor_io.save_mask(m, out_dir / name)
        outputs[name] = out_dir / name
        mask_paths.append(out_dir / name)

    mu = layer_control.union_mask(warped)
    tensor_io.save_mask(mu, out_dir / "mask_union.png")
    outputs["mask_union.png"] = out_dir / "mask_union.png"

    pyramid = layer_control.mask_pyramid(mu, options.levels, options.kernel)
    pyramid_manifest = layer_control.save_mask_pyramid(pyramid, out_dir)
    for name in tensor_io.read_json(pyramid_manifest)["files"]:
        outputs[name] = out_dir / name
    outputs[pyramid_manifest.name] = pyramid_manifest

    poses_bg = layer_control.background_poses(options.background, poses_obj)
    poses_bg_path = None
    if poses_bg is not None:
        poses_bg_path = out_dir / "poses_bg.json"
        save_poses(poses_bg, poses_bg_path)
        outputs["poses_bg.json"] = poses_bg_path

    fused = layer_control.build_control_volume(poses_obj, options.background, pyramid, width, height)
    fused_paths = []
    for s, volume in enumerate(fused):
        name = f"plucker_fused_scale{s}.otsr"
        tensor_io.save_tensor(volume, out_dir / name)
        outputs[name] = out_dir / name
        fused_paths.append(out_dir / name)

    swl_path = None
    if options.swl:
        latent_depth, latent_poses, latent_masks = prepare_latent_inputs(
            depth, poses_obj, warped, options.latent_downsample
        )
        z_hat = swl.make_swl(
            options.seed, latent_depth, latent_poses, latent_masks,
            channels=options.latent_channels, d0=options.d0,
        )
        swl_path = out_dir / "swl.otsr"
        tensor_io.save_tensor(z_hat, swl_path)
        outputs["swl.otsr"] = swl_path
        tensor_io.write_json(
            out_dir / "swl_provenance.json",
            {
                "seed": options.seed,
                "d0": options.d0,
                "channels": options.latent_channels,
                "downsample": options.latent_downsample,
                "poses": "poses_obj.json",
                "masks": [p.name for p in mask_paths],
            },
        )
        outputs["swl_provenance.json"] = out_dir / "swl_provenance.json"

    manifest = {
        "format": MANIFEST_FORMAT,
        "parameters": asdict(options),
        "guidance": _guidance_manifest(kind, payload),
        "inputs": {
            "image": _file_ref(image_path),
            "depth": _file_ref(depth_path),
            "mask": _file_ref(mask_path),
        },
        "outputs": {name: _sha256(path) for name, path in sorted(outputs.items())},
    }
    manifest_path = out_dir / "manifest.json"
    tensor_io.write_json(manifest_path, manifest)

    return ControlBundle(
        directory=out_dir,
        manifest_path=manifest_path,
        manifest=manifest,
        poses_obj=poses_obj_path,
        poses_bg=poses_bg_path,
        warped_masks=tuple(mask_paths),
        pyramid_manifest=pyramid_manifest,
        plucker_fused=tuple(fused_paths),
        swl_volume=swl_path,
        trajectory3d=traj3d_path,
    )


def run_from_manifest(manifest_path, out_dir) -> ControlBundle:
    """Re-run a recorded bundle; input hashes must still match the manifest."""
    doc = tensor_io.read_json(manifest_path)
    if doc.get("format") != MANIFEST_FORMAT:
        raise ValidationError(f"{manifest_path}: not a {MANIFEST_FORMAT} manifest")
    options = RunOptions(**doc["parameters"])
    inputs = doc["inputs"]
    for role in ("image", "depth", "mask"):
        ref = inputs[role]
        actual = _sha256(ref["path"])
        if actual != ref["sha256"]:
            raise ValidationError(
                f"{role} input {ref['path']} changed since the manifest was written"
            )
    guidance_doc = doc["guidance"]
    kind = guidance_doc["kind"]
    if kind == "preset":
        guidance = {"preset": guidance_doc["preset"]}
    else:
        ref = guidance_doc["file"]
        if _sha256(ref["path"]) != ref["sha256"]:
            raise ValidationError(f"guidance input {ref['path']} changed since the manifest was written")
        guidance = {kind: ref["path"]}
    return run(
        inputs["image"]["path"], inputs["depth"]["path"], inputs["mask"]["path"],
        guidance, out_dir, options,
    )


def prepare_latent_inputs(depth: np.ndarray, poses: PoseSequence, warped_masks, downsample: int):
    """Carry full-resolution inputs down to the latent grid.

    Depth is average-pooled, intrinsics divided by the downsample factor, and
    each warped mask max-pooled (any coverage keeps a latent cell on).
    """
    latent_depth = warp.pool_depth(depth, downsample)
    latent_poses = PoseSequence(poses.intrinsics.scaled(float(downsample)), poses.frames)
    latent_masks = [layer_control.maxpool(m, downsample) for m in warped_masks]
    return latent_depth, latent_poses, latent_masks


def _parse_guidance(guidance: dict):
    if not isinstance(guidance, dict):
        raise ValidationError("guidance must be a dict with exactly one source")
    keys = [k for k in guidance if guidance[k] is not None]
    if len(keys) != 1 or keys[0] not in GUIDANCE_KINDS:
        raise ValidationError(f"guidance needs exactly one of {GUIDANCE_KINDS}")
    return keys[0], guidance[keys[0]]


def _guidance_manifest(kind: str, payload) -> dict:
    if kind == "preset":
        return {"kind": "preset", "preset": dict(payload)}
    return {"kind": kind, "file": _file_ref(payload)}


def _file_ref(path) -> dict:
    return {"path": str(path), "sha256": _sha256(path)}


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()
