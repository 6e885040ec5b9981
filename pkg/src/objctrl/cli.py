"""Command-line front end; one subcommand per pipeline stage plus `run`/`serve`.

Exit codes: 0 success, 2 usage error, 3 validation error, 4 I/O error.
Every subcommand accepts --json to emit a single JSON document on stdout.
Flags mirror the library parameter names; the CLI only parses, loads, calls
the library, and saves, so CLI output is byte-identical to library output.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import layer_control, metrics, pipeline, swl, tensor_io, trajectory, warp
from .camera import (
    Intrinsics,
    default_intrinsics,
    load_poses,
    plucker_volume,
    save_poses,
    trajectory_to_poses,
)
from .errors import FileFormatError, ValidationError
from .presets import PRESET_KINDS, PresetSpec, preset_poses

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_IO = 4


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result = args.handler(args)
    except ValidationError as exc:
        _fail(args, "validation", exc)
        return EXIT_VALIDATION
    except (FileFormatError, OSError) as exc:
        _fail(args, "io", exc)
        return EXIT_IO
    if getattr(args, "json", False):
        sys.stdout.write(tensor_io.dumps_json(result))
    else:
        for line in _human_lines(result):
            print(line)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="objctrl",
        description="Synthesize and inspect object-motion control signals "
        "(trajectory lifting, camera poses, ray volumes, mask pyramids, warped latents).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = _cmd(sub, "lift", "Lift a 2D stroke to an N-frame 3D trajectory using a depth map.")
    p.add_argument("--traj", required=True, help="2D stroke JSON")
    p.add_argument("--depth", required=True, help="depth map (16-bit PNG + sidecar, or OTSR)")
    p.add_argument("--frames", type=int, default=14)
    p.add_argument("--theta", type=float, default=0.2, help="depth-gradient spread threshold")
    p.add_argument("--raw-theta", action="store_true", help="measure theta on raw depths instead of max-normalized")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(handler=cmd_lift)

    p = _cmd(sub, "poses", "Convert a 3D trajectory to translation-only camera poses.")
    p.add_argument("--traj", required=True, help="3D trajectory JSON")
    _intrinsics_flags(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(handler=cmd_poses)

    p = _cmd(sub, "plucker", "Build the per-pixel ray volume [N,6,H,W] for a pose sequence.")
    p.add_argument("--poses", required=True)
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--no-translation", action="store_true", help="drop the +t term from ray directions")
    p.add_argument("--normalize", action="store_true", help="unit-normalize ray directions")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(handler=cmd_plucker)

    p = _cmd(sub, "warp-mask", "Warp an object mask to every frame of a pose sequence.")
    p.add_argument("--mask", required=True)
    p.add_argument("--depth", required=True)
    p.add_argument("--poses", required=True)
    p.add_argument("--threshold", type=int, default=128)
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.set_defaults(handler=cmd_warp_mask)

    p = _cmd(sub, "pyramid", "Dilate a union mask into a scale pyramid.")
    p.add_argument("--mask", required=True)
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--kernel", type=int, default=3)
    p.add_argument("--threshold", type=int, default=128)
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.set_defaults(handler=cmd_pyramid)

    p = _cmd(sub, "fuse", "Fuse object/background volumes through a mask.")
    p.add_argument("--object", dest="obj", required=True, help="object volume OTSR")
    p.add_argument("--background", dest="bg", required=True, help="background volume OTSR")
    p.add_argument("--mask", required=True)
    p.add_argument("--threshold", type=int, default=128)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(handler=cmd_fuse)

    p = _cmd(sub, "swl", "Build the shared warping latent from depth, poses, and warped masks.")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--depth", required=True, help="full-resolution depth map")
    p.add_argument("--poses", required=True, help="full-resolution pose JSON")
    p.add_argument("--masks", required=True, nargs="+", help="per-frame warped mask PNGs, frame order")
    p.add_argument("--channels", type=int, default=4)
    p.add_argument("--downsample", type=int, default=8, help="latent grid downsample factor")
    p.add_argument("--d0", type=float, default=0.25, help="low-pass cutoff, normalized frequency")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(handler=cmd_swl)

    p = _cmd(sub, "preset", "Emit a preset camera-pose sequence (zoom/pan/orbit).")
    p.add_argument("--kind", required=True, choices=PRESET_KINDS)
    p.add_argument("--mag", type=float, required=True, help="scene units; degrees for orbit")
    p.add_argument("--frames", type=int, default=14)
    p.add_argument("--pivot-depth", type=float, default=1.0)
    _intrinsics_flags(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(handler=cmd_preset)

    p = _cmd(sub, "objmc", "Score trajectory alignment (mean per-frame pixel distance).")
    p.add_argument("--target", help="target trajectory JSON")
    p.add_argument("--tracked", help="observed trajectory JSON")
    p.add_argument("--pairs", help="batch JSON: [[target, tracked], ...]")
    p.add_argument("-o", "--output", help="optional report JSON path")
    p.set_defaults(handler=cmd_objmc)

    p = _cmd(sub, "run", "Run the full pipeline into a bundle directory.")
    p.add_argument("--image")
    p.add_argument("--depth")
    p.add_argument("--mask")
    p.add_argument("--traj", help="2D stroke JSON guidance")
    p.add_argument("--traj3d", help="3D trajectory JSON guidance")
    p.add_argument("--preset", choices=PRESET_KINDS, help="preset guidance")
    p.add_argument("--mag", type=float, help="preset magnitude")
    p.add_argument("--pivot-depth", type=float, default=1.0)
    p.add_argument("--poses", help="pose JSON guidance")
    p.add_argument("--manifest", help="replay a recorded bundle manifest")
    p.add_argument("--frames", type=int, default=14)
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--kernel", type=int, default=3)
    p.add_argument("--theta", type=float, default=0.2)
    p.add_argument("--raw-theta", action="store_true")
    p.add_argument("--background", default="static", choices=layer_control.BACKGROUND_MODES)
    p.add_argument("--swl", action="store_true", help="also build the shared warping latent")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--d0", type=float, default=0.25)
    p.add_argument("--channels", type=int, default=4)
    p.add_argument("--downsample", type=int, default=8)
    p.add_argument("--threshold", type=int, default=128)
    p.add_argument("-o", "--output", required=True, help="bundle directory")
    p.set_defaults(handler=cmd_run)

    p = _cmd(sub, "serve", "Start the local authoring/preview HTTP service.")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8008)
    p.set_defaults(handler=cmd_serve)

    return parser


def _cmd(sub, name: str, help_text: str):
    p = sub.add_parser(name, help=help_text, description=help_text)
    p.add_argument("--json", action="store_true", help="emit a JSON document on stdout")
    return p


def _intrinsics_flags(p):
    p.add_argument("--width", type=int, help="frame width for rough intrinsics")
    p.add_argument("--height", type=int, help="frame height for rough intrinsics")
    p.add_argument("--fx", type=float)
    p.add_argument("--fy", type=float)
    p.add_argument("--cx", type=float)
    p.add_argument("--cy", type=float)


def _resolve_intrinsics(args) -> Intrinsics:
    explicit = [args.fx, args.fy, args.cx, args.cy]
    if all(v is not None for v in explicit):
        return Intrinsics(*explicit)
    if any(v is not None for v in explicit):
        raise ValidationError("give all of --fx --fy --cx --cy or none")
    if args.width is None or args.height is None:
        raise ValidationError("need --width/--height or explicit --fx --fy --cx --cy")
    return default_intrinsics(args.width, args.height)


def cmd_lift(args) -> dict:
    stroke = trajectory.load_trajectory(args.traj, dims=2)
    depth = tensor_io.load_depth(args.depth)
    cfg = trajectory.SmoothingConfig(theta=args.theta, normalize=not args.raw_theta)
    traj3d = trajectory.lift(stroke, depth, args.frames, cfg)
    trajectory.save_trajectory(traj3d, args.output)
    return {"output": args.output, "frames": int(traj3d.shape[0]),
            "depth_reset": bool(np.all(traj3d[:, 2] == traj3d[0, 2]))}


def cmd_poses(args) -> dict:
    traj3d = trajectory.load_trajectory(args.traj, dims=3)
    seq = trajectory_to_poses(traj3d, _resolve_intrinsics(args))
    save_poses(seq, args.output)
    return {"output": args.output, "frames": len(seq)}


def cmd_plucker(args) -> dict:
    seq = load_poses(args.poses)
    volume = plucker_volume(
        seq, args.width, args.height,
        include_translation=not args.no_translation, normalize=args.normalize,
    )
    tensor_io.save_tensor(volume, args.output)
    return {"output": args.output, "shape": list(volume.shape)}


def cmd_warp_mask(args) -> dict:
    mask = tensor_io.load_mask(args.mask, threshold=args.threshold)
    depth = tensor_io.load_depth(args.depth)
    seq = load_poses(args.poses)
    frames = warp.warp_mask_sequence(mask, depth, seq)
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = []
    for i, m in enumerate(frames):
        name = f"warped_mask_{i:03d}.png"
        tensor_io.save_mask(m, out_dir / name)
        files.append(str(out_dir / name))
    return {"output": str(out_dir), "files": files}


def cmd_pyramid(args) -> dict:
    mu = tensor_io.load_mask(args.mask, threshold=args.threshold)
    pyramid = layer_control.mask_pyramid(mu, args.levels, args.kernel)
    manifest = layer_control.save_mask_pyramid(pyramid, args.output)
    return {"manifest": str(manifest), "levels": len(pyramid)}


def cmd_fuse(args) -> dict:
    f_obj = tensor_io.load_tensor(args.obj)
    f_bg = tensor_io.load_tensor(args.bg)
    mask = tensor_io.load_mask(args.mask, threshold=args.threshold)
    fused = layer_control.fuse_volumes(f_obj, f_bg, mask)
    tensor_io.save_tensor(fused, args.output)
    return {"output": args.output, "shape": list(fused.shape)}


def cmd_swl(args) -> dict:
    depth = tensor_io.load_depth(args.depth)
    seq = load_poses(args.poses)
    masks = [tensor_io.load_mask(p) for p in args.masks]
    latent_depth, latent_poses, latent_masks = pipeline.prepare_latent_inputs(
        depth, seq, masks, args.downsample
    )
    z_hat = swl.make_swl(
        args.seed, latent_depth, latent_poses, latent_masks,
        channels=args.channels, d0=args.d0,
    )
    tensor_io.save_tensor(z_hat, args.output)
    return {"output": args.output, "shape": list(z_hat.shape), "seed": args.seed, "d0": args.d0}


def cmd_preset(args) -> dict:
    spec = PresetSpec(kind=args.kind, magnitude=args.mag, frames=args.frames,
                      pivot_depth=args.pivot_depth)
    seq = preset_poses(spec, _resolve_intrinsics(args))
    save_poses(seq, args.output)
    return {"output": args.output, "frames": len(seq), "kind": args.kind}


def cmd_objmc(args) -> dict:
    if args.pairs:
        pairs = tensor_io.read_json(args.pairs)
        report = metrics.objmc_batch([tuple(p) for p in pairs])
    elif args.target and args.tracked:
        single = metrics.objmc(
            trajectory.load_trajectory(args.target)[:, :2],
            trajectory.load_trajectory(args.tracked)[:, :2],
        )
        report = single.to_dict()
    else:
        raise ValidationError("objmc needs --target and --tracked, or --pairs")
    if args.output:
        tensor_io.write_json(args.output, report)
    return report


def cmd_run(args) -> dict:
    if args.manifest:
        bundle = pipeline.run_from_manifest(args.manifest, args.output)
    else:
        for flag in ("image", "depth", "mask"):
            if getattr(args, flag) is None:
                raise ValidationError(f"run needs --{flag} (or --manifest)")
        guidance = {}
        if args.traj:
            guidance["traj2d"] = args.traj
        if args.traj3d:
            guidance["traj3d"] = args.traj3d
        if args.poses:
            guidance["poses"] = args.poses
        if args.preset:
            if args.mag is None:
                raise ValidationError("--preset needs --mag")
            guidance["preset"] = {"kind": args.preset, "magnitude": args.mag,
                                  "pivot_depth": args.pivot_depth}
        options = pipeline.RunOptions(
            frames=args.frames, levels=args.levels, kernel=args.kernel,
            theta=args.theta, normalize_theta=not args.raw_theta,
            background=args.background, swl=args.swl, seed=args.seed, d0=args.d0,
            latent_channels=args.channels, latent_downsample=args.downsample,
            mask_threshold=args.threshold,
        )
        bundle = pipeline.run(args.image, args.depth, args.mask, guidance, args.output, options)
    return {"bundle": str(bundle.directory), "manifest": str(bundle.manifest_path),
            "files": sorted(bundle.manifest["outputs"])}


def cmd_serve(args) -> dict:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="warning")
    return {"stopped": True}


def _fail(args, kind: str, exc: Exception) -> None:
    if getattr(args, "json", False):
        sys.stdout.write(tensor_io.dumps_json({"error": kind, "message": str(exc)}))
    else:
        print(f"error ({kind}): {exc}", file=sys.stderr)


def _human_lines(result: dict):
    for key, value in result.items():
        if isinstance(value, list) and len(value) > 6:
            yield f"{key}: [{len(value)} items]"
        else:
            yield f"{key}: {value}"


if __name__ == "__main__":
    sys.exit(main())
