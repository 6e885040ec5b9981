import json

import numpy as np
import pytest

from conftest import disk_mask
from objctrl import tensor_io
from objctrl.camera import default_intrinsics, load_poses, save_poses, trajectory_to_poses
from objctrl.cli import main
from objctrl.trajectory import SmoothingConfig, lift, load_trajectory, save_trajectory


def make_depth(tmp_path, h=48, w=64, fill=2.0, name="depth.otsr"):
    path = tmp_path / name
    tensor_io.save_tensor(np.full((h, w), fill, np.float32), path)
    return path


class TestExitCodes:
    def test_missing_required_flag_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["lift", "--traj", "x.json"])  # no --depth/-o
        assert exc.value.code == 2

    def test_unknown_flag_rejected(self):
        with pytest.raises(SystemExit) as exc:
            main(["preset", "--kind", "pan_right", "--mag", "1", "--wobble", "3", "-o", "x"])
        assert exc.value.code == 2

    def test_validation_error_exit_3(self, tmp_path, capsys):
        stroke = tmp_path / "s.json"
        save_trajectory(np.array([[0.0, 0.0], [100.0, 0.0]]), stroke)  # leaves 48x64
        depth = make_depth(tmp_path)
        code = main(["lift", "--traj", str(stroke), "--depth", str(depth),
                     "--frames", "6", "-o", str(tmp_path / "t.json")])
        assert code == 3

    def test_io_error_exit_4(self, tmp_path):
        code = main(["poses", "--traj", str(tmp_path / "missing.json"),
                     "--width", "64", "--height", "48", "-o", str(tmp_path / "p.json")])
        assert code == 4


class TestSubcommands:
    def test_preset_zero_magnitude_identity_poses(self, tmp_path):
        out = tmp_path / "p.json"
        code = main(["preset", "--kind", "pan_right", "--mag", "0", "--frames", "14",
                     "--width", "576", "--height", "320", "-o", str(out)])
        assert code == 0
        seq = load_poses(out)
        assert len(seq) == 14
        for pose in seq.frames:
            assert np.array_equal(pose.R, np.eye(3))
            assert np.array_equal(pose.t, np.zeros(3))

    def test_objmc_identical_zero(self, tmp_path, capsys):
        traj = tmp_path / "a.json"
        save_trajectory(np.array([[1.0, 2.0], [3.0, 4.0]]), traj)
        code = main(["objmc", "--target", str(traj), "--tracked", str(traj), "--json"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["mean"] == 0.0

    def test_lift_produces_n_points(self, tmp_path, capsys):
        stroke = tmp_path / "s.json"
        save_trajectory(np.array([[5.0, 24.0], [40.0, 24.0]]), stroke)
        depth = make_depth(tmp_path)
        out = tmp_path / "t3d.json"
        code = main(["lift", "--traj", str(stroke), "--depth", str(depth),
                     "--frames", "14", "--theta", "0.2", "-o", str(out), "--json"])
        assert code == 0
        pts = load_trajectory(out, dims=3)
        assert pts.shape == (14, 3)
        doc = json.loads(capsys.readouterr().out)
        assert doc["frames"] == 14

    def test_plucker_writes_volume(self, tmp_path):
        poses = tmp_path / "p.json"
        main(["preset", "--kind", "zoom_out", "--mag", "0.5", "--frames", "3",
              "--width", "16", "--height", "12", "-o", str(poses)])
        out = tmp_path / "vol.otsr"
        code = main(["plucker", "--poses", str(poses), "--width", "16", "--height", "12",
                     "-o", str(out)])
        assert code == 0
        assert tensor_io.load_tensor(out).shape == (3, 6, 12, 16)

    def test_warp_mask_writes_frames(self, tmp_path):
        poses = tmp_path / "p.json"
        main(["preset", "--kind", "pan_right", "--mag", "0.1", "--frames", "4",
              "--width", "64", "--height", "48", "-o", str(poses)])
        mask = tmp_path / "m.png"
        tensor_io.save_mask(disk_mask(48, 64, 24, 20, 5), mask)
        depth = make_depth(tmp_path)
        out = tmp_path / "warped"
        code = main(["warp-mask", "--mask", str(mask), "--depth", str(depth),
                     "--poses", str(poses), "-o", str(out)])
        assert code == 0
        assert sorted(p.name for p in out.iterdir()) == [
            f"warped_mask_{i:03d}.png" for i in range(4)
        ]

    def test_pyramid_writes_manifest(self, tmp_path):
        mask = tmp_path / "m.png"
        tensor_io.save_mask(disk_mask(32, 32, 16, 16, 4), mask)
        out = tmp_path / "pyr"
        code = main(["pyramid", "--mask", str(mask), "--levels", "3", "--kernel", "3",
                     "-o", str(out)])
        assert code == 0
        manifest = tensor_io.read_json(out / "mask_pyramid.json")
        assert manifest["levels"] == 3 and len(manifest["files"]) == 3

    def test_fuse_selects_by_mask(self, tmp_path):
        a = tmp_path / "a.otsr"
        b = tmp_path / "b.otsr"
        tensor_io.save_tensor(np.full((2, 1, 4, 4), 5.0, np.float32), a)
        tensor_io.save_tensor(np.full((2, 1, 4, 4), -5.0, np.float32), b)
        mask = tmp_path / "m.png"
        half = np.zeros((4, 4), np.uint8)
        half[:, :2] = 1
        tensor_io.save_mask(half, mask)
        out = tmp_path / "fused.otsr"
        code = main(["fuse", "--object", str(a), "--background", str(b),
                     "--mask", str(mask), "-o", str(out)])
        assert code == 0
        fused = tensor_io.load_tensor(out)
        assert np.all(fused[..., :2] == 5.0) and np.all(fused[..., 2:] == -5.0)

    def test_run_and_serve_wiring(self, tmp_path, capsys):
        rng = np.random.default_rng(0)
        image = tmp_path / "image.png"
        tensor_io.save_image(rng.integers(0, 255, (48, 64), dtype=np.uint8), image)
        depth = make_depth(tmp_path)
        mask = tmp_path / "mask.png"
        tensor_io.save_mask(disk_mask(48, 64, 24, 16, 6), mask)
        out = tmp_path / "bundle"
        code = main(["run", "--image", str(image), "--depth", str(depth), "--mask", str(mask),
                     "--preset", "pan_right", "--mag", "0.2", "--frames", "6",
                     "--levels", "3", "-o", str(out), "--json"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert (out / "manifest.json").exists()
        assert "poses_obj.json" in doc["files"]


class TestCliLibraryParity:
    def test_lift_bytes_match_library(self, tmp_path):
        stroke_pts = np.array([[5.0, 10.0], [40.0, 30.0], [60.0, 12.0]])
        stroke = tmp_path / "s.json"
        save_trajectory(stroke_pts, stroke)
        rng = np.random.default_rng(1)
        depth_arr = (rng.random((48, 64)) * 0.02 + 2.0).astype(np.float32)
        depth = tmp_path / "d.otsr"
        tensor_io.save_tensor(depth_arr, depth)

        cli_out = tmp_path / "cli.json"
        main(["lift", "--traj", str(stroke), "--depth", str(depth), "--frames", "14",
              "--theta", "0.2", "-o", str(cli_out)])

        lib_out = tmp_path / "lib.json"
        save_trajectory(lift(stroke_pts, depth_arr, 14, SmoothingConfig(theta=0.2)), lib_out)
        assert cli_out.read_bytes() == lib_out.read_bytes()

    def test_poses_bytes_match_library(self, tmp_path):
        pts = np.array([[5.0, 10.0, 1.5], [20.0, 12.0, 1.75], [40.0, 30.0, 2.5]])
        traj = tmp_path / "t.json"
        save_trajectory(pts, traj)
        cli_out = tmp_path / "cli.json"
        main(["poses", "--traj", str(traj), "--width", "64", "--height", "48",
              "-o", str(cli_out)])
        lib_out = tmp_path / "lib.json"
        save_poses(trajectory_to_poses(pts, default_intrinsics(64, 48)), lib_out)
        assert cli_out.read_bytes() == lib_out.read_bytes()
