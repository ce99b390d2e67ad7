import json

import numpy as np
import pytest

from retraj import clipio
from retraj.cli import main
from retraj.trajectory import Trajectory
from retraj.geometry import PoseSE3


def read_bytes_tree(root):
    return {p.relative_to(root): p.read_bytes()
            for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.fixture(scope="module")
def clip_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("clips") / "clip0"
    assert main(["synth", "--seed", "3", "--out", str(d),
                 "--frames", "4", "--width", "16", "--height", "16"]) == 0
    return d


class TestSynth:
    def test_deterministic_bytes(self, tmp_path):
        for sub in ("a", "b"):
            assert main(["synth", "--seed", "5", "--out", str(tmp_path / sub),
                         "--frames", "3", "--width", "12", "--height", "12"]) == 0
        assert read_bytes_tree(tmp_path / "a") == read_bytes_tree(tmp_path / "b")

    def test_writes_clip_and_scene(self, clip_dir):
        colors, depths, k, meta = clipio.read_clip(clip_dir)
        assert len(colors) == 4 and k.width == 16
        assert (clip_dir / "scene.json").exists()


class TestRender:
    def test_identity_trajectory_reproduces_clip(self, clip_dir, tmp_path):
        traj = Trajectory(poses=[PoseSE3.identity()] * 4)
        tpath = tmp_path / "traj.json"
        traj.save(tpath)
        out = tmp_path / "render"
        assert main(["render", "--clip", str(clip_dir), "--traj", str(tpath),
                     "--out", str(out)]) == 0
        colors, _, _, _ = clipio.read_clip(clip_dir)
        for i, c in enumerate(colors):
            got = clipio.load_png(out / f"frame_{i:05d}.png")
            mask = clipio.load_mask_png(out / f"mask_{i:05d}.png")
            assert mask.all()
            assert np.array_equal(got, c)

    def test_parametric_spec_accepted(self, clip_dir, tmp_path):
        spec = {"kind": "orbit", "params": {"axis": "y", "total_degrees": 10,
                                            "pivot_depth": 2.0}}
        tpath = tmp_path / "spec.json"
        tpath.write_text(json.dumps(spec))
        assert main(["render", "--clip", str(clip_dir), "--traj", str(tpath),
                     "--out", str(tmp_path / "r")]) == 0

    def test_missing_clip_is_io_error(self, tmp_path):
        tpath = tmp_path / "t.json"
        Trajectory(poses=[PoseSE3.identity()]).save(tpath)
        assert main(["render", "--clip", str(tmp_path / "nope"),
                     "--traj", str(tpath), "--out", str(tmp_path / "r")]) == 2


class TestCurate:
    def test_curate_mono_dataset(self, clip_dir, tmp_path):
        out = tmp_path / "ds"
        assert main(["curate-mono", "--clips", str(clip_dir), "--out", str(out),
                     "--count", "3", "--seed", "1"]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["count"] == 3
        assert all(e["kind"] == "pair" for e in manifest["items"])

    def test_curate_mv_dataset(self, clip_dir, tmp_path):
        out = tmp_path / "ds"
        assert main(["curate-mv", "--clips", str(clip_dir), "--out", str(out),
                     "--count", "2", "--seed", "1"]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["count"] == 2
        assert all(e["kind"] == "triplet" for e in manifest["items"])
        assert (out / "item_000000" / "source").is_dir()


class TestEval:
    def test_report_json_csv_figures(self, clip_dir, tmp_path):
        colors, _, _, _ = clipio.read_clip(clip_dir)
        pred = tmp_path / "pred"
        gt = tmp_path / "gt"
        pred.mkdir()
        gt.mkdir()
        rng = np.random.default_rng(0)
        for i, c in enumerate(colors):
            clipio.save_png(gt / f"frame_{i:05d}.png", c)
            noisy = np.clip(c + rng.normal(0, 0.03, c.shape), 0, 1)
            clipio.save_png(pred / f"frame_{i:05d}.png", noisy)
        out = tmp_path / "report.json"
        assert main(["eval", "--pred", str(pred), "--gt", str(gt),
                     "--out", str(out)]) == 0
        rep = json.loads(out.read_text())
        assert 20 < rep["psnr"] < 40
        csv_lines = (tmp_path / "report.csv").read_text().strip().splitlines()
        assert csv_lines[0] == "frame,psnr_db,ssim"
        assert len(csv_lines) == 1 + len(colors)
        assert (tmp_path / "figures" / "metrics.png").stat().st_size > 0

    def test_empty_pred_dir_is_io_error(self, tmp_path):
        (tmp_path / "p").mkdir()
        (tmp_path / "g").mkdir()
        assert main(["eval", "--pred", str(tmp_path / "p"), "--gt", str(tmp_path / "g"),
                     "--out", str(tmp_path / "r.json")]) == 2


class TestUsage:
    def test_unknown_flag_exit_1(self):
        assert main(["synth", "--bogus"]) == 1

    def test_unknown_subcommand_exit_1(self):
        assert main(["frobnicate"]) == 1
