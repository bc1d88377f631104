"""
Tests for the gridchange command line.
"""

import json

import numpy as np
import pytest

from gridchange.changegrid import ChangeLabel
from gridchange.cli import build_parser, main, resolve_config
from gridchange.formats import (
    metadata_path,
    read_change_report,
    write_gray_image,
    write_mask,
    write_raster,
    write_truth_labels,
)
from gridchange.synthetic import jittered_masks

from .conftest import four_band, mask_with

SYNTH_ARGS = ["--size", "256", "--n-segments", "4", "--added", "2", "--removed", "2", "--unchanged", "4"]


@pytest.fixture
def scene(tmp_path):
    out = tmp_path / "scene"
    assert main(["synth", "--out-dir", str(out), *SYNTH_ARGS]) == 0
    return out


@pytest.fixture
def mask_pair(tmp_path):
    t1 = mask_with((80, 80), (5, 15, 5, 15), (50, 60, 50, 60))
    t2 = mask_with((80, 80), (5, 15, 5, 15), (50, 60, 10, 20))
    p1, p2 = tmp_path / "t1_mask.pgm", tmp_path / "t2_mask.pgm"
    write_mask(t1, p1)
    write_mask(t2, p2)
    return p1, p2


def _change(tmp_path, mask_pair, *extra):
    image, report = tmp_path / "change.ppm", tmp_path / "change.json"
    code = main([
        "change", "--t1", str(mask_pair[0]), "--t2", str(mask_pair[1]),
        "--out-image", str(image), "--out-report", str(report), "--n-segments", "2", *extra,
    ])
    return code, image, report


class TestParser:
    """Argument parsing and usage errors."""

    def test_no_command_prints_help(self, capsys):
        assert main([]) == 0
        assert "usage" in capsys.readouterr().out

    def test_typo_in_method(self, tmp_path):
        with pytest.raises(SystemExit) as info:
            main(["index", "--method", "mfbl", "--in", "x", "--out", "y"])
        assert info.value.code == 2

    def test_eval_needs_inputs(self):
        with pytest.raises(SystemExit) as info:
            main(["eval", "--report", "change.json"])
        assert info.value.code == 2

    def test_flag_overrides_config_file(self, tmp_path):
        config = tmp_path / "run.json"
        config.write_text(json.dumps({"change": {"n_segments": 6, "change_threshold": 3.0}}))
        args = build_parser().parse_args([
            "sweep", "--t1", "a", "--t2", "b", "--truth", "c",
            "--config", str(config), "--n-segments", "8",
        ])
        cfg = resolve_config(args)
        assert cfg.change.n_segments == 8
        assert cfg.change.change_threshold == 3.0

    def test_version(self, capsys):
        assert main(["version"]) == 0
        assert capsys.readouterr().out.startswith("gridchange ")


class TestStages:
    """Single-stage subcommands."""

    def test_index_and_mask(self, tmp_path, capsys, block_band):
        raster = tmp_path / "scene.raster"
        write_raster(four_band(block_band + 10.0), raster)
        feature, mask = tmp_path / "mfbi.pgm", tmp_path / "mask.pgm"
        assert main(["index", "--in", str(raster), "--out", str(feature)]) == 0
        assert capsys.readouterr().out.startswith("compute_seconds=")
        assert main(["mask", "--in", str(raster), "--feature", str(feature), "--out", str(mask)]) == 0
        line = capsys.readouterr().out.strip()
        assert line.startswith("threshold=0.")
        assert int(line.split("building_pixels=")[1]) > 0
        meta = json.loads(metadata_path(mask).read_text())
        assert meta["stage"] == "mask"
        assert meta["applied"] == ["otsu", "ndvi", "ndwi"]

    def test_constant_feature_warns(self, tmp_path, capsys, block_raster):
        raster, feature, mask = tmp_path / "s.raster", tmp_path / "flat.pgm", tmp_path / "mask.pgm"
        write_raster(block_raster, raster)
        write_gray_image(np.zeros(block_raster.shape), feature)
        assert main(["mask", "--in", str(raster), "--feature", str(feature), "--out", str(mask)]) == 0
        captured = capsys.readouterr()
        assert "threshold=none building_pixels=0" in captured.out
        assert "degenerate histogram" in captured.err

    def test_change(self, tmp_path, capsys, mask_pair):
        code, image, report = _change(tmp_path, mask_pair)
        assert code == 0
        assert capsys.readouterr().out.strip() == "cells=4 SI=1 SD=1 AU=2"
        assert image.exists() and metadata_path(report).exists()
        assert read_change_report(report).cell(1, 1).label is ChangeLabel.SD

    def test_change_baseline(self, tmp_path, capsys, mask_pair):
        image, report = tmp_path / "b.ppm", tmp_path / "b.json"
        assert main([
            "change-baseline", "--t1", str(mask_pair[0]), "--t2", str(mask_pair[1]),
            "--out-image", str(image), "--out-report", str(report),
            "--n-segments", "2", "--diff-threshold", "50",
        ]) == 0
        assert capsys.readouterr().out.strip() == "cells=4 C=2 UC=2"

    def test_baseline_without_threshold_fails(self, tmp_path, capsys, mask_pair):
        assert main([
            "change-baseline", "--t1", str(mask_pair[0]), "--t2", str(mask_pair[1]),
            "--out-image", str(tmp_path / "b.ppm"), "--out-report", str(tmp_path / "b.json"),
        ]) == 1
        assert "diff_threshold" in capsys.readouterr().err

    def test_zero_segments_fails(self, tmp_path, capsys, mask_pair):
        code, _, _ = _change(tmp_path, mask_pair, "--n-segments", "0")
        assert code == 1
        assert "[ConfigError]" in capsys.readouterr().err


class TestEval:
    """Confusion matrices from reports or published tables."""

    def test_published(self, capsys):
        assert main(["eval", "--published", "qb-wuhan1-baseline"]) == 0
        assert capsys.readouterr().out.strip().endswith("OA=76.39")

    def test_identical_masks_full_accuracy(self, tmp_path, capsys):
        mask = mask_with((80, 80), (5, 15, 5, 15))
        path = tmp_path / "mask.pgm"
        write_mask(mask, path)
        _, _, report = _change(tmp_path, (path, path))
        truth = tmp_path / "truth.csv"
        write_truth_labels({(r, c): ChangeLabel.AU for r in range(2) for c in range(2)}, truth)
        out = tmp_path / "eval.csv"
        capsys.readouterr()
        assert main(["eval", "--report", str(report), "--truth", str(truth), "--out", str(out)]) == 0
        assert capsys.readouterr().out.strip().endswith("OA=100.00")
        assert out.read_text().startswith("predicted,SI,SD,AU,total,accuracy")
        assert json.loads(metadata_path(out).read_text())["oa"] == "100.00"

    def test_missing_truth_row(self, tmp_path, capsys, mask_pair):
        _, _, report = _change(tmp_path, mask_pair)
        truth = tmp_path / "truth.csv"
        truth.write_text("0,0,AU\n0,1,AU\n1,0,AU\n")
        assert main(["eval", "--report", str(report), "--truth", str(truth)]) == 1
        assert "(1,1)" in capsys.readouterr().err


class TestSweepAndBench:
    """T sweep and timing harness."""

    @pytest.fixture
    def jittered(self, tmp_path):
        t1, t2, truth = jittered_masks()
        paths = tmp_path / "t1.pgm", tmp_path / "t2.pgm", tmp_path / "truth.csv"
        write_mask(t1, paths[0])
        write_mask(t2, paths[1])
        write_truth_labels(truth, paths[2])
        return paths

    def _sweep_args(self, paths):
        return ["sweep", "--t1", str(paths[0]), "--t2", str(paths[1]), "--truth", str(paths[2]), "--n-segments", "8"]

    def test_sweep(self, capsys, jittered):
        assert main(self._sweep_args(jittered)) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "T,OA"
        assert len(lines) == 8
        assert "2.5,100.00" in lines

    def test_sweep_rejects_t_at_one(self, capsys, jittered):
        assert main([*self._sweep_args(jittered), "--t-values", "1.0"]) == 1
        assert "[ConfigError]" in capsys.readouterr().err

    def test_bench_zero_repetitions(self, capsys):
        assert main(["bench", "--width", "64", "--height", "64", "--repetitions", "0"]) == 1
        assert "repetitions" in capsys.readouterr().err

    def test_small_bench(self, tmp_path, capsys):
        out = tmp_path / "bench.csv"
        assert main(["bench", "--width", "96", "--height", "96", "--repetitions", "1", "--out", str(out)]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "method,run,seconds"
        assert [line.split(",")[0] for line in lines[1:3]] == ["mfbi", "mbi"]
        assert any(line.startswith("speedup=") for line in lines)
        assert metadata_path(out).exists()


class TestPipeline:
    """Synthetic scene through every stage."""

    def test_synth_outputs(self, scene):
        for name in ("t1.raster", "t2.raster", "truth.csv", "truth.csv.meta.json"):
            assert (scene / name).exists()

    def test_pipeline(self, tmp_path, capsys, scene):
        run = tmp_path / "run"
        capsys.readouterr()
        assert main([
            "pipeline", "--t1", str(scene / "t1.raster"), "--t2", str(scene / "t2.raster"),
            "--out-dir", str(run), "--truth", str(scene / "truth.csv"),
            "--n-segments", "4", "--diff-threshold", "40",
        ]) == 0
        out = capsys.readouterr().out
        assert "cells=16 SI=" in out
        assert "ratio OA=" in out
        # the truth uses the SI/SD/AU alphabet, so the baseline map is not scored
        assert "difference OA=" not in out
        for name in (
            "t1_mfbi.pgm", "t2_mfbi.pgm", "t1_mask.pgm", "t2_mask.pgm",
            "change.ppm", "change_report.json", "change_baseline.ppm", "eval_ratio.csv",
        ):
            assert (run / name).exists(), name
        assert metadata_path(run / "change_report.json").exists()

    def test_reruns_are_byte_identical(self, tmp_path, scene):
        outputs = []
        for name in ("a", "b"):
            run = tmp_path / name
            assert main([
                "pipeline", "--t1", str(scene / "t1.raster"), "--t2", str(scene / "t2.raster"),
                "--out-dir", str(run), "--n-segments", "4", "-q",
            ]) == 0
            outputs.append({
                p.name: p.read_bytes() for p in sorted(run.iterdir())
                if not p.name.endswith(".meta.json")
            })
        assert outputs[0] == outputs[1]

    def test_synth_rejects_crowded_grid(self, tmp_path, capsys):
        assert main(["synth", "--out-dir", str(tmp_path / "s"), "--size", "64", "--n-segments", "2"]) == 1
        assert "[ConfigError]" in capsys.readouterr().err
