"""
Tests for parameter models and run-config resolution.
"""

import json

import pytest

from gridchange.config import ChangeConfig, MaskParams, MbiParams, RunConfig, ScaleProfile, validated
from gridchange.errors import ConfigError, RasterIOError


class TestDefaults:
    """Published defaults."""

    def test_median_windows(self):
        assert ScaleProfile().windows == (3, 6, 12, 24)

    def test_mbi_lengths(self):
        params = MbiParams()
        assert params.scales == (3, 8, 13, 18, 23)
        assert params.angles == (0, 45, 90, 135)

    def test_change_defaults(self):
        cfg = ChangeConfig()
        assert cfg.n_segments == 14
        assert cfg.change_threshold == 2.5
        assert cfg.diff_threshold is None

    def test_area_floor(self):
        assert ChangeConfig().area_floor(40000) == pytest.approx(200.0)
        assert ChangeConfig(min_area_floor=12).area_floor(40000) == 12.0
        assert ChangeConfig().area_floor() == 0.0


class TestValidation:
    """Field constraints surface as ConfigError."""

    @pytest.mark.parametrize("data", [
        {"change_threshold": 1.0},
        {"change_threshold": 0.5},
        {"n_segments": 0},
        {"diff_threshold": -1},
        {"unknown": 3},
    ])
    def test_bad_change_config(self, data):
        with pytest.raises(ConfigError):
            validated(ChangeConfig, data)

    def test_ndvi_threshold_range(self):
        with pytest.raises(ConfigError, match="ndvi_threshold"):
            validated(MaskParams, {"ndvi_threshold": 1.0})

    def test_mbi_range(self):
        with pytest.raises(ConfigError):
            validated(MbiParams, {"scale_min": 20, "scale_max": 10})
        with pytest.raises(ConfigError):
            validated(MbiParams, {"scale_min": 3, "scale_max": 5, "scale_step": 5})


class TestRunConfig:
    """Config file loading and flag overrides."""

    def test_merged_overrides(self):
        cfg = RunConfig().merged({"change.n_segments": 8, "mask.ndvi_threshold": None, "index": "mbi"})
        assert cfg.change.n_segments == 8
        assert cfg.mask.ndvi_threshold == 0.3
        assert cfg.index == "mbi"

    def test_merged_validates(self):
        with pytest.raises(ConfigError):
            RunConfig().merged({"change.change_threshold": 1.0})

    def test_merged_unknown_section(self):
        with pytest.raises(ConfigError, match="Unknown config section"):
            RunConfig().merged({"nope.value": 1})

    def test_load_and_flag_precedence(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"change": {"n_segments": 2, "change_threshold": 3.0}}))
        cfg = RunConfig.load(path).merged({"change.n_segments": 4})
        assert cfg.change.n_segments == 4
        assert cfg.change.change_threshold == 3.0

    def test_load_bad_json(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="not valid JSON"):
            RunConfig.load(path)

    def test_load_missing(self, tmp_path):
        with pytest.raises(RasterIOError):
            RunConfig.load(tmp_path / "absent.json")

    def test_json_round_trip(self):
        cfg = RunConfig().merged({"paths": {"input": "t1.raster"}})
        assert RunConfig.model_validate_json(cfg.to_json()) == cfg
