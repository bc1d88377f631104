"""
End-to-end tests: synthetic imagery through index, mask, change map and evaluation.
"""

import pytest

from gridchange.changegrid import ChangeLabel, change_map, change_map_diff_baseline
from gridchange.config import ChangeConfig
from gridchange.evaluation import confusion
from gridchange.filters import mfbi
from gridchange.spectral import building_mask
from gridchange.synthetic import bitemporal_scene, jittered_masks


def detect(scene, cfg):
    masks = [building_mask(mfbi(img), img) for img in (scene.t1, scene.t2)]
    return change_map(masks[0], masks[1], cfg)


@pytest.fixture(scope="module")
def scene():
    return bitemporal_scene(512, 8, seed=7)


@pytest.fixture(scope="module")
def detected(scene):
    return detect(scene, ChangeConfig(n_segments=8, change_threshold=2.5))


class TestSyntheticScene:
    """512 x 512 scene, N = 8, T = 2.5."""

    def test_overall_accuracy(self, scene, detected):
        assert confusion(detected, scene.truth).overall_accuracy >= 95.0

    def test_planted_changes_recovered(self, scene, detected):
        for label in (ChangeLabel.SI, ChangeLabel.SD):
            for row, col in scene.planted(label):
                assert detected.cell(row, col).label is label, (row, col)

    def test_unchanged_buildings_stay_unchanged(self, scene, detected):
        unchanged = [c for c in detected if scene.truth[(c.row, c.col)] is ChangeLabel.AU and c.a1 > 0]
        assert unchanged
        assert all(c.label is ChangeLabel.AU for c in unchanged)

    def test_vegetation_and_water_rejected(self):
        scene = bitemporal_scene(512, 8, seed=11, vegetation=4, water=4)
        gcm = detect(scene, ChangeConfig(n_segments=8))
        assert confusion(gcm, scene.truth).overall_accuracy >= 90.0
        for row, col in scene.planted(ChangeLabel.SI):
            assert gcm.cell(row, col).label is ChangeLabel.SI

    def test_deterministic(self, scene, detected):
        again = detect(bitemporal_scene(512, 8, seed=7), ChangeConfig(n_segments=8))
        assert again == detected


class TestRatioAgainstDifference:
    """Area-ratio patterns against the pixel-count difference baseline."""

    def test_jitter_tolerated_only_by_ratio(self):
        t1, t2, truth = jittered_masks()
        ratio = change_map(t1, t2, ChangeConfig(n_segments=8, change_threshold=2.5))
        assert confusion(ratio, truth).overall_accuracy == 100.0

        # unchanged cells differ by 60 pixels, planted changes by 200
        diff = change_map_diff_baseline(t1, t2, ChangeConfig(n_segments=8, diff_threshold=50))
        as_binary = {
            cell: ChangeLabel.UC if label is ChangeLabel.AU else ChangeLabel.C
            for cell, label in truth.items()
        }
        assert confusion(diff, as_binary).overall_accuracy == 25.0
