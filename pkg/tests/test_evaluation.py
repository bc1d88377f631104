"""
Tests for confusion matrices, overall accuracy and the T sweep.
"""

import numpy as np
import pytest

from gridchange.changegrid import ChangeLabel, change_map, change_map_diff_baseline
from gridchange.config import ChangeConfig
from gridchange.errors import ConfigError, GridChangeError, TruthLabelError
from gridchange.evaluation import (
    PUBLISHED_MATRICES,
    PUBLISHED_OA,
    PUBLISHED_T_VALUES,
    ConfusionMatrix2,
    ConfusionMatrix3,
    confusion,
    t_sweep,
)
from gridchange.synthetic import jittered_masks

from .conftest import mask_with

SI, SD, AU, C, UC = (ChangeLabel.SI, ChangeLabel.SD, ChangeLabel.AU, ChangeLabel.C, ChangeLabel.UC)


class TestPublishedArithmetic:
    """Overall accuracy of the six printed count tables."""

    @pytest.mark.parametrize("name, oa", [
        ("qb-wuhan1-baseline", "76.39"),
        ("qb-wuhan2-baseline", "80.56"),
        ("gf2-ezhou-baseline", "87.00"),
        ("qb-wuhan1-ratio", "91.67"),
        ("qb-wuhan2-ratio", "89.58"),
        ("gf2-ezhou-ratio", "95.50"),
    ])
    def test_overall_accuracy(self, name, oa):
        matrix = PUBLISHED_MATRICES[name]
        assert f"{matrix.overall_accuracy:.2f}" == oa
        assert matrix.oa_text() == f"OA={oa}"

    def test_printed_baseline_values(self):
        for name, oa in PUBLISHED_OA.items():
            assert f"{PUBLISHED_MATRICES[name].overall_accuracy:.2f}" == oa

    def test_totals(self):
        assert PUBLISHED_MATRICES["qb-wuhan1-baseline"].total == 144
        assert PUBLISHED_MATRICES["qb-wuhan1-ratio"].trace == 132
        assert PUBLISHED_MATRICES["gf2-ezhou-baseline"].total == 400

    def test_row_and_column_accuracy(self):
        matrix = PUBLISHED_MATRICES["qb-wuhan1-ratio"]
        assert matrix.row_accuracy[SI] == pytest.approx(100 * 22 / 26)
        assert matrix.column_accuracy[SD] == pytest.approx(100 * 4 / 9)


class TestConfusionMatrix:
    """Matrix invariants."""

    def test_absent_row_accuracy(self):
        matrix = ConfusionMatrix3([[5, 0, 1], [0, 0, 0], [0, 0, 5]])
        assert matrix.row_accuracy[SD] is None
        assert matrix.column_accuracy[SD] is None
        assert matrix.row_accuracy[SI] == pytest.approx(100 * 5 / 6)

    def test_permutation_invariance(self, rng):
        counts = rng.integers(0, 30, size=(3, 3))
        counts[0, 0] += 1
        order = [2, 0, 1]
        permuted = counts[np.ix_(order, order)]
        assert ConfusionMatrix3(counts).overall_accuracy == ConfusionMatrix3(permuted).overall_accuracy

    def test_bounds(self, rng):
        for _ in range(50):
            counts = rng.integers(0, 10, size=(2, 2))
            counts[1, 0] += 1
            matrix = ConfusionMatrix2(counts)
            assert matrix.trace <= matrix.total
            assert 0.0 <= matrix.overall_accuracy <= 100.0

    def test_empty_rejected(self):
        with pytest.raises(GridChangeError):
            ConfusionMatrix2([[0, 0], [0, 0]])

    def test_wrong_shape(self):
        with pytest.raises(GridChangeError):
            ConfusionMatrix3([[1, 2], [3, 4]])

    def test_frame_layout(self):
        frame = PUBLISHED_MATRICES["qb-wuhan1-baseline"].to_frame()
        assert list(frame.columns) == ["C", "UC", "total", "accuracy"]
        assert list(frame.index) == ["C", "UC", "total", "accuracy"]
        assert frame.loc["accuracy", "accuracy"] == "76.39"
        assert frame.loc["C", "total"] == 32
        assert frame.loc["total", "total"] == 144


class TestConfusion:
    """Building matrices from change maps and truth labels."""

    @pytest.fixture
    def ratio_map(self):
        t1 = mask_with((40, 40), (25, 35, 25, 35))
        t2 = mask_with((40, 40), (5, 15, 5, 15))
        return change_map(t1, t2, ChangeConfig(n_segments=2))

    def test_identity(self, ratio_map):
        truth = {(c.row, c.col): c.label for c in ratio_map}
        matrix = confusion(ratio_map, truth)
        assert isinstance(matrix, ConfusionMatrix3)
        assert matrix.overall_accuracy == 100.0
        assert matrix.total == 4

    def test_counts_orientation(self, ratio_map):
        truth = {(0, 0): AU, (0, 1): AU, (1, 0): AU, (1, 1): SD}
        matrix = confusion(ratio_map, truth)
        # predicted SI at (0, 0), truth AU: row SI, column AU
        assert matrix.counts[0, 2] == 1
        assert matrix.counts[1, 1] == 1
        assert matrix.counts[2, 2] == 2

    def test_string_labels_accepted(self, ratio_map):
        truth = {(c.row, c.col): c.label.value.lower() for c in ratio_map}
        assert confusion(ratio_map, truth).overall_accuracy == 100.0

    def test_missing_cell(self, ratio_map):
        truth = {(0, 0): SI, (0, 1): AU, (1, 0): AU}
        with pytest.raises(TruthLabelError, match=r"\(1,1\)"):
            confusion(ratio_map, truth)

    def test_alphabet_mismatch(self, ratio_map):
        truth = {(r, c): UC for r in range(2) for c in range(2)}
        with pytest.raises(TruthLabelError, match="alphabet"):
            confusion(ratio_map, truth)

    def test_out_of_grid(self, ratio_map):
        truth = {(c.row, c.col): c.label for c in ratio_map}
        truth[(2, 0)] = AU
        with pytest.raises(TruthLabelError):
            confusion(ratio_map, truth)

    def test_baseline_matrix(self):
        t1 = mask_with((40, 40))
        t2 = mask_with((40, 40), (0, 10, 0, 10))
        gcm = change_map_diff_baseline(t1, t2, ChangeConfig(n_segments=2, diff_threshold=20))
        truth = {(0, 0): C, (0, 1): UC, (1, 0): UC, (1, 1): C}
        matrix = confusion(gcm, truth)
        assert isinstance(matrix, ConfusionMatrix2)
        assert matrix.counts.tolist() == [[1, 0], [1, 2]]
        assert f"{matrix.overall_accuracy:.2f}" == "75.00"


class TestSweep:
    """Overall accuracy against T."""

    def test_published_values(self):
        t1, t2, truth = jittered_masks()
        rows = t_sweep(t1, t2, truth, ChangeConfig(n_segments=8), PUBLISHED_T_VALUES)
        assert [t for t, _ in rows] == list(PUBLISHED_T_VALUES)
        oa = dict(rows)
        assert oa[2.5] >= oa[1.5]
        assert oa[2.5] == 100.0
        assert oa[1.5] == 25.0

    def test_single_value_matches_confusion(self):
        t1, t2, truth = jittered_masks()
        cfg = ChangeConfig(n_segments=8, change_threshold=2.0)
        (row,) = t_sweep(t1, t2, truth, cfg, [2.0])
        assert row[1] == confusion(change_map(t1, t2, cfg), truth).overall_accuracy

    def test_input_order_kept(self):
        t1, t2, truth = jittered_masks()
        rows = t_sweep(t1, t2, truth, ChangeConfig(n_segments=8), [3.0, 1.5, 2.5])
        assert [t for t, _ in rows] == [3.0, 1.5, 2.5]

    @pytest.mark.parametrize("values", [[1.0], [2.5, 0.9], []])
    def test_invalid_thresholds(self, values):
        t1, t2, truth = jittered_masks()
        with pytest.raises(ConfigError):
            t_sweep(t1, t2, truth, ChangeConfig(n_segments=8), values)
