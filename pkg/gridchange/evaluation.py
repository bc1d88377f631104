"""
Confusion matrices, overall accuracy and the T sweep.

Rows are predicted labels, columns are truth labels. Accuracy of a row
(predicted class) or column (truth class) with a zero total is undefined and
reported as ``None``, never as 0 or 100.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import ClassVar, Dict, List, Mapping, Optional, Sequence, Tuple, Type, Union

import numpy as np
import pandas as pd

from .changegrid import (
    DIFFERENCE_LABELS,
    RATIO_LABELS,
    ChangeLabel,
    GridChangeMap,
    change_map,
    reclassify,
)
from .config import ChangeConfig, validated
from .errors import ConfigError, GridChangeError, TruthLabelError
from .spectral import BuildingMask

logger = logging.getLogger(__name__)

TruthLabels = Mapping[Tuple[int, int], Union[ChangeLabel, str]]

# Threshold values of the published T study.
PUBLISHED_T_VALUES: Tuple[float, ...] = (1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5)


@dataclass(frozen=True)
class ConfusionMatrix:
    """Square count table over a fixed label alphabet."""
    counts: np.ndarray

    LABELS: ClassVar[Tuple[ChangeLabel, ...]] = ()

    def __post_init__(self) -> None:
        counts = np.array(self.counts, dtype=np.int64, copy=True)
        k = len(self.LABELS)
        if counts.shape != (k, k):
            raise GridChangeError(f"{type(self).__name__} needs a {k}x{k} count table, got {counts.shape}")
        if (counts < 0).any():
            raise GridChangeError("Confusion counts must be non-negative")
        if counts.sum() == 0:
            raise GridChangeError("Confusion matrix is empty; overall accuracy is undefined")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def trace(self) -> int:
        return int(np.trace(self.counts))

    @property
    def overall_accuracy(self) -> float:
        """OA in percent: ``100 * trace / total``."""
        return 100.0 * self.trace / self.total

    @property
    def row_totals(self) -> Tuple[int, ...]:
        return tuple(int(v) for v in self.counts.sum(axis=1))

    @property
    def column_totals(self) -> Tuple[int, ...]:
        return tuple(int(v) for v in self.counts.sum(axis=0))

    @staticmethod
    def _ratio(hit: int, total: int) -> Optional[float]:
        return 100.0 * hit / total if total else None

    @property
    def row_accuracy(self) -> Dict[ChangeLabel, Optional[float]]:
        """Per predicted class: diagonal / row total, in percent."""
        return {
            label: self._ratio(int(self.counts[i, i]), self.row_totals[i])
            for i, label in enumerate(self.LABELS)
        }

    @property
    def column_accuracy(self) -> Dict[ChangeLabel, Optional[float]]:
        """Per truth class: diagonal / column total, in percent."""
        return {
            label: self._ratio(int(self.counts[i, i]), self.column_totals[i])
            for i, label in enumerate(self.LABELS)
        }

    def oa_text(self) -> str:
        return f"OA={self.overall_accuracy:.2f}"

    def to_frame(self) -> pd.DataFrame:
        """Table laid out like a printed confusion matrix.

        Label rows/columns, then ``total`` and ``accuracy``; OA sits in the
        bottom-right corner. Accuracies are two-decimal strings, absent ones
        empty.
        """
        def pct(value: Optional[float]) -> str:
            return "" if value is None else f"{value:.2f}"

        names = [label.value for label in self.LABELS]
        columns = names + ["total", "accuracy"]
        rows = []
        for i, label in enumerate(self.LABELS):
            rows.append([int(v) for v in self.counts[i]] + [self.row_totals[i], pct(self.row_accuracy[label])])
        rows.append(list(self.column_totals) + [self.total, ""])
        rows.append([pct(self.column_accuracy[label]) for label in self.LABELS] + ["", pct(self.overall_accuracy)])
        frame = pd.DataFrame(rows, index=names + ["total", "accuracy"], columns=columns, dtype=object)
        frame.index.name = "predicted"
        return frame


class ConfusionMatrix3(ConfusionMatrix):
    """SI / SD / AU matrix of the ratio classifier."""
    LABELS = RATIO_LABELS


class ConfusionMatrix2(ConfusionMatrix):
    """C / UC matrix of the difference baseline."""
    LABELS = DIFFERENCE_LABELS


MATRIX_BY_METHOD: Dict[str, Type[ConfusionMatrix]] = {
    "ratio":      ConfusionMatrix3,
    "difference": ConfusionMatrix2,
}


def _as_label(value: Union[ChangeLabel, str], alphabet: Sequence[ChangeLabel]) -> ChangeLabel:
    try:
        label = ChangeLabel(str(value).strip().upper())
    except ValueError:
        label = None
    if label is None or label not in alphabet:
        raise TruthLabelError.alphabet_mismatch([a.value for a in alphabet], [str(value)])
    return label


def confusion(pred: GridChangeMap, truth: TruthLabels) -> ConfusionMatrix:
    """Count predicted-vs-truth label pairs over every grid cell.

    Raises:
        TruthLabelError: A cell has no truth label, a truth key is outside the
            grid, or a truth label is outside the map's alphabet.
    """
    n = pred.n_segments
    missing = [(c.row, c.col) for c in pred.cells if (c.row, c.col) not in truth]
    if missing:
        raise TruthLabelError.missing_cells(missing)
    stray = sorted(k for k in truth if not (0 <= k[0] < n and 0 <= k[1] < n))
    if stray:
        raise TruthLabelError(f"Truth labels outside the {n}x{n} grid: {stray[:10]}")

    alphabet = pred.labels
    index = {label: i for i, label in enumerate(alphabet)}
    counts = np.zeros((len(alphabet), len(alphabet)), dtype=np.int64)
    for cell in pred.cells:
        actual = _as_label(truth[(cell.row, cell.col)], alphabet)
        counts[index[cell.label], index[actual]] += 1
    return MATRIX_BY_METHOD[pred.method](counts)


def t_sweep(
    mask_t1: BuildingMask,
    mask_t2: BuildingMask,
    truth: TruthLabels,
    cfg: ChangeConfig,
    t_values: Sequence[float],
) -> List[Tuple[float, float]]:
    """Overall accuracy of the ratio classifier for each T, in input order.

    Cell areas are counted once; every T relabels the same partition.

    Raises:
        ConfigError: Any T <= 1, or an empty list.
    """
    if not t_values:
        raise ConfigError("T sweep needs at least one threshold value")
    configs = [validated(ChangeConfig, {**cfg.model_dump(), "change_threshold": t}) for t in t_values]
    base = change_map(mask_t1, mask_t2, cfg)
    rows = []
    for t, cfg_t in zip(t_values, configs):
        oa = confusion(reclassify(base, cfg_t), truth).overall_accuracy
        logger.debug("T=%.3f OA=%.2f", t, oa)
        rows.append((float(t), oa))
    return rows


# ---------------------------------------------------------------------------
# Published confusion tables (three study areas, baseline and ratio method)
# ---------------------------------------------------------------------------

PUBLISHED_MATRICES: Dict[str, ConfusionMatrix] = {
    "qb-wuhan1-baseline": ConfusionMatrix2([[26, 6], [28, 84]]),
    "qb-wuhan1-ratio":    ConfusionMatrix3([[22, 2, 2], [0, 4, 2], [3, 3, 106]]),
    "qb-wuhan2-baseline": ConfusionMatrix2([[26, 3], [25, 90]]),
    "qb-wuhan2-ratio":    ConfusionMatrix3([[19, 0, 3], [0, 7, 0], [8, 4, 103]]),
    "gf2-ezhou-baseline": ConfusionMatrix2([[41, 21], [31, 307]]),
    "gf2-ezhou-ratio":    ConfusionMatrix3([[46, 0, 2], [0, 11, 3], [9, 4, 325]]),
}

# OA values printed next to the baseline tables.
PUBLISHED_OA: Dict[str, str] = {
    "qb-wuhan1-baseline": "76.39",
    "qb-wuhan2-baseline": "80.56",
    "gf2-ezhou-baseline": "87.00",
}
