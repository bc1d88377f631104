"""
Grid-partition change patterns.

Both temporal building masks are cut into the same N x N grid. In every cell
the building areas A1 (time T1) and A2 (time T2) are counted and the cell is
labelled:

    SI  significantly increased       A2 / A1 > T
    SD  significantly decreased       A2 / A1 < 1 / T
    AU  approximately unchanged       otherwise (ratio equal to T or 1/T included)

Cells whose areas sit at or below the noise floor are handled without a
ratio: both at or below it -> AU, only A1 at or below it -> SI, only A2 -> SD.

The difference baseline labels a cell changed (C) when |A2 - A1| exceeds a
pixel-count threshold and unchanged (UC) otherwise.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterator, List, Literal, Optional, Tuple

import numpy as np

from .config import ChangeConfig
from .errors import ConfigError, RasterError
from .raster import require_same_shape
from .spectral import BuildingMask

logger = logging.getLogger(__name__)

Rect = Tuple[int, int, int, int]
Method = Literal["ratio", "difference"]


class ChangeLabel(str, Enum):
    """Cell labels of the ratio classifier and of the difference baseline."""
    SI = "SI"
    SD = "SD"
    AU = "AU"
    C  = "C"
    UC = "UC"

    def __str__(self) -> str:
        return self.value


RATIO_LABELS: Tuple[ChangeLabel, ...] = (ChangeLabel.SI, ChangeLabel.SD, ChangeLabel.AU)
DIFFERENCE_LABELS: Tuple[ChangeLabel, ...] = (ChangeLabel.C, ChangeLabel.UC)

LABELS_BY_METHOD: Dict[str, Tuple[ChangeLabel, ...]] = {
    "ratio":      RATIO_LABELS,
    "difference": DIFFERENCE_LABELS,
}


@dataclass(frozen=True)
class GridCell:
    """One grid cell with its half-open pixel bounds ``(x0, y0, x1, y1)``."""
    row:        int
    col:        int
    pixel_rect: Rect
    a1:         int
    a2:         int
    label:      ChangeLabel

    @property
    def area(self) -> int:
        x0, y0, x1, y1 = self.pixel_rect
        return (x1 - x0) * (y1 - y0)


@dataclass(frozen=True)
class GridChangeMap:
    """N x N labelled cells tiling a ``width x height`` image, row-major."""
    width:  int
    height: int
    config: ChangeConfig
    cells:  Tuple[GridCell, ...]
    method: Method = "ratio"

    def __post_init__(self) -> None:
        object.__setattr__(self, "cells", tuple(self.cells))
        n = self.config.n_segments
        if len(self.cells) != n * n:
            raise RasterError(f"Change map needs {n * n} cells, got {len(self.cells)}")
        try:
            expected = partition(self.width, self.height, n)
        except ConfigError as exc:
            raise RasterError(f"No {n}x{n} grid over {self.width}x{self.height}: {exc.message}") from exc
        for i, c in enumerate(self.cells):
            if (c.row, c.col) != divmod(i, n) or tuple(c.pixel_rect) != expected[i]:
                raise RasterError(
                    f"Cell {i} is ({c.row},{c.col}) {tuple(c.pixel_rect)}, "
                    f"grid expects {divmod(i, n)} {expected[i]}"
                )
        alphabet = set(LABELS_BY_METHOD[self.method])
        stray = {c.label for c in self.cells} - alphabet
        if stray:
            raise RasterError(f"Labels {sorted(str(s) for s in stray)} do not belong to method '{self.method}'")

    @property
    def n_segments(self) -> int:
        return self.config.n_segments

    @property
    def labels(self) -> Tuple[ChangeLabel, ...]:
        """Label alphabet of this map's method."""
        return LABELS_BY_METHOD[self.method]

    def __iter__(self) -> Iterator[GridCell]:
        return iter(self.cells)

    def cell(self, row: int, col: int) -> GridCell:
        return self.cells[row * self.n_segments + col]

    def label_grid(self) -> np.ndarray:
        """``N x N`` array of label strings."""
        n = self.n_segments
        return np.array([c.label.value for c in self.cells], dtype=object).reshape(n, n)

    def counts(self) -> Dict[ChangeLabel, int]:
        """How many cells carry each label of the alphabet."""
        tally = {label: 0 for label in self.labels}
        for c in self.cells:
            tally[c.label] += 1
        return tally


# ---------------------------------------------------------------------------
# Partition
# ---------------------------------------------------------------------------

def segments(extent: int, n: int) -> List[Tuple[int, int]]:
    """Split ``[0, extent)`` into *n* contiguous runs; remainder goes to the last runs."""
    base, rem = divmod(extent, n)
    bounds = []
    start = 0
    for i in range(n):
        size = base + (1 if i >= n - rem else 0)
        bounds.append((start, start + size))
        start += size
    return bounds


def partition(width: int, height: int, n: int) -> List[Rect]:
    """N x N half-open rects ``(x0, y0, x1, y1)`` in row-major order.

    Raises:
        ConfigError: ``n < 1`` or ``n`` larger than either image side.
    """
    if n < 1:
        raise ConfigError(f"Grid needs n_segments >= 1, got {n}")
    if n > min(width, height):
        raise ConfigError(
            f"n_segments={n} exceeds image extent {width}x{height}",
            suggestion="Use at most one segment per pixel along each axis",
        )
    rows = segments(height, n)
    cols = segments(width, n)
    return [(x0, y0, x1, y1) for y0, y1 in rows for x0, x1 in cols]


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------

def classify_cell(
    a1: float,
    a2: float,
    cfg: ChangeConfig,
    cell_area: Optional[int] = None,
) -> ChangeLabel:
    """Ratio rule for one cell.

    Comparisons run on exact rationals (``A2 > T * A1`` rather than a float
    division), so the rule is exactly scale invariant and antisymmetric.
    """
    if a1 < 0 or a2 < 0:
        raise ConfigError(f"Building areas must be non-negative, got a1={a1}, a2={a2}")
    floor = cfg.area_floor(cell_area)
    low1, low2 = a1 <= floor, a2 <= floor
    if low1 and low2:
        return ChangeLabel.AU
    if low1:
        return ChangeLabel.SI
    if low2:
        return ChangeLabel.SD

    t = Fraction(cfg.change_threshold)
    f1, f2 = Fraction(a1), Fraction(a2)
    if f2 > t * f1:
        return ChangeLabel.SI
    if f1 > t * f2:
        return ChangeLabel.SD
    return ChangeLabel.AU


def _require_diff_threshold(cfg: ChangeConfig) -> float:
    if cfg.diff_threshold is None:
        raise ConfigError(
            "The difference baseline needs diff_threshold",
            suggestion="Pass --diff-threshold (pixels)",
        )
    return float(cfg.diff_threshold)


def classify_cell_difference(a1: float, a2: float, cfg: ChangeConfig) -> ChangeLabel:
    """Difference rule: C when ``|A2 - A1| > diff_threshold``."""
    threshold = _require_diff_threshold(cfg)
    return ChangeLabel.C if abs(a2 - a1) > threshold else ChangeLabel.UC


def _cell_areas(mask_t1: BuildingMask, mask_t2: BuildingMask, cfg: ChangeConfig) -> List[Tuple[Rect, int, int]]:
    require_same_shape("building masks", mask_t1.shape, mask_t2.shape)
    rects = partition(mask_t1.width, mask_t1.height, cfg.n_segments)
    areas = []
    for rect in rects:
        x0, y0, x1, y1 = rect
        a1 = int(np.count_nonzero(mask_t1.bits[y0:y1, x0:x1]))
        a2 = int(np.count_nonzero(mask_t2.bits[y0:y1, x0:x1]))
        areas.append((rect, a1, a2))
    return areas


def _assemble(
    width: int,
    height: int,
    cfg: ChangeConfig,
    areas: List[Tuple[Rect, int, int]],
    method: Method,
) -> GridChangeMap:
    n = cfg.n_segments
    cells = []
    for idx, (rect, a1, a2) in enumerate(areas):
        x0, y0, x1, y1 = rect
        if method == "ratio":
            label = classify_cell(a1, a2, cfg, (x1 - x0) * (y1 - y0))
        else:
            label = classify_cell_difference(a1, a2, cfg)
        cells.append(GridCell(idx // n, idx % n, rect, a1, a2, label))
    result = GridChangeMap(width, height, cfg, tuple(cells), method)
    logger.debug("%s change map N=%d: %s", method, n, {str(k): v for k, v in result.counts().items()})
    return result


def change_map(mask_t1: BuildingMask, mask_t2: BuildingMask, cfg: ChangeConfig) -> GridChangeMap:
    """Label every grid cell SI / SD / AU from the two building masks."""
    areas = _cell_areas(mask_t1, mask_t2, cfg)
    return _assemble(mask_t1.width, mask_t1.height, cfg, areas, "ratio")


def change_map_diff_baseline(mask_t1: BuildingMask, mask_t2: BuildingMask, cfg: ChangeConfig) -> GridChangeMap:
    """Label every grid cell C / UC by the building pixel-count difference."""
    _require_diff_threshold(cfg)
    areas = _cell_areas(mask_t1, mask_t2, cfg)
    return _assemble(mask_t1.width, mask_t1.height, cfg, areas, "difference")


def reclassify(gcm: GridChangeMap, cfg: ChangeConfig, method: Optional[Method] = None) -> GridChangeMap:
    """Relabel an existing map's cell areas under *cfg* (same partition)."""
    if cfg.n_segments != gcm.n_segments:
        raise ConfigError(
            f"Cannot reclassify a N={gcm.n_segments} map with n_segments={cfg.n_segments}"
        )
    areas = [(c.pixel_rect, c.a1, c.a2) for c in gcm.cells]
    return _assemble(gcm.width, gcm.height, cfg, areas, method or gcm.method)
