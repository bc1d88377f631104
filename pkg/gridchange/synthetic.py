"""
Seeded synthetic imagery.

``bench_raster`` builds the benchmark input: integer uniform noise plus
randomly placed bright rectangles. ``bitemporal_scene`` builds a registered
image pair with buildings added, removed or kept inside chosen grid cells,
along with the per-cell truth labels. ``jittered_masks`` skips the imagery and
produces building masks directly, with unchanged cells whose areas wobble by
a fixed fraction between the two dates.

Every generator is deterministic for a given seed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from .changegrid import ChangeLabel, partition
from .errors import ConfigError
from .raster import KNOWN_BANDS, RasterImage
from .spectral import BuildingMask

logger = logging.getLogger(__name__)

Cell = Tuple[int, int]


def band_names(bands: int) -> Tuple[str, ...]:
    """``red, green, blue, nir`` first, then ``band5, band6, ...``."""
    return tuple(KNOWN_BANDS[i] if i < len(KNOWN_BANDS) else f"band{i + 1}" for i in range(bands))


def bench_raster(
    width: int,
    height: int,
    bands: int = 4,
    *,
    seed: int = 0,
    noise: int = 30,
    rectangles: int | None = None,
) -> RasterImage:
    """8-bit sourced benchmark raster: noise 0..noise plus bright rectangles.

    Rectangles are 6 to 30 pixels a side with levels 150..255, one per
    ~10000 pixels unless *rectangles* is given.
    """
    if width <= 0 or height <= 0 or bands <= 0:
        raise ConfigError(f"Benchmark raster sizes must be positive, got {width}x{height}x{bands}")
    rng = np.random.default_rng(seed)
    data = rng.integers(0, noise + 1, size=(bands, height, width)).astype(np.float64)
    count = rectangles if rectangles is not None else max(1, width * height // 10000)
    for _ in range(count):
        h, w = (int(v) for v in rng.integers(6, 31, size=2))
        y = int(rng.integers(0, max(1, height - h)))
        x = int(rng.integers(0, max(1, width - w)))
        data[:, y:y + h, x:x + w] = rng.integers(150, 256, size=(bands, 1, 1))
    return RasterImage(data, band_names(bands), bit_depth=8)


@dataclass(frozen=True)
class SyntheticScene:
    """Registered image pair with the truth label of every grid cell."""
    t1:         RasterImage
    t2:         RasterImage
    truth:      Dict[Cell, ChangeLabel]
    n_segments: int

    def planted(self, label: ChangeLabel) -> List[Cell]:
        return sorted(cell for cell, value in self.truth.items() if value is label)


def _paint_building(data: np.ndarray, y: int, x: int, size: int, brightness: int) -> None:
    # visible bands at full level, NIR slightly lower: NDVI and NDWI near 0
    data[:3, y:y + size, x:x + size] = brightness
    data[3, y:y + size, x:x + size] = round(0.9 * brightness)


def _paint_vegetation(data: np.ndarray, y0: int, y1: int, x0: int, x1: int) -> None:
    data[0, y0:y1, x0:x1] = 40
    data[1, y0:y1, x0:x1] = 60
    data[2, y0:y1, x0:x1] = 40
    data[3, y0:y1, x0:x1] = 200


def _paint_water(data: np.ndarray, y0: int, y1: int, x0: int, x1: int) -> None:
    data[0, y0:y1, x0:x1] = 30
    data[1, y0:y1, x0:x1] = 60
    data[2, y0:y1, x0:x1] = 50
    data[3, y0:y1, x0:x1] = 5


def bitemporal_scene(
    size: int = 512,
    n_segments: int = 8,
    *,
    seed: int = 0,
    added: int = 4,
    removed: int = 4,
    unchanged: int = 16,
    vegetation: int = 0,
    water: int = 0,
    block: int = 10,
    brightness: int = 200,
    noise: int = 30,
    margin: int = 12,
) -> SyntheticScene:
    """Square 4-band bitemporal scene with planted building changes.

    Cells are drawn at random for each role: ``added`` cells get a building
    at T2 only (SI), ``removed`` at T1 only (SD), ``unchanged`` the same
    building on both dates (AU). ``vegetation`` and ``water`` cells carry a
    bright-NIR or dark patch on both dates (AU); all other cells hold noise
    only (AU). Buildings sit at least *margin* pixels inside their cell.
    """
    rects = partition(size, size, n_segments)
    cell_side = size // n_segments
    if cell_side - 2 * margin < block:
        raise ConfigError(
            f"A {block}px building with a {margin}px margin does not fit a {cell_side}px cell",
            suggestion="Use fewer segments, a smaller block or a smaller margin",
        )
    roles = added + removed + unchanged + vegetation + water
    if roles > n_segments * n_segments:
        raise ConfigError(f"{roles} planted cells exceed the {n_segments}x{n_segments} grid")

    rng = np.random.default_rng(seed)
    t1 = rng.integers(0, noise + 1, size=(4, size, size)).astype(np.float64)
    t2 = rng.integers(0, noise + 1, size=(4, size, size)).astype(np.float64)
    order = [int(i) for i in rng.permutation(n_segments * n_segments)]

    truth = {(r, c): ChangeLabel.AU for r in range(n_segments) for c in range(n_segments)}
    plan = (
        ["added"] * added + ["removed"] * removed + ["unchanged"] * unchanged
        + ["vegetation"] * vegetation + ["water"] * water
    )
    for role, index in zip(plan, order):
        x0, y0, x1, y1 = rects[index]
        cell = (index // n_segments, index % n_segments)
        y = int(rng.integers(y0 + margin, y1 - margin - block + 1))
        x = int(rng.integers(x0 + margin, x1 - margin - block + 1))
        if role == "added":
            _paint_building(t2, y, x, block, brightness)
            truth[cell] = ChangeLabel.SI
        elif role == "removed":
            _paint_building(t1, y, x, block, brightness)
            truth[cell] = ChangeLabel.SD
        elif role == "unchanged":
            _paint_building(t1, y, x, block, brightness)
            _paint_building(t2, y, x, block, brightness)
        elif role == "vegetation":
            for data in (t1, t2):
                _paint_vegetation(data, y, y + block, x, x + block)
        else:
            for data in (t1, t2):
                _paint_water(data, y0 + margin, y1 - margin, x0 + margin, x1 - margin)

    names = band_names(4)
    logger.debug("synthetic scene %dx%d N=%d seed=%d: %d SI, %d SD", size, size, n_segments, seed, added, removed)
    return SyntheticScene(
        RasterImage(t1, names, bit_depth=8),
        RasterImage(t2, names, bit_depth=8),
        truth,
        n_segments,
    )


def _fill(bits: np.ndarray, rect: Tuple[int, int, int, int], area: int) -> None:
    x0, y0, x1, y1 = rect
    view = bits[y0:y1, x0:x1].reshape(-1)
    view[:area] = True
    bits[y0:y1, x0:x1] = view.reshape(y1 - y0, x1 - x0)


def jittered_masks(
    size: int = 320,
    n_segments: int = 8,
    *,
    base_area: int = 100,
    jitter: float = 0.6,
    changed_area: int = 200,
) -> Tuple[BuildingMask, BuildingMask, Dict[Cell, ChangeLabel]]:
    """Building masks whose unchanged cells differ in area by ``±jitter``.

    Unchanged cells alternate between ``base_area * (1 + jitter)`` and
    ``base_area * (1 - jitter)`` at T2. The first row holds increased cells
    (empty at T1) and the last row decreased cells (empty at T2).
    """
    rects = partition(size, size, n_segments)
    bits1 = np.zeros((size, size), dtype=bool)
    bits2 = np.zeros((size, size), dtype=bool)
    truth: Dict[Cell, ChangeLabel] = {}
    for index, rect in enumerate(rects):
        row, col = divmod(index, n_segments)
        if row == 0:
            _fill(bits2, rect, changed_area)
            truth[(row, col)] = ChangeLabel.SI
        elif row == n_segments - 1:
            _fill(bits1, rect, changed_area)
            truth[(row, col)] = ChangeLabel.SD
        else:
            factor = 1 + jitter if index % 2 == 0 else 1 - jitter
            _fill(bits1, rect, base_area)
            _fill(bits2, rect, int(round(base_area * factor)))
            truth[(row, col)] = ChangeLabel.AU
    return BuildingMask(bits1), BuildingMask(bits2), truth
