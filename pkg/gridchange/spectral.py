"""
Building mask extraction: Otsu segmentation of a feature map followed by
NDVI / NDWI false-alarm removal.

Otsu works on a fixed-bin histogram of the [0, 1] feature map. Candidate
thresholds are the inner bin edges ``k / bins``; class statistics are
accumulated in exact integer arithmetic, so ties resolve deterministically to
the lowest edge.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple

import numpy as np

from .config import MaskParams
from .errors import DegenerateHistogramError, MissingBandError, RasterError
from .raster import FeatureMap, RasterImage, as_band, require_same_shape

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BuildingMask:
    """Binary building map of one temporal (``True`` = building).

    Attributes:
        bits:      bool array of shape ``(height, width)``.
        threshold: Otsu threshold actually applied, ``None`` when the
                   histogram was degenerate and the mask is empty.
        applied:   Names of the tests that shaped the mask.
    """
    bits:      np.ndarray
    threshold: Optional[float] = None
    applied:   Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        bits = np.array(self.bits, dtype=bool, copy=True)
        if bits.ndim != 2 or bits.size == 0:
            raise RasterError(f"Building mask must be a non-empty 2-D array, got shape {bits.shape}")
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "applied", tuple(self.applied))

    @property
    def height(self) -> int:
        return int(self.bits.shape[0])

    @property
    def width(self) -> int:
        return int(self.bits.shape[1])

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.height, self.width)

    @property
    def count(self) -> int:
        """Number of building pixels."""
        return int(np.count_nonzero(self.bits))


# ---------------------------------------------------------------------------
# Otsu
# ---------------------------------------------------------------------------

def _int_counts(counts: Sequence[int] | np.ndarray) -> list[int]:
    values = [int(c) for c in np.asarray(counts).ravel()]
    if len(values) < 2:
        raise RasterError(f"Otsu needs at least 2 histogram bins, got {len(values)}")
    if any(c < 0 for c in values):
        raise RasterError("Histogram counts must be non-negative")
    occupied = sum(1 for c in values if c)
    if occupied < 2:
        raise DegenerateHistogramError(occupied)
    return values


def otsu_split(counts: Sequence[int] | np.ndarray) -> int:
    """Index ``k`` of the best split: class 0 = bins ``[0, k)``, class 1 = ``[k, bins)``.

    Maximizes the between-class variance, which for integer counts is
    proportional to ``(S0 * N - S * n0)**2 / (n0 * n1)``; candidates are
    compared by cross-multiplication so no rounding enters the argmax.

    Raises:
        DegenerateHistogramError: Fewer than two occupied bins.
    """
    hist = _int_counts(counts)
    total = sum(hist)
    weighted = sum(i * c for i, c in enumerate(hist))

    best_k, best_num, best_den = 0, 0, 1
    n0 = s0 = 0
    for k in range(1, len(hist)):
        n0 += hist[k - 1]
        s0 += (k - 1) * hist[k - 1]
        n1 = total - n0
        if n0 == 0 or n1 == 0:
            continue
        num = (s0 * total - weighted * n0) ** 2
        den = n0 * n1
        if best_k == 0 or num * best_den > best_num * den:
            best_k, best_num, best_den = k, num, den
    return best_k


def otsu_split_reference(counts: Sequence[int] | np.ndarray) -> int:
    """Exhaustive search with textbook class weights and means (exact rationals)."""
    hist = _int_counts(counts)
    total = sum(hist)
    weighted = [i * c for i, c in enumerate(hist)]

    best_k, best_var = 0, Fraction(-1)
    for k in range(1, len(hist)):
        n0 = sum(hist[:k])
        n1 = total - n0
        if n0 == 0 or n1 == 0:
            continue
        mu0 = Fraction(sum(weighted[:k]), n0)
        mu1 = Fraction(sum(weighted[k:]), n1)
        var = Fraction(n0, total) * Fraction(n1, total) * (mu0 - mu1) ** 2
        if var > best_var:
            best_k, best_var = k, var
    return best_k


def bin_edges(bins: int) -> np.ndarray:
    """Inner edges ``k / bins`` for ``k = 1 .. bins - 1``, the candidate thresholds."""
    return np.arange(1, bins) / bins


def feature_histogram(values: FeatureMap | np.ndarray, bins: int) -> np.ndarray:
    """Counts of *values* in ``bins`` equal bins over [0, 1].

    A value lands in bin ``k`` when it is ``>= k / bins`` and below the next
    edge, compared as the same floats ``otsu_threshold`` returns. Class 1 of a
    split at ``k`` is therefore exactly the pixels with ``value >= k / bins``.
    """
    data = values.values if isinstance(values, FeatureMap) else as_band(values)
    index = np.searchsorted(bin_edges(bins), data.ravel(), side="right")
    return np.bincount(index, minlength=bins)


def otsu_threshold(values: FeatureMap | np.ndarray, bins: int = 256) -> float:
    """Otsu threshold of a feature map, as the bin edge ``k / bins``.

    Raises:
        DegenerateHistogramError: Constant input (single occupied bin).
    """
    k = otsu_split(feature_histogram(values, bins))
    return float(bin_edges(bins)[k - 1])


# ---------------------------------------------------------------------------
# Spectral indices
# ---------------------------------------------------------------------------

def _band(img: RasterImage, name: str) -> np.ndarray:
    if not img.has_band(name):
        raise MissingBandError(name, img.band_names)
    return img.band(name)


def normalized_difference(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``(a - b) / (a + b)``, 0 where the denominator is 0."""
    num = a - b
    den = a + b
    return np.divide(num, den, out=np.zeros_like(num), where=den != 0)


def ndvi(img: RasterImage) -> np.ndarray:
    """Normalized difference vegetation index ``(NIR - Red) / (NIR + Red)``."""
    return normalized_difference(_band(img, "nir"), _band(img, "red"))


def ndwi(img: RasterImage) -> np.ndarray:
    """Normalized difference water index ``(Green - NIR) / (Green + NIR)``."""
    return normalized_difference(_band(img, "green"), _band(img, "nir"))


def building_mask(
    fm: FeatureMap,
    img: RasterImage,
    params: MaskParams = MaskParams(),
    *,
    threshold: Optional[float] = None,
) -> BuildingMask:
    """Segment buildings from *fm* and drop vegetation / water pixels.

    ``mask = (fm >= otsu) & (ndvi < ndvi_threshold) & (ndwi < ndwi_threshold)``.
    A spectral test whose bands are missing is skipped with a warning. Pass
    *threshold* to hold the segmentation threshold fixed instead of running
    Otsu.
    """
    require_same_shape("feature map and raster", fm.shape, img.shape)

    if threshold is None:
        try:
            threshold = otsu_threshold(fm, params.histogram_bins)
        except DegenerateHistogramError as exc:
            logger.warning("%s; building mask is empty", exc.message)
            return BuildingMask(np.zeros(fm.shape, dtype=bool), None, ())
    logger.debug("building mask: threshold %.6f", threshold)

    bits = fm.values >= threshold
    applied = ["otsu"]
    if img.has_band("nir") and img.has_band("red"):
        bits &= ndvi(img) < params.ndvi_threshold
        applied.append("ndvi")
    else:
        logger.warning("NDVI test skipped: raster lacks a 'nir' or 'red' band")
    if img.has_band("green") and img.has_band("nir"):
        bits &= ndwi(img) < params.ndwi_threshold
        applied.append("ndwi")
    else:
        logger.warning("NDWI test skipped: raster lacks a 'green' or 'nir' band")

    return BuildingMask(bits, float(threshold), tuple(applied))
