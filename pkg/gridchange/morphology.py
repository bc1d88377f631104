"""
Morphological Building Index (MBI) baseline.

White top-hats by linear structuring elements at several lengths and four
directions. For each length the directional mean of the top-hats forms a
feature image; the absolute differences of consecutive feature images are
averaged and normalized to [0, 1].

Morphology works on the bounded image domain: structuring element points
that fall outside the image are ignored (erosion pads with +inf, dilation
with -inf). Erosion and its adjoint dilation then compose into a true
opening: increasing, idempotent and never above the input.
"""

from __future__ import annotations

import logging
from typing import List, Optional, Tuple

import numpy as np

from .config import MBI_DIRECTIONS, MbiParams
from .errors import ConfigError, WindowTooLargeError
from .raster import FeatureMap, RasterImage, as_band, enhanced_image, normalize_01

logger = logging.getLogger(__name__)

# Unit step (dy, dx) per direction, image rows growing downwards. The 45 and
# 135 degree lines are exact diagonals, which is what Bresenham produces for
# those slopes.
DIRECTION_STEPS = {
    0:   (0, 1),
    45:  (-1, 1),
    90:  (1, 0),
    135: (-1, -1),
}


def line_offsets(length: int, direction: int) -> List[Tuple[int, int]]:
    """Pixel offsets of a linear structuring element centred on the origin.

    Offsets run ``k * step`` for ``k`` in ``[-(length - 1) // 2, length // 2]``,
    the same anchoring as the even median windows.
    """
    if direction not in DIRECTION_STEPS:
        raise ConfigError(f"Unsupported direction {direction}; use one of {MBI_DIRECTIONS}")
    if length < 1:
        raise ConfigError(f"Structuring element length must be >= 1, got {length}")
    dy, dx = DIRECTION_STEPS[direction]
    return [(k * dy, k * dx) for k in range(-((length - 1) // 2), length // 2 + 1)]


def _span(shape: Tuple[int, int], direction: int) -> int:
    height, width = shape
    if direction == 0:
        return width
    if direction == 90:
        return height
    return min(height, width)


def _check_length(shape: Tuple[int, int], length: int, direction: int) -> None:
    if length > _span(shape, direction):
        raise WindowTooLargeError(length, shape[1], shape[0])


def _overlap(shape: Tuple[int, int], oy: int, ox: int) -> Optional[Tuple[slice, slice, slice, slice]]:
    # (target rows, target cols, source rows, source cols) for a shift by (oy, ox)
    height, width = shape
    if abs(oy) >= height or abs(ox) >= width:
        return None
    return (
        slice(max(0, -oy), height - max(0, oy)),
        slice(max(0, -ox), width - max(0, ox)),
        slice(max(0, oy), height - max(0, -oy)),
        slice(max(0, ox), width - max(0, -ox)),
    )


def _reduce_shifted(band: np.ndarray, offsets: List[Tuple[int, int]], op: np.ufunc) -> np.ndarray:
    # out[p] = op over offsets o with p + o inside the image of band[p + o]
    out = band.copy()
    for oy, ox in offsets:
        if oy == 0 and ox == 0:
            continue
        region = _overlap(band.shape, oy, ox)
        if region is None:
            continue
        ty, tx, sy, sx = region
        op(out[ty, tx], band[sy, sx], out=out[ty, tx])
    return out


def erode_linear(band: np.ndarray, length: int, direction: int) -> np.ndarray:
    return _reduce_shifted(band, line_offsets(length, direction), np.minimum)


def dilate_linear(band: np.ndarray, length: int, direction: int) -> np.ndarray:
    reflected = [(-oy, -ox) for oy, ox in line_offsets(length, direction)]
    return _reduce_shifted(band, reflected, np.maximum)


def open_linear(band: object, length: int, direction: int) -> np.ndarray:
    """Opening (erosion then dilation) by a linear structuring element."""
    data = as_band(band)
    _check_length(data.shape, length, direction)
    return dilate_linear(erode_linear(data, length, direction), length, direction)


def line_opening_reference(band: object, length: int, direction: int) -> np.ndarray:
    """Pixel-by-pixel opening, written for clarity rather than speed."""
    data = as_band(band)
    _check_length(data.shape, length, direction)
    height, width = data.shape
    offsets = line_offsets(length, direction)

    eroded = np.empty_like(data)
    for y in range(height):
        for x in range(width):
            eroded[y, x] = min(
                data[y + oy, x + ox]
                for oy, ox in offsets
                if 0 <= y + oy < height and 0 <= x + ox < width
            )

    opened = np.empty_like(data)
    for y in range(height):
        for x in range(width):
            opened[y, x] = max(
                eroded[y - oy, x - ox]
                for oy, ox in offsets
                if 0 <= y - oy < height and 0 <= x - ox < width
            )
    return opened


def white_top_hat_linear(band: object, length: int, direction: int) -> np.ndarray:
    """``band - opening(band)``; non-negative everywhere."""
    data = as_band(band)
    return data - open_linear(data, length, direction)


def mbi(img: RasterImage, params: MbiParams = MbiParams()) -> FeatureMap:
    """Morphological building index of one temporal image."""
    brightness = enhanced_image(img)
    scales = params.scales
    for direction in params.angles:
        _check_length(brightness.shape, max(scales), direction)
    logger.debug("mbi: lengths %s, directions %s", scales, params.angles)

    features = [
        np.mean([white_top_hat_linear(brightness, s, d) for d in params.angles], axis=0)
        for s in scales
    ]
    diffs = [np.abs(nxt - cur) for cur, nxt in zip(features, features[1:])]
    return normalize_01(np.mean(np.stack(diffs), axis=0), source="mbi")
