"""
Multi-scale median filtering and the MFBI building index.

Pipeline per temporal image::

    enhanced image -> median filter at windows w_0 < w_1 < ... -> differentials
    D_i = max(0, F_i - F_{i+1}) -> mean -> min-max normalization = MFBI

Window convention: for window ``w`` the neighbourhood of pixel ``x`` spans
``[x - (w - 1) // 2, x + w // 2]`` on both axes, borders are handled by edge
replication, and the median of an even count is the lower middle value, so
every output value is an input value (an order statistic).
"""

from __future__ import annotations

import logging
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .config import ScaleProfile
from .errors import ConfigError, DimensionMismatchError, WindowTooLargeError
from .kernels import histogram_median, sorted_window_median
from .raster import FeatureMap, RasterImage, as_band, enhanced_image, normalize_01

logger = logging.getLogger(__name__)

# Histogram fast path limit: inputs with at most this many distinct values
# (every 8/16-bit sourced image) are filtered through integer codes.
MAX_HISTOGRAM_BINS = 65536

MedianFn = Callable[[np.ndarray, int], np.ndarray]


def _padding(window: int) -> Tuple[Tuple[int, int], Tuple[int, int]]:
    before, after = (window - 1) // 2, window // 2
    return ((before, after), (before, after))


def _check_window(band: np.ndarray, window: int) -> None:
    if window < 1:
        raise ConfigError(f"Median window must be >= 1, got {window}")
    height, width = band.shape
    if window > min(height, width):
        raise WindowTooLargeError(window, width, height)


def _encode(band: np.ndarray) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """Map pixel values to dense integer codes plus a code -> value table.

    Integer-valued data in [0, 65535] is its own code. Other data is ranked
    through its distinct values as long as there are few enough of them.
    Returns ``None`` when the histogram path cannot represent the input.
    """
    lo, hi = float(band.min()), float(band.max())
    if lo >= 0.0 and hi < MAX_HISTOGRAM_BINS and np.array_equal(band, np.floor(band)):
        codes = band.astype(np.int32)
        return codes, np.arange(int(hi) + 1, dtype=np.float64)
    uniq, inverse = np.unique(band, return_inverse=True)
    if uniq.size <= MAX_HISTOGRAM_BINS:
        return inverse.reshape(band.shape).astype(np.int32), uniq
    return None


def median_filter(band: object, window: int) -> np.ndarray:
    """Median filter a single-band raster with a ``window x window`` box.

    Uses the column-histogram kernel when the input maps onto at most
    65536 histogram bins, and the exact sorted-window kernel otherwise. Both
    agree bit for bit with ``median_filter_reference``.

    Raises:
        WindowTooLargeError: If *window* exceeds the smaller image side.
    """
    data = as_band(band)
    _check_window(data, window)
    if window == 1:
        return data.copy()

    encoded = _encode(data)
    if encoded is not None:
        codes, table = encoded
        logger.debug("median window=%d: histogram path, %d bins", window, table.size)
        padded = np.pad(codes, _padding(window), mode="edge")
        return table[histogram_median(padded, window, table.size)]

    logger.debug("median window=%d: sorted-window fallback", window)
    padded = np.pad(data, _padding(window), mode="edge")
    return sorted_window_median(padded, window)


def median_filter_reference(band: object, window: int) -> np.ndarray:
    """Brute-force median: sort every neighbourhood and take the lower middle."""
    data = as_band(band)
    _check_window(data, window)
    height, width = data.shape
    padded = np.pad(data, _padding(window), mode="edge")
    blocks = sliding_window_view(padded, (window, window)).reshape(height, width, window * window)
    return np.sort(blocks, axis=-1)[..., (window * window - 1) // 2]


def filter_profile(
    band: object,
    profile: ScaleProfile = ScaleProfile(),
    *,
    median: MedianFn = median_filter,
) -> List[np.ndarray]:
    """Median-filter *band* at every window of *profile*, smallest first."""
    data = as_band(band)
    windows = profile.windows
    _check_window(data, max(windows))
    return [median(data, w) for w in windows]


def differential_images(profile_outputs: Sequence[np.ndarray]) -> List[np.ndarray]:
    """Successive-scale differences ``max(0, F_i - F_{i+1})``.

    Bright compact structures survive the small windows and vanish at the
    large ones, so the smaller-minus-larger difference is positive on them;
    dark-structure responses are clipped to zero.
    """
    if len(profile_outputs) < 2:
        raise ConfigError(
            f"Differential images need at least two filtered rasters, got {len(profile_outputs)}"
        )
    layers = [as_band(f) for f in profile_outputs]
    for i, layer in enumerate(layers[1:], start=1):
        if layer.shape != layers[0].shape:
            raise DimensionMismatchError(f"filtered rasters 0 and {i}", layers[0].shape, layer.shape)
    return [np.maximum(0.0, fine - coarse) for fine, coarse in zip(layers, layers[1:])]


def mfbi(
    img: RasterImage,
    profile: ScaleProfile = ScaleProfile(),
    *,
    median: MedianFn = median_filter,
) -> FeatureMap:
    """Multi-scale filtering building index of one temporal image."""
    if profile.num_scales < 2:
        raise ConfigError("MFBI needs a profile with at least two scales")
    enhanced = enhanced_image(img)
    logger.debug("mfbi: %dx%d, windows %s", img.width, img.height, profile.windows)
    diffs = differential_images(filter_profile(enhanced, profile, median=median))
    return normalize_01(np.mean(np.stack(diffs), axis=0), source="mfbi")
