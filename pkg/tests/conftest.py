"""Shared fixtures for the gridchange test suite."""

import logging

import numpy as np
import pytest

from gridchange.raster import RasterImage
from gridchange.spectral import BuildingMask

FOUR_BANDS = ("red", "green", "blue", "nir")


def four_band(brightness: np.ndarray, nir_factor: float = 0.9) -> RasterImage:
    """Grey scene in the visible bands with NIR at *nir_factor* of it (NDVI, NDWI near 0)."""
    visible = np.asarray(brightness, dtype=np.float64)
    return RasterImage(
        np.stack([visible, visible, visible, np.round(visible * nir_factor)]),
        FOUR_BANDS,
        bit_depth=8,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def block_band():
    """64x64 zeros with an 8x8 block of 100 at rows/cols 28..35."""
    band = np.zeros((64, 64))
    band[28:36, 28:36] = 100.0
    return band


@pytest.fixture
def line_block_band():
    """3px wide horizontal line (rows 10..12, cols 4..59) plus an 8x8 block (rows 40..47, cols 28..35)."""
    band = np.zeros((64, 64))
    band[10:13, 4:60] = 120.0
    band[40:48, 28:36] = 120.0
    return band


@pytest.fixture
def block_raster(block_band):
    return four_band(block_band + 10.0)


def mask_with(shape, *rects):
    """Building mask with ``True`` inside each ``(y0, y1, x0, x1)`` rectangle."""
    bits = np.zeros(shape, dtype=bool)
    for y0, y1, x0, x1 in rects:
        bits[y0:y1, x0:x1] = True
    return BuildingMask(bits)


@pytest.fixture(autouse=True)
def _reset_package_logger():
    """Drop the CLI's stderr handler so it never outlives the test that installed it."""
    yield
    pkg = logging.getLogger("gridchange")
    pkg.handlers.clear()
    pkg.setLevel(logging.NOTSET)
