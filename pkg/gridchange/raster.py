"""
Raster data model shared by every pipeline stage.

A ``RasterImage`` is a multi-band float raster stored band-planar
(``bands x height x width``). Single-band intermediates (enhanced image,
filtered images, differentials, spectral indices) are plain 2-D float64
numpy arrays; a ``FeatureMap`` is a single-band raster normalized to [0, 1].

All objects are immutable after construction: their arrays are marked
read-only so they can be shared across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionMismatchError, RasterError

# Band roles understood by the spectral stage. Other names are allowed.
KNOWN_BANDS = ("red", "green", "blue", "nir")


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def as_band(values: object) -> np.ndarray:
    """Coerce *values* to a finite 2-D float64 array.

    Raises:
        RasterError: If the input is not 2-D or holds NaN/Inf.
    """
    band = np.asarray(values, dtype=np.float64)
    if band.ndim != 2 or band.size == 0:
        raise RasterError(f"Expected a non-empty 2-D single-band raster, got shape {band.shape}")
    bad = int(np.count_nonzero(~np.isfinite(band)))
    if bad:
        raise RasterError.non_finite(bad)
    return band


@dataclass(frozen=True)
class RasterImage:
    """Multi-band float raster.

    Attributes:
        data:       float64 array of shape ``(bands, height, width)``.
        band_names: One name per band; ``red``, ``green``, ``blue`` and
                    ``nir`` carry meaning for the spectral stage.
        bit_depth:  Bit depth of the source imagery (8, 16, 32) when known.
                    Values are promoted to float on load regardless.
    """
    data:       np.ndarray
    band_names: Tuple[str, ...]
    bit_depth:  Optional[int] = None

    def __post_init__(self) -> None:
        data = np.array(self.data, dtype=np.float64, copy=True)
        if data.ndim == 2:
            data = data[np.newaxis, :, :]
        if data.ndim != 3 or 0 in data.shape:
            raise RasterError(
                f"Raster data must be (bands, height, width) with positive sizes, got {data.shape}"
            )
        names = tuple(str(n) for n in self.band_names)
        if len(names) != data.shape[0]:
            raise RasterError(
                f"{data.shape[0]} band(s) but {len(names)} band name(s)",
                suggestion="Give exactly one name per band",
            )
        bad = int(np.count_nonzero(~np.isfinite(data)))
        if bad:
            raise RasterError.non_finite(bad)
        object.__setattr__(self, "data", _frozen(data))
        object.__setattr__(self, "band_names", names)

    @classmethod
    def from_flat(
        cls,
        width: int,
        height: int,
        bands: int,
        band_names: Sequence[str],
        values: Sequence[float] | np.ndarray,
        bit_depth: Optional[int] = None,
    ) -> "RasterImage":
        """Build a raster from a flat band-planar, row-major buffer."""
        if width <= 0 or height <= 0 or bands <= 0:
            raise RasterError(f"Raster sizes must be positive, got {width}x{height}x{bands}")
        flat = np.asarray(values, dtype=np.float64).ravel()
        expected = width * height * bands
        if flat.size != expected:
            raise RasterError.bad_shape(expected, flat.size)
        return cls(flat.reshape(bands, height, width), tuple(band_names), bit_depth)

    @property
    def bands(self) -> int:
        return int(self.data.shape[0])

    @property
    def height(self) -> int:
        return int(self.data.shape[1])

    @property
    def width(self) -> int:
        return int(self.data.shape[2])

    @property
    def shape(self) -> Tuple[int, int]:
        """``(height, width)`` of every band."""
        return (self.height, self.width)

    def has_band(self, name: str) -> bool:
        return name in self.band_names

    def band(self, name: str) -> np.ndarray:
        """Return the band called *name* (read-only view).

        Raises:
            KeyError: If no band has that name. The spectral stage turns this
                into ``MissingBandError``.
        """
        return self.data[self.band_names.index(name)]

    def affine(self, scale: float, offset: float) -> "RasterImage":
        """Return ``scale * self + offset`` applied uniformly to all bands."""
        return RasterImage(self.data * scale + offset, self.band_names, self.bit_depth)


@dataclass(frozen=True)
class FeatureMap:
    """Single-band index image with every value in [0, 1] (MFBI or MBI)."""
    values: np.ndarray
    source: str = field(default="mfbi", compare=False)

    def __post_init__(self) -> None:
        values = np.array(as_band(self.values), copy=True)
        if values.min() < 0.0 or values.max() > 1.0:
            raise RasterError(
                f"Feature map values must lie in [0, 1], got [{values.min()}, {values.max()}]"
            )
        object.__setattr__(self, "values", _frozen(values))

    @property
    def height(self) -> int:
        return int(self.values.shape[0])

    @property
    def width(self) -> int:
        return int(self.values.shape[1])

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.height, self.width)


def require_same_shape(what: str, left: Tuple[int, ...], right: Tuple[int, ...]) -> None:
    """Raise ``DimensionMismatchError`` unless the two shapes agree."""
    if tuple(left) != tuple(right):
        raise DimensionMismatchError(what, tuple(left), tuple(right))


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def enhanced_image(img: RasterImage) -> np.ndarray:
    """Per-pixel maximum over all bands (buildings tend to be bright)."""
    if img.bands == 1:
        return np.array(img.data[0], copy=True)
    return img.data.max(axis=0)


def normalize_01(values: object, source: str = "mfbi") -> FeatureMap:
    """Global min-max rescale of a single-band raster into [0, 1].

    A constant raster carries no building evidence and maps to all zeros.
    """
    band = as_band(values)
    lo = float(band.min())
    hi = float(band.max())
    if hi == lo:
        return FeatureMap(np.zeros_like(band), source=source)
    return FeatureMap((band - lo) / (hi - lo), source=source)
