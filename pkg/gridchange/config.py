"""
Parameter models for every pipeline stage plus the resolved run config.

All models are frozen pydantic models; field constraints encode the
parameter invariants (T > 1, N >= 1, thresholds inside (-1, 1), ...).
``validated()`` turns pydantic's ``ValidationError`` into ``ConfigError`` so
callers only ever see gridchange errors.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, Literal, Mapping, Optional, Tuple, Type, TypeVar

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import ConfigError, RasterIOError

M = TypeVar("M", bound=BaseModel)

# Directions available to the MBI baseline, in the order they are enabled.
MBI_DIRECTIONS: Tuple[int, ...] = (0, 45, 90, 135)


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class ScaleProfile(_Frozen):
    """Median-filter windows ``initial_window * scale_factor**i``."""
    initial_window: int = Field(3, ge=1)
    scale_factor:   int = Field(2, ge=1)
    num_scales:     int = Field(4, ge=1)

    @property
    def windows(self) -> Tuple[int, ...]:
        return tuple(self.initial_window * self.scale_factor ** i for i in range(self.num_scales))


class MbiParams(_Frozen):
    """Linear structuring element lengths and directions for the MBI baseline.

    Lengths run ``scale_min, scale_min + scale_step, ...`` up to
    ``scale_max``; the defaults give 3, 8, 13, 18, 23 (five feature images,
    four differentials) to span the same 3..24 range as the MFBI profile.
    """
    directions: int = Field(4, ge=1, le=len(MBI_DIRECTIONS))
    scale_min:  int = Field(3, ge=1)
    scale_max:  int = Field(24, ge=1)
    scale_step: int = Field(5, ge=1)

    @model_validator(mode="after")
    def _check_range(self) -> "MbiParams":
        if self.scale_min > self.scale_max:
            raise ValueError(f"scale_min ({self.scale_min}) exceeds scale_max ({self.scale_max})")
        if len(self.scales) < 2:
            raise ValueError("scale range must yield at least two structuring element lengths")
        return self

    @property
    def scales(self) -> Tuple[int, ...]:
        return tuple(range(self.scale_min, self.scale_max + 1, self.scale_step))

    @property
    def angles(self) -> Tuple[int, ...]:
        return MBI_DIRECTIONS[: self.directions]


class MaskParams(_Frozen):
    """Otsu bins and the spectral false-alarm cutoffs.

    The NDVI/NDWI cutoffs are tunable defaults, not published values.
    """
    ndvi_threshold: float = Field(0.3, gt=-1.0, lt=1.0)
    ndwi_threshold: float = Field(0.3, gt=-1.0, lt=1.0)
    histogram_bins: int = Field(256, ge=2)


class ChangeConfig(_Frozen):
    """Grid partition and change-pattern thresholds.

    Attributes:
        n_segments:        Segments per image axis (N); the grid is N x N.
        change_threshold:  Ratio threshold T (> 1).
        min_area_floor:    Building pixels at or below which a cell area is
                           treated as empty. ``None`` means
                           ``min_area_fraction`` of the cell's pixel area.
        min_area_fraction: Fraction of cell area used when no explicit floor.
        diff_threshold:    Pixel-count threshold of the difference baseline;
                           required only by that classifier.
    """
    n_segments:        int = Field(14, ge=1)
    change_threshold:  float = Field(2.5, gt=1.0)
    min_area_floor:    Optional[float] = Field(None, ge=0.0)
    min_area_fraction: float = Field(0.005, ge=0.0, le=1.0)
    diff_threshold:    Optional[float] = Field(None, ge=0.0)

    def area_floor(self, cell_area: Optional[int] = None) -> float:
        """Resolve the noise floor for a cell of *cell_area* pixels."""
        if self.min_area_floor is not None:
            return float(self.min_area_floor)
        if cell_area is None:
            return 0.0
        return self.min_area_fraction * cell_area


class RunConfig(_Frozen):
    """Fully resolved configuration of one CLI run.

    Echoed into every metadata file so outputs can be reproduced.
    """
    index:   Literal["mfbi", "mbi"] = "mfbi"
    profile: ScaleProfile = ScaleProfile()
    mbi:     MbiParams = MbiParams()
    mask:    MaskParams = MaskParams()
    change:  ChangeConfig = ChangeConfig()
    paths:   Dict[str, str] = Field(default_factory=dict)

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        """Read a JSON config file."""
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise RasterIOError("read config", str(path), exc.strerror or str(exc)) from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"Config file '{path}' is not valid JSON: {exc.msg}") from exc
        return validated(cls, data)

    def merged(self, overrides: Mapping[str, Any]) -> "RunConfig":
        """Apply dotted-key overrides (``"change.n_segments"``); ``None`` is skipped."""
        data = self.model_dump()
        for key, value in overrides.items():
            if value is None:
                continue
            target = data
            *parents, leaf = key.split(".")
            for part in parents:
                if not isinstance(target.get(part), dict):
                    raise ConfigError(f"Unknown config section '{part}' in override '{key}'")
                target = target[part]
            if isinstance(value, Mapping) and isinstance(target.get(leaf), dict):
                target[leaf] = {**target[leaf], **value}
            else:
                target[leaf] = value
        return validated(RunConfig, data)

    def to_json(self) -> str:
        return self.model_dump_json(indent=2)


def validated(model: Type[M], data: Mapping[str, Any]) -> M:
    """Construct *model* from *data*, mapping validation errors to ``ConfigError``."""
    try:
        return model.model_validate(dict(data))
    except ValidationError as exc:
        raise ConfigError.from_validation(model.__name__, exc.errors()) from exc
