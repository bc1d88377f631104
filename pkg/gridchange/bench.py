"""
MFBI vs MBI timing harness.

Times feature-map computation only: the synthetic raster is generated before
the clock starts and nothing is written inside the timed region. The JIT
kernels are compiled on a small warm-up raster first so compilation never
lands in a timed run.
"""

from __future__ import annotations

import logging
import statistics
import time
from dataclasses import dataclass, field
from typing import Callable, List, Tuple, TypeVar

import pandas as pd

from .config import MbiParams, ScaleProfile
from .errors import ConfigError
from .filters import mfbi
from .morphology import mbi
from .synthetic import bench_raster

logger = logging.getLogger(__name__)

T = TypeVar("T")

BENCH_COLUMNS = ["method", "run", "seconds"]


def timed(fn: Callable[[], T], clock: Callable[[], float] = time.perf_counter) -> Tuple[T, float]:
    """Run *fn* and return its result with the elapsed wall-clock seconds."""
    start = clock()
    result = fn()
    return result, clock() - start


@dataclass(frozen=True)
class BenchResult:
    """Per-run timings of both indices plus their medians."""
    width:       int
    height:      int
    bands:       int
    profile:     ScaleProfile
    mbi_params:  MbiParams
    runs:        Tuple[Tuple[str, int, float], ...] = field(default=())

    def seconds(self, method: str) -> List[float]:
        return [s for m, _, s in self.runs if m == method]

    @property
    def median_mfbi(self) -> float:
        return statistics.median(self.seconds("mfbi"))

    @property
    def median_mbi(self) -> float:
        return statistics.median(self.seconds("mbi"))

    @property
    def speedup(self) -> float:
        """``median(MBI) / median(MFBI)``."""
        return self.median_mbi / self.median_mfbi

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(m, r, f"{s:.6f}") for m, r, s in self.runs],
            columns=BENCH_COLUMNS,
        )

    def summary_lines(self) -> List[str]:
        return [
            f"median_mfbi_seconds={self.median_mfbi:.6f}",
            f"median_mbi_seconds={self.median_mbi:.6f}",
            f"speedup={self.speedup:.2f}",
            f"mfbi_windows={','.join(str(w) for w in self.profile.windows)}",
            f"mbi_lengths={','.join(str(s) for s in self.mbi_params.scales)} "
            f"mbi_directions={','.join(str(a) for a in self.mbi_params.angles)}",
        ]


def warm_up(profile: ScaleProfile = ScaleProfile()) -> None:
    """Compile the median kernels on a raster just large enough for *profile*."""
    side = max(profile.windows) + 8
    mfbi(bench_raster(side, side, 1, seed=0, rectangles=1), profile)


def run_benchmark(
    width: int,
    height: int,
    bands: int = 4,
    repetitions: int = 3,
    *,
    seed: int = 0,
    profile: ScaleProfile = ScaleProfile(),
    mbi_params: MbiParams = MbiParams(),
    clock: Callable[[], float] = time.perf_counter,
) -> BenchResult:
    """Time MFBI and MBI *repetitions* times each on one seeded raster.

    Raises:
        ConfigError: ``repetitions < 1`` or non-positive sizes.
    """
    if repetitions < 1:
        raise ConfigError(f"Benchmark needs repetitions >= 1, got {repetitions}")
    img = bench_raster(width, height, bands, seed=seed)
    warm_up(profile)

    runs: List[Tuple[str, int, float]] = []
    for run in range(repetitions):
        _, seconds = timed(lambda: mfbi(img, profile), clock)
        runs.append(("mfbi", run, seconds))
        logger.debug("mfbi run %d: %.3fs", run, seconds)
    for run in range(repetitions):
        _, seconds = timed(lambda: mbi(img, mbi_params), clock)
        runs.append(("mbi", run, seconds))
        logger.debug("mbi run %d: %.3fs", run, seconds)
    return BenchResult(width, height, bands, profile, mbi_params, tuple(runs))
