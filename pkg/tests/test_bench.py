"""
Tests for the MFBI vs MBI timing harness.
"""

import itertools
import os

import pytest

from gridchange.bench import BenchResult, run_benchmark, timed
from gridchange.config import MbiParams, ScaleProfile
from gridchange.errors import ConfigError
from gridchange.synthetic import bench_raster


def fake_clock(step=0.5):
    ticks = itertools.count()
    return lambda: next(ticks) * step


class TestHarness:
    """Run bookkeeping with a deterministic clock."""

    def test_timed(self):
        result, seconds = timed(lambda: 42, fake_clock(0.25))
        assert result == 42
        assert seconds == 0.25

    def test_runs_and_order(self):
        result = run_benchmark(48, 48, 1, 2, clock=fake_clock())
        assert [(m, r) for m, r, _ in result.runs] == [("mfbi", 0), ("mfbi", 1), ("mbi", 0), ("mbi", 1)]
        assert result.median_mfbi == result.median_mbi == 0.5
        assert result.speedup == 1.0

    def test_summary_lines(self):
        result = BenchResult(
            64, 64, 4, ScaleProfile(), MbiParams(),
            (("mfbi", 0, 1.0), ("mfbi", 1, 3.0), ("mbi", 0, 8.0), ("mbi", 1, 12.0)),
        )
        lines = result.summary_lines()
        assert lines[0] == "median_mfbi_seconds=2.000000"
        assert lines[2] == "speedup=5.00"
        assert lines[3] == "mfbi_windows=3,6,12,24"
        assert lines[4] == "mbi_lengths=3,8,13,18,23 mbi_directions=0,45,90,135"
        assert list(result.to_frame().columns) == ["method", "run", "seconds"]

    def test_repetitions_checked(self):
        with pytest.raises(ConfigError):
            run_benchmark(32, 32, repetitions=0)

    def test_bench_raster_seeded(self):
        a = bench_raster(40, 30, 2, seed=5)
        b = bench_raster(40, 30, 2, seed=5)
        assert a.shape == (30, 40)
        assert (a.data == b.data).all()
        assert a.data.max() >= 150


@pytest.mark.slow
@pytest.mark.skipif((os.cpu_count() or 1) < 2, reason="speedup floor assumes a multi-core machine")
def test_mfbi_faster_than_mbi():
    """MFBI at least 3x faster than MBI at 1024 x 1024, 4 bands.

    The floor assumes a multi-core x86-64 machine (numba threading enabled,
    4 or more cores) with nothing else competing for them.
    """
    result = run_benchmark(1024, 1024, 4, 3)
    assert result.speedup >= 3.0
