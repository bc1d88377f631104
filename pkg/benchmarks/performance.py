"""
Performance Benchmarks for gridchange.

Times MFBI against MBI at the image sizes of the evaluation scenes, plus the
change-map and evaluation stages. ``--scale 0.25`` shrinks every image side
for a quick run.
"""

import argparse
import time
from typing import Callable, Tuple

from gridchange.bench import run_benchmark
from gridchange.changegrid import change_map
from gridchange.config import ChangeConfig
from gridchange.synthetic import jittered_masks

# (name, side, grid segments N)
SCENES = (
    ("QuickBird 2800 x 2800", 2800, 14),
    ("GF-2 4400 x 4400", 4400, 20),
)


def benchmark(name: str, fn: Callable[[], object], iterations: int = 3) -> Tuple[float, float]:
    """
    Benchmark a callable.

    Args:
        name: Benchmark name
        fn: Work to time
        iterations: Number of iterations

    Returns:
        Tuple of (total_time, time_per_iteration)
    """
    fn()  # warm up

    start = time.perf_counter()
    for _ in range(iterations):
        fn()
    end = time.perf_counter()

    total_time = end - start
    per_iteration = total_time / iterations

    print(f"{name:40} {per_iteration*1000:10.3f} ms/iter  ({iterations} iterations)")
    return total_time, per_iteration


def run_benchmarks(scale: float = 1.0, repetitions: int = 3):
    """Run all benchmarks."""
    print("=" * 80)
    print("gridchange Performance Benchmarks")
    print("=" * 80)
    print()

    print("BUILDING INDICES (4 bands):")
    for name, side, _ in SCENES:
        size = max(64, int(side * scale))
        result = run_benchmark(size, size, 4, repetitions)
        print(f"{name:40} {size}x{size}")
        print(f"  {'MFBI median':38} {result.median_mfbi:10.3f} s")
        print(f"  {'MBI median':38} {result.median_mbi:10.3f} s")
        print(f"  {'speedup (MBI / MFBI)':38} {result.speedup:10.2f} x")
    print()

    print("CHANGE PATTERNS:")
    for name, side, n in SCENES:
        size = max(n * 8, int(side * scale))
        t1, t2, _ = jittered_masks(size - size % n, n, base_area=20, changed_area=40)
        cfg = ChangeConfig(n_segments=n)
        benchmark(f"change_map {name}", lambda: change_map(t1, t2, cfg), iterations=20)
    print()

    print("=" * 80)
    print("Benchmarks complete!")
    print("=" * 80)


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="gridchange performance benchmarks")
    parser.add_argument("--scale", type=float, default=1.0, help="Fraction of the full image side")
    parser.add_argument("--repetitions", type=int, default=3)
    args = parser.parse_args()
    run_benchmarks(args.scale, args.repetitions)
