"""
Command-line interface for gridchange.

Pipeline (each stage is its own subcommand, composed through files):
    raster -> index (MFBI | MBI) -> mask (Otsu + NDVI/NDWI) -> change (SI/SD/AU | C/UC) -> eval

Standard output carries results only (timing lines, CSV tables, OA lines);
diagnostics and errors go to standard error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd
from termcolor import colored

from . import __version__
from .bench import run_benchmark, timed
from .changegrid import GridChangeMap, change_map, change_map_diff_baseline
from .config import RunConfig
from .errors import GridChangeError, RasterIOError
from .evaluation import PUBLISHED_MATRICES, PUBLISHED_T_VALUES, confusion, t_sweep
from .filters import mfbi
from .formats import (
    read_change_report,
    read_feature_map,
    read_mask,
    read_raster,
    read_truth_labels,
    write_change_map,
    write_csv,
    write_gray_image,
    write_mask,
    write_metadata,
    write_raster,
    write_truth_labels,
)
from .morphology import mbi
from .raster import FeatureMap, RasterImage, enhanced_image, normalize_01
from .spectral import BuildingMask, building_mask
from .synthetic import bitemporal_scene

logger = logging.getLogger("gridchange")

# argparse dest -> dotted RunConfig field
PROFILE_FLAGS = {
    "initial_window": "profile.initial_window",
    "scale_factor":   "profile.scale_factor",
    "num_scales":     "profile.num_scales",
}
MBI_FLAGS = {
    "mbi_directions": "mbi.directions",
    "mbi_scale_min":  "mbi.scale_min",
    "mbi_scale_max":  "mbi.scale_max",
    "mbi_scale_step": "mbi.scale_step",
}
MASK_FLAGS = {
    "ndvi_threshold": "mask.ndvi_threshold",
    "ndwi_threshold": "mask.ndwi_threshold",
    "histogram_bins": "mask.histogram_bins",
}
CHANGE_FLAGS = {
    "n_segments":        "change.n_segments",
    "change_threshold":  "change.change_threshold",
    "min_area_floor":    "change.min_area_floor",
    "min_area_fraction": "change.min_area_fraction",
    "diff_threshold":    "change.diff_threshold",
}
ALL_FLAGS = {**PROFILE_FLAGS, **MBI_FLAGS, **MASK_FLAGS, **CHANGE_FLAGS}


# ---------------------------------------------------------------------------
# Logging and error output
# ---------------------------------------------------------------------------

class ColourFormatter(logging.Formatter):
    """``[LEVEL] message`` with the level coloured per severity."""

    COLOURS = {
        logging.DEBUG:    "cyan",
        logging.INFO:     "green",
        logging.WARNING:  "yellow",
        logging.ERROR:    "red",
        logging.CRITICAL: "red",
    }

    def format(self, record: logging.LogRecord) -> str:
        level = colored(f"[{record.levelname}]", self.COLOURS.get(record.levelno, "white"), attrs=["bold"])
        return f"{level} {record.name}: {record.getMessage()}"


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    """Install one stderr handler on the package logger."""
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(ColourFormatter())
    logger.handlers[:] = [handler]
    if verbose:
        logger.setLevel(logging.DEBUG)
    elif quiet:
        logger.setLevel(logging.ERROR)
    else:
        logger.setLevel(logging.WARNING)


def _print_error(err: GridChangeError) -> None:
    kind = err.__class__.__name__
    print(colored(f"[{kind}] {err.format_message()}", "red", attrs=["bold"]), file=sys.stderr)


def _emit(line: str) -> None:
    print(line, flush=True)


def _emit_csv(frame: pd.DataFrame, index: bool = False) -> None:
    sys.stdout.write(frame.to_csv(index=index, lineterminator="\n"))
    sys.stdout.flush()


# ---------------------------------------------------------------------------
# Config resolution
# ---------------------------------------------------------------------------

def resolve_config(args: argparse.Namespace, paths: Optional[Mapping[str, Any]] = None) -> RunConfig:
    """Config file (if any) overlaid with every flag the user set."""
    base = RunConfig.load(args.config) if getattr(args, "config", None) else RunConfig()
    overrides: Dict[str, Any] = {key: getattr(args, dest, None) for dest, key in ALL_FLAGS.items()}
    overrides["index"] = getattr(args, "method", None)
    if paths:
        overrides["paths"] = {k: str(v) for k, v in paths.items() if v is not None}
    return base.merged(overrides)


# ---------------------------------------------------------------------------
# Stages shared by the subcommands and the pipeline
# ---------------------------------------------------------------------------

def compute_index(img: RasterImage, cfg: RunConfig) -> FeatureMap:
    if cfg.index == "mbi":
        return mbi(img, cfg.mbi)
    return mfbi(img, cfg.profile)


def _index_stage(raster_path: str, out_path: str, cfg: RunConfig) -> float:
    img = read_raster(raster_path)
    fm, seconds = timed(lambda: compute_index(img, cfg))
    write_gray_image(fm, out_path, bit_depth=16)
    write_metadata(out_path, cfg, stage="index", width=fm.width, height=fm.height)
    return seconds


def _mask_stage(
    raster_path: str,
    feature_path: str,
    out_path: str,
    cfg: RunConfig,
    threshold: Optional[float] = None,
) -> BuildingMask:
    img = read_raster(raster_path)
    fm = read_feature_map(feature_path, source=cfg.index)
    mask = building_mask(fm, img, cfg.mask, threshold=threshold)
    write_mask(mask, out_path)
    write_metadata(
        out_path,
        cfg,
        stage="mask",
        threshold=mask.threshold,
        applied=list(mask.applied),
        building_pixels=mask.count,
    )
    return mask


def _overlay(raster_path: Optional[str]) -> Optional[np.ndarray]:
    if raster_path is None:
        return None
    return normalize_01(enhanced_image(read_raster(raster_path))).values


def _change_stage(
    mask_t1: BuildingMask,
    mask_t2: BuildingMask,
    image_path: str,
    report_path: str,
    cfg: RunConfig,
    *,
    baseline: bool = False,
    overlay_raster: Optional[str] = None,
) -> GridChangeMap:
    build = change_map_diff_baseline if baseline else change_map
    gcm = build(mask_t1, mask_t2, cfg.change)
    write_change_map(gcm, image_path, report_path, overlay=_overlay(overlay_raster))
    counts = {label.value: n for label, n in gcm.counts().items()}
    write_metadata(report_path, cfg, stage="change", method=gcm.method, counts=counts)
    return gcm


def _counts_line(gcm: GridChangeMap) -> str:
    parts = [f"{label.value}={n}" for label, n in gcm.counts().items()]
    return f"cells={len(gcm.cells)} " + " ".join(parts)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_index(args: argparse.Namespace) -> int:
    cfg = resolve_config(args, {"input": args.input, "output": args.output})
    seconds = _index_stage(args.input, args.output, cfg)
    _emit(f"compute_seconds={seconds:.6f}")
    return 0


def cmd_mask(args: argparse.Namespace) -> int:
    cfg = resolve_config(args, {"input": args.input, "feature": args.feature, "output": args.output})
    mask = _mask_stage(args.input, args.feature, args.output, cfg, threshold=args.threshold)
    threshold = "none" if mask.threshold is None else f"{mask.threshold:.6f}"
    _emit(f"threshold={threshold} building_pixels={mask.count}")
    return 0


def _run_change(args: argparse.Namespace, baseline: bool) -> int:
    cfg = resolve_config(args, {
        "mask_t1": args.t1,
        "mask_t2": args.t2,
        "image": args.out_image,
        "report": args.out_report,
        "overlay": args.overlay_raster,
    })
    gcm = _change_stage(
        read_mask(args.t1),
        read_mask(args.t2),
        args.out_image,
        args.out_report,
        cfg,
        baseline=baseline,
        overlay_raster=args.overlay_raster,
    )
    _emit(_counts_line(gcm))
    return 0


def cmd_change(args: argparse.Namespace) -> int:
    return _run_change(args, baseline=False)


def cmd_change_baseline(args: argparse.Namespace) -> int:
    return _run_change(args, baseline=True)


def cmd_eval(args: argparse.Namespace) -> int:
    if args.published:
        matrix = PUBLISHED_MATRICES[args.published]
        cfg = resolve_config(args, {"published": args.published, "output": args.out})
    else:
        cfg = resolve_config(args, {"report": args.report, "truth": args.truth, "output": args.out})
        matrix = confusion(read_change_report(args.report), read_truth_labels(args.truth))
    frame = matrix.to_frame()
    _emit_csv(frame, index=True)
    _emit(matrix.oa_text())
    if args.out:
        write_csv(frame, args.out, index=True)
        write_metadata(args.out, cfg, stage="eval", oa=f"{matrix.overall_accuracy:.2f}")
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    cfg = resolve_config(args, {"output": args.out})
    result = run_benchmark(
        args.width,
        args.height,
        args.bands,
        args.repetitions,
        seed=args.seed,
        profile=cfg.profile,
        mbi_params=cfg.mbi,
    )
    frame = result.to_frame()
    _emit_csv(frame)
    for line in result.summary_lines():
        _emit(line)
    if args.out:
        write_csv(frame, args.out)
        write_metadata(
            args.out, cfg, stage="bench",
            width=args.width, height=args.height, bands=args.bands,
            repetitions=args.repetitions, seed=args.seed,
        )
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    t_values = args.t_values or list(PUBLISHED_T_VALUES)
    cfg = resolve_config(args, {"mask_t1": args.t1, "mask_t2": args.t2, "truth": args.truth, "output": args.out})
    rows = t_sweep(read_mask(args.t1), read_mask(args.t2), read_truth_labels(args.truth), cfg.change, t_values)
    frame = pd.DataFrame([(f"{t:g}", f"{oa:.2f}") for t, oa in rows], columns=["T", "OA"])
    _emit_csv(frame)
    if args.out:
        write_csv(frame, args.out)
        write_metadata(args.out, cfg, stage="sweep", t_values=[float(t) for t in t_values])
    return 0


def cmd_pipeline(args: argparse.Namespace) -> int:
    out = Path(args.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise RasterIOError("create directory", str(out), exc.strerror or str(exc)) from exc
    cfg = resolve_config(args, {"t1": args.t1, "t2": args.t2, "truth": args.truth, "out_dir": args.out_dir})

    total = 0.0
    masks: List[BuildingMask] = []
    for tag, raster_path in (("t1", args.t1), ("t2", args.t2)):
        feature_path = str(out / f"{tag}_{cfg.index}.pgm")
        mask_path = str(out / f"{tag}_mask.pgm")
        total += _index_stage(raster_path, feature_path, cfg)
        masks.append(_mask_stage(raster_path, feature_path, mask_path, cfg))
    _emit(f"compute_seconds={total:.6f}")

    gcm = _change_stage(
        masks[0], masks[1], str(out / "change.ppm"), str(out / "change_report.json"), cfg,
        overlay_raster=args.t2 if args.overlay else None,
    )
    _emit(_counts_line(gcm))
    maps = [gcm]
    if cfg.change.diff_threshold is not None:
        baseline = _change_stage(
            masks[0], masks[1], str(out / "change_baseline.ppm"), str(out / "change_baseline_report.json"), cfg,
            baseline=True,
        )
        _emit(_counts_line(baseline))
        maps.append(baseline)

    if args.truth:
        truth = read_truth_labels(args.truth)
        for pred in maps:
            if {label for label in truth.values()} - set(pred.labels):
                continue
            matrix = confusion(pred, truth)
            target = out / f"eval_{pred.method}.csv"
            write_csv(matrix.to_frame(), target, index=True)
            write_metadata(target, cfg, stage="eval", oa=f"{matrix.overall_accuracy:.2f}")
            _emit(f"{pred.method} {matrix.oa_text()}")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    out = Path(args.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise RasterIOError("create directory", str(out), exc.strerror or str(exc)) from exc
    scene = bitemporal_scene(
        args.size,
        args.n_segments,
        seed=args.seed,
        added=args.added,
        removed=args.removed,
        unchanged=args.unchanged,
        vegetation=args.vegetation,
        water=args.water,
    )
    write_raster(scene.t1, out / "t1.raster")
    write_raster(scene.t2, out / "t2.raster")
    write_truth_labels(scene.truth, out / "truth.csv")
    cfg = resolve_config(args, {"out_dir": args.out_dir})
    write_metadata(
        out / "truth.csv", cfg, stage="synth",
        size=args.size, n_segments=args.n_segments, seed=args.seed,
    )
    _emit(f"wrote {out / 't1.raster'} {out / 't2.raster'} {out / 'truth.csv'}")
    return 0


def cmd_version(args: argparse.Namespace) -> int:
    print(f"gridchange {__version__}")
    print(f"Python {sys.version}")
    return 0


# ---------------------------------------------------------------------------
# Argument parser
# ---------------------------------------------------------------------------

def _add_profile_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("MFBI scale profile")
    g.add_argument("--initial-window", type=int, help="Smallest median window (default 3)")
    g.add_argument("--scale-factor", type=int, help="Window growth factor (default 2)")
    g.add_argument("--num-scales", type=int, help="Number of median windows (default 4)")


def _add_mbi_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("MBI structuring elements")
    g.add_argument("--mbi-directions", type=int, help="Line directions 1..4 (default 4)")
    g.add_argument("--mbi-scale-min", type=int, help="Shortest line length (default 3)")
    g.add_argument("--mbi-scale-max", type=int, help="Longest line length (default 24)")
    g.add_argument("--mbi-scale-step", type=int, help="Line length step (default 5)")


def _add_mask_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("building mask")
    g.add_argument("--ndvi-threshold", type=float, help="Drop pixels with NDVI >= this (default 0.3)")
    g.add_argument("--ndwi-threshold", type=float, help="Drop pixels with NDWI >= this (default 0.3)")
    g.add_argument("--histogram-bins", type=int, help="Otsu histogram bins (default 256)")


def _add_change_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("change grid")
    g.add_argument("--n-segments", type=int, help="Grid segments per axis N (default 14)")
    g.add_argument("--change-threshold", type=float, help="Ratio threshold T > 1 (default 2.5)")
    g.add_argument("--min-area-floor", type=float, help="Building pixels treated as empty")
    g.add_argument("--min-area-fraction", type=float,
                   help="Empty-cell floor as a fraction of cell area (default 0.005)")
    g.add_argument("--diff-threshold", type=float, help="Pixel-count threshold of the difference baseline")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON run config; flags override it")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Log stage details to stderr")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Log errors only")

    parser = argparse.ArgumentParser(
        prog="gridchange",
        description="gridchange – building change detection with MFBI and grid change patterns",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  gridchange synth --out-dir scene                              Generate a test scene
  gridchange index --method mfbi --in t1.raster --out t1.pgm    Building index
  gridchange mask --in t1.raster --feature t1.pgm --out t1_mask.pgm
  gridchange change --t1 t1_mask.pgm --t2 t2_mask.pgm --out-image change.ppm --out-report change.json
  gridchange eval --report change.json --truth truth.csv        Confusion matrix and OA
  gridchange pipeline --t1 t1.raster --t2 t2.raster --out-dir run --truth truth.csv
  gridchange bench --width 1024 --height 1024 --repetitions 3   MFBI vs MBI timing
        """,
    )
    parser.add_argument("--version", action="version", version=f"gridchange {__version__}")
    sub = parser.add_subparsers(dest="command", help="Sub-command")

    # ---- index ----
    p = sub.add_parser("index", parents=[common], help="Compute an MFBI or MBI feature map")
    p.add_argument("--method", choices=["mfbi", "mbi"], default=None, help="Building index (default mfbi)")
    p.add_argument("--in", dest="input", required=True, help="Input raster container")
    p.add_argument("--out", dest="output", required=True, help="Output 16-bit graymap")
    _add_profile_flags(p)
    _add_mbi_flags(p)
    p.set_defaults(func=cmd_index)

    # ---- mask ----
    p = sub.add_parser("mask", parents=[common], help="Otsu + NDVI/NDWI building mask")
    p.add_argument("--in", dest="input", required=True, help="Input raster container")
    p.add_argument("--feature", required=True, help="Feature map graymap")
    p.add_argument("--out", dest="output", required=True, help="Output 8-bit mask graymap")
    p.add_argument("--threshold", type=float, help="Fixed segmentation threshold instead of Otsu")
    _add_mask_flags(p)
    p.set_defaults(func=cmd_mask)

    # ---- change / change-baseline ----
    for name, func, text in (
        ("change", cmd_change, "SI / SD / AU change patterns"),
        ("change-baseline", cmd_change_baseline, "C / UC difference baseline"),
    ):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--t1", required=True, help="T1 building mask graymap")
        p.add_argument("--t2", required=True, help="T2 building mask graymap")
        p.add_argument("--out-image", required=True, help="Output change pixmap")
        p.add_argument("--out-report", required=True, help="Output JSON cell report")
        p.add_argument("--overlay-raster", help="Blend colours over this raster's enhanced image")
        _add_change_flags(p)
        p.set_defaults(func=func)

    # ---- eval ----
    p = sub.add_parser("eval", parents=[common], help="Confusion matrix and overall accuracy")
    p.add_argument("--report", help="Change report JSON")
    p.add_argument("--truth", help="Truth labels CSV (row,col,label)")
    p.add_argument("--published", choices=sorted(PUBLISHED_MATRICES), help="Use a published count table")
    p.add_argument("--out", help="Write the matrix as CSV")
    p.set_defaults(func=cmd_eval)

    # ---- bench ----
    p = sub.add_parser("bench", parents=[common], help="Time MFBI against MBI")
    p.add_argument("--width", type=int, default=1024)
    p.add_argument("--height", type=int, default=1024)
    p.add_argument("--bands", type=int, default=4)
    p.add_argument("--repetitions", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="Write timings as CSV")
    _add_profile_flags(p)
    _add_mbi_flags(p)
    p.set_defaults(func=cmd_bench)

    # ---- sweep ----
    p = sub.add_parser("sweep", parents=[common], help="Overall accuracy against T")
    p.add_argument("--t1", required=True, help="T1 building mask graymap")
    p.add_argument("--t2", required=True, help="T2 building mask graymap")
    p.add_argument("--truth", required=True, help="Truth labels CSV")
    p.add_argument("--t-values", type=float, nargs="+",
                   help="Thresholds to test (default 1.5 2 2.5 3 3.5 4 4.5)")
    p.add_argument("--out", help="Write the sweep as CSV")
    _add_change_flags(p)
    p.set_defaults(func=cmd_sweep)

    # ---- pipeline ----
    p = sub.add_parser("pipeline", parents=[common], help="index, mask, change (and eval) in one go")
    p.add_argument("--t1", required=True, help="T1 raster container")
    p.add_argument("--t2", required=True, help="T2 raster container")
    p.add_argument("--out-dir", required=True, help="Directory for every output")
    p.add_argument("--truth", help="Truth labels CSV; adds eval")
    p.add_argument("--method", choices=["mfbi", "mbi"], default=None, help="Building index (default mfbi)")
    p.add_argument("--overlay", action="store_true", help="Blend change colours over the T2 image")
    _add_profile_flags(p)
    _add_mbi_flags(p)
    _add_mask_flags(p)
    _add_change_flags(p)
    p.set_defaults(func=cmd_pipeline)

    # ---- synth ----
    p = sub.add_parser("synth", parents=[common], help="Write a seeded synthetic scene with truth")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--size", type=int, default=512)
    p.add_argument("--n-segments", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--added", type=int, default=4)
    p.add_argument("--removed", type=int, default=4)
    p.add_argument("--unchanged", type=int, default=16)
    p.add_argument("--vegetation", type=int, default=0)
    p.add_argument("--water", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    # ---- version ----
    p = sub.add_parser("version", help="Show version information")
    p.set_defaults(func=cmd_version)

    return parser


# ---------------------------------------------------------------------------
# CLI entry point
# ---------------------------------------------------------------------------

def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse CLI arguments and dispatch to the subcommand.

    Returns:
        Exit code: 0 on success, 1 when an error was reported, 130 on Ctrl+C.
        Usage errors exit with 2 through argparse.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 0
    if args.command == "eval" and not args.published and not (args.report and args.truth):
        parser.error("eval needs --report and --truth, or --published")

    configure_logging(getattr(args, "verbose", False), getattr(args, "quiet", False))
    try:
        return int(args.func(args))
    except GridChangeError as exc:
        _print_error(exc)
        return 1
    except KeyboardInterrupt:
        print(colored("\n\nInterrupted by user", "yellow"), file=sys.stderr)
        return 130


if __name__ == "__main__":
    sys.exit(main())
