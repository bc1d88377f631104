"""
gridchange – building change detection from bitemporal imagery.

Multi-scale filtering building index (MFBI) per date, Otsu + NDVI/NDWI
building masks, and grid-partition change patterns (SI / SD / AU), with the
morphological building index (MBI) and a difference-threshold classifier as
baselines.

Version: 1.0.0
License: MIT
"""

__version__ = "1.0.0"
__author__  = "gridchange contributors"

# ---------------------------------------------------------------------------
# Raster model and building indices
# ---------------------------------------------------------------------------
from .raster     import RasterImage, FeatureMap, enhanced_image, normalize_01
from .config     import ScaleProfile, MbiParams, MaskParams, ChangeConfig, RunConfig
from .filters    import median_filter, median_filter_reference, filter_profile, differential_images, mfbi
from .morphology import white_top_hat_linear, line_opening_reference, mbi

# ---------------------------------------------------------------------------
# Masks, change patterns, evaluation
# ---------------------------------------------------------------------------
from .spectral   import BuildingMask, otsu_threshold, otsu_split, otsu_split_reference, ndvi, ndwi, building_mask
from .changegrid import (
    ChangeLabel, GridCell, GridChangeMap,
    partition, classify_cell, classify_cell_difference,
    change_map, change_map_diff_baseline, reclassify,
)
from .evaluation import (
    ConfusionMatrix, ConfusionMatrix2, ConfusionMatrix3,
    confusion, t_sweep, PUBLISHED_MATRICES,
)

# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------
from .formats import (
    read_raster, write_raster,
    read_gray_image, write_gray_image,
    write_change_map, read_change_report,
    read_truth_labels, write_truth_labels,
)

# ---------------------------------------------------------------------------
# Error types
# ---------------------------------------------------------------------------
from .errors import (
    GridChangeError, RasterError, DimensionMismatchError, WindowTooLargeError,
    MissingBandError, DegenerateHistogramError, ConfigError,
    RasterFormatError, MalformedHeaderError, TruncatedPayloadError, BandNameMismatchError,
    RasterIOError, GrayImageError, ReportFormatError, TruthLabelError,
)

__all__ = [
    # Raster
    "RasterImage", "FeatureMap", "enhanced_image", "normalize_01",
    # Config
    "ScaleProfile", "MbiParams", "MaskParams", "ChangeConfig", "RunConfig",
    # Indices
    "median_filter", "median_filter_reference", "filter_profile", "differential_images", "mfbi",
    "white_top_hat_linear", "line_opening_reference", "mbi",
    # Masks
    "BuildingMask", "otsu_threshold", "otsu_split", "otsu_split_reference", "ndvi", "ndwi", "building_mask",
    # Change patterns
    "ChangeLabel", "GridCell", "GridChangeMap", "partition", "classify_cell", "classify_cell_difference",
    "change_map", "change_map_diff_baseline", "reclassify",
    # Evaluation
    "ConfusionMatrix", "ConfusionMatrix2", "ConfusionMatrix3", "confusion", "t_sweep", "PUBLISHED_MATRICES",
    # Formats
    "read_raster", "write_raster", "read_gray_image", "write_gray_image",
    "write_change_map", "read_change_report", "read_truth_labels", "write_truth_labels",
    # Errors
    "GridChangeError", "RasterError", "DimensionMismatchError", "WindowTooLargeError",
    "MissingBandError", "DegenerateHistogramError", "ConfigError",
    "RasterFormatError", "MalformedHeaderError", "TruncatedPayloadError", "BandNameMismatchError",
    "RasterIOError", "GrayImageError", "ReportFormatError", "TruthLabelError",
    # Meta
    "__version__", "__author__",
]
