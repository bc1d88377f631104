"""
Error types for gridchange.

Every failure the library reports is a ``GridChangeError`` carrying a
message and an optional suggestion. Subclasses group failures by concern
(raster validation, filtering, spectral masking, file formats, evaluation)
and offer static factories for the cases that recur across modules.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence, Tuple


class GridChangeError(Exception):
    """Base exception for all gridchange errors.

    Attributes:
        message: What went wrong.
        suggestion: How to fix it (optional).
    """

    def __init__(self, message: str, suggestion: Optional[str] = None) -> None:
        self.message = message
        self.suggestion = suggestion
        super().__init__(self.format_message())

    def format_message(self) -> str:
        """Format the message, appending the suggestion when there is one."""
        if self.suggestion:
            return f"{self.message}: Suggestion: {self.suggestion}"
        return self.message


# ============================================================================
# Raster model / validation
# ============================================================================

class RasterError(GridChangeError):
    """Invalid raster construction or argument.

    Examples:
        - data length not equal to width * height * bands
        - NaN or Inf values
        - band name list of the wrong length
    """

    @staticmethod
    def non_finite(count: int) -> "RasterError":
        """Create error for NaN/Inf values found at construction."""
        return RasterError(
            f"Raster contains {count} non-finite value(s)",
            suggestion="Replace NaN/Inf (e.g. nodata) before building the raster",
        )

    @staticmethod
    def bad_shape(expected: int, got: int) -> "RasterError":
        """Create error for a data buffer of the wrong length."""
        return RasterError(
            f"Raster data length {got} does not match width*height*bands = {expected}"
        )


class DimensionMismatchError(GridChangeError):
    """Two inputs that must share a grid do not."""

    def __init__(
        self,
        what: str,
        left: Tuple[int, ...],
        right: Tuple[int, ...],
    ) -> None:
        super().__init__(
            f"Dimension mismatch between {what}: {left} vs {right}",
            suggestion="Inputs must be registered to the same pixel grid",
        )
        self.left = left
        self.right = right


class WindowTooLargeError(GridChangeError):
    """A filter window or structuring element exceeds the image."""

    def __init__(self, window: int, width: int, height: int) -> None:
        super().__init__(
            f"window too large: {window} exceeds image extent {width}x{height}",
            suggestion="Use a smaller scale profile or a larger image",
        )
        self.window = window


class MissingBandError(GridChangeError):
    """A spectral index needs a band the raster does not carry."""

    def __init__(self, band: str, available: Sequence[str]) -> None:
        super().__init__(
            f"Missing required band '{band}' (available: {', '.join(available) or 'none'})",
            suggestion=f"Name one band '{band}' in the raster header",
        )
        self.band = band


class DegenerateHistogramError(GridChangeError):
    """Otsu cannot split a histogram with fewer than two occupied bins."""

    def __init__(self, occupied: int) -> None:
        super().__init__(f"degenerate histogram ({occupied} occupied bin(s))")
        self.occupied = occupied


class ConfigError(GridChangeError):
    """Parameter validation failure (CLI flags, config file, or API)."""

    @staticmethod
    def from_validation(model: str, errors: Iterable[dict]) -> "ConfigError":
        """Build a single error from pydantic's error list."""
        parts = []
        for err in errors:
            loc = ".".join(str(p) for p in err.get("loc", ())) or model
            parts.append(f"{loc}: {err.get('msg', 'invalid value')}")
        return ConfigError(f"Invalid {model}: " + "; ".join(parts))


# ============================================================================
# File formats
# ============================================================================

class RasterFormatError(GridChangeError):
    """Base for malformed raster container files."""
    pass


class MalformedHeaderError(RasterFormatError):
    """The container header line is missing or unparsable."""

    def __init__(self, path: str, reason: str) -> None:
        super().__init__(f"malformed header in '{path}': {reason}")


class TruncatedPayloadError(RasterFormatError):
    """The payload holds fewer bytes than the header promises."""

    def __init__(self, path: str, expected: int, got: int) -> None:
        super().__init__(
            f"truncated payload in '{path}': expected {expected} bytes, got {got}"
        )
        self.expected = expected
        self.got = got


class BandNameMismatchError(RasterFormatError):
    """Header band count disagrees with its band name list."""

    def __init__(self, bands: int, names: int) -> None:
        super().__init__(
            f"band name count mismatch: bands={bands} but {names} band name(s)"
        )


class RasterIOError(GridChangeError):
    """A path could not be read or written."""

    def __init__(self, operation: str, path: str, reason: str) -> None:
        super().__init__(f"Failed to {operation} '{path}': {reason}")
        self.path = path


class GrayImageError(GridChangeError):
    """A graymap file is not a readable 8/16-bit portable graymap."""
    pass


class ReportFormatError(GridChangeError):
    """A change report does not parse back into a change map."""
    pass


class TruthLabelError(GridChangeError):
    """Truth labels do not line up with a change map."""

    @staticmethod
    def missing_cells(cells: Sequence[Tuple[int, int]]) -> "TruthLabelError":
        """Create error listing the grid cells without a truth label."""
        shown = ", ".join(f"({r},{c})" for r, c in cells[:10])
        more = f" and {len(cells) - 10} more" if len(cells) > 10 else ""
        return TruthLabelError(
            f"Missing truth label for {len(cells)} cell(s): {shown}{more}",
            suggestion="The truth file needs one 'row,col,label' line per grid cell",
        )

    @staticmethod
    def alphabet_mismatch(expected: Sequence[str], got: Sequence[str]) -> "TruthLabelError":
        """Create error for labels outside the map's label alphabet."""
        return TruthLabelError(
            f"Label alphabet mismatch: expected {{{', '.join(expected)}}}, "
            f"got {{{', '.join(got)}}}"
        )
