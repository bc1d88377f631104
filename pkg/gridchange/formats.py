"""
File formats: raster container, portable graymaps, change maps, truth labels
and run metadata.

Raster container
    One JSON header line terminated by ``\\n``::

        {"width": 512, "height": 512, "bands": 4, "band_names": [...], "bit_depth": 8}

    followed by ``width * height * bands`` little-endian float32 values,
    band-planar and row-major within each band. Nothing else.

Graymaps / pixmaps
    Binary netpbm (``P5`` / ``P6``) through Pillow. Sample values above 255
    are stored big-endian, as netpbm requires.

Change report
    JSON document holding the change config and every cell's
    ``(row, col, rect, a1, a2, label)``; it parses back into an equal
    ``GridChangeMap``.

Every writer also leaves ``<output>.meta.json`` beside its output via
``write_metadata``.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional, Tuple, Union

import numpy as np
import pandas as pd
from PIL import Image, UnidentifiedImageError
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .changegrid import ChangeLabel, GridCell, GridChangeMap
from .config import ChangeConfig, RunConfig
from .errors import (
    BandNameMismatchError,
    GrayImageError,
    MalformedHeaderError,
    RasterError,
    RasterFormatError,
    RasterIOError,
    ReportFormatError,
    TruncatedPayloadError,
    TruthLabelError,
)
from .raster import FeatureMap, RasterImage, as_band
from .spectral import BuildingMask

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

PAYLOAD_DTYPE = np.dtype("<f4")

# RGB per label in change-map images.
LABEL_COLOURS: Dict[ChangeLabel, Tuple[int, int, int]] = {
    ChangeLabel.SI: (255, 0, 0),
    ChangeLabel.SD: (0, 255, 0),
    ChangeLabel.AU: (0, 0, 255),
    ChangeLabel.C:  (255, 255, 255),
    ChangeLabel.UC: (128, 128, 128),
}


def _read_bytes(path: PathLike, what: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise RasterIOError(f"read {what}", str(path), exc.strerror or str(exc)) from exc


def _write_bytes(path: PathLike, data: bytes, what: str) -> None:
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise RasterIOError(f"write {what}", str(path), exc.strerror or str(exc)) from exc


# ---------------------------------------------------------------------------
# Raster container
# ---------------------------------------------------------------------------

class RasterHeader(BaseModel):
    """Header line of the raster container."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    width:      int = Field(gt=0)
    height:     int = Field(gt=0)
    bands:      int = Field(gt=0)
    band_names: List[str]
    bit_depth:  Optional[int] = Field(None, gt=0)

    @property
    def payload_bytes(self) -> int:
        return self.width * self.height * self.bands * PAYLOAD_DTYPE.itemsize


def write_raster(img: RasterImage, path: PathLike) -> None:
    """Write *img* as header line + float32 payload."""
    header = RasterHeader(
        width=img.width,
        height=img.height,
        bands=img.bands,
        band_names=list(img.band_names),
        bit_depth=img.bit_depth,
    )
    payload = np.ascontiguousarray(img.data, dtype=PAYLOAD_DTYPE).tobytes()
    _write_bytes(path, header.model_dump_json().encode("utf-8") + b"\n" + payload, "raster")
    logger.debug("wrote raster %s (%dx%dx%d)", path, img.width, img.height, img.bands)


def read_raster(path: PathLike) -> RasterImage:
    """Read a raster container.

    Raises:
        RasterIOError: The path cannot be read.
        MalformedHeaderError: No header line, or the header is not valid.
        BandNameMismatchError: ``bands`` disagrees with ``band_names``.
        TruncatedPayloadError: Fewer payload bytes than the header promises.
    """
    raw = _read_bytes(path, "raster")
    newline = raw.find(b"\n")
    if newline < 0:
        raise MalformedHeaderError(str(path), "no header line")
    try:
        fields = json.loads(raw[:newline].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedHeaderError(str(path), str(exc)) from exc
    if not isinstance(fields, dict):
        raise MalformedHeaderError(str(path), "header is not a JSON object")
    try:
        header = RasterHeader.model_validate(fields)
    except ValidationError as exc:
        first = exc.errors()[0]
        loc = ".".join(str(p) for p in first.get("loc", ()))
        raise MalformedHeaderError(str(path), f"{loc}: {first.get('msg')}") from exc
    if len(header.band_names) != header.bands:
        raise BandNameMismatchError(header.bands, len(header.band_names))

    payload = raw[newline + 1:]
    if len(payload) < header.payload_bytes:
        raise TruncatedPayloadError(str(path), header.payload_bytes, len(payload))
    if len(payload) > header.payload_bytes:
        raise RasterFormatError(
            f"trailing data in '{path}': {len(payload) - header.payload_bytes} byte(s) past the payload"
        )
    values = np.frombuffer(payload, dtype=PAYLOAD_DTYPE)
    return RasterImage.from_flat(
        header.width, header.height, header.bands, header.band_names, values, header.bit_depth
    )


# ---------------------------------------------------------------------------
# Graymaps
# ---------------------------------------------------------------------------

def _netpbm_header(raw: bytes) -> Tuple[bytes, int, int, int]:
    # magic, width, height, maxval; '#' comments allowed between tokens
    tokens: List[bytes] = []
    i = 0
    while len(tokens) < 4 and i < len(raw):
        ch = raw[i:i + 1]
        if ch.isspace():
            i += 1
        elif ch == b"#":
            end = raw.find(b"\n", i)
            i = len(raw) if end < 0 else end + 1
        else:
            start = i
            while i < len(raw) and not raw[i:i + 1].isspace() and raw[i:i + 1] != b"#":
                i += 1
            tokens.append(raw[start:i])
    if len(tokens) < 4 or not all(t.isdigit() for t in tokens[1:]):
        raise GrayImageError("Incomplete netpbm header")
    return tokens[0], int(tokens[1]), int(tokens[2]), int(tokens[3])


def read_gray_image(path: PathLike) -> np.ndarray:
    """Read a binary 8- or 16-bit graymap, scaled to [0, 1].

    Raises:
        GrayImageError: Not a binary graymap (magic other than ``P5``) or a
            max value beyond 16 bits.
    """
    raw = _read_bytes(path, "graymap")
    if raw[:2] != b"P5":
        raise GrayImageError(
            f"'{path}' is not a binary graymap (magic {raw[:2]!r}, expected b'P5')"
        )
    _, width, height, maxval = _netpbm_header(raw)
    if not 0 < maxval <= 65535:
        raise GrayImageError(f"'{path}' declares max value {maxval}; only 8- and 16-bit graymaps are supported")
    try:
        with Image.open(path, formats=["PPM"]) as im:
            levels = np.asarray(im, dtype=np.float64)
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise GrayImageError(f"Cannot decode graymap '{path}': {exc}") from exc
    if levels.shape != (height, width):
        raise GrayImageError(f"'{path}' decoded to shape {levels.shape}, header says {height}x{width}")
    # Pillow rescales any max value onto the full 8- or 16-bit range.
    full = 255.0 if maxval <= 255 else 65535.0
    return levels / full


def quantize(values: np.ndarray, bit_depth: int) -> np.ndarray:
    """Round-half-up quantization of [0, 1] values to ``2**bit_depth - 1`` levels."""
    top = (1 << bit_depth) - 1
    return np.floor(np.clip(values, 0.0, 1.0) * top + 0.5).astype(np.int64)


def write_gray_image(raster: Union[FeatureMap, np.ndarray], path: PathLike, bit_depth: int = 16) -> None:
    """Write a [0, 1] single-band raster as a binary graymap.

    Raises:
        GrayImageError: *bit_depth* other than 8 or 16, or values outside [0, 1].
    """
    if bit_depth not in (8, 16):
        raise GrayImageError(f"Graymaps are written at 8 or 16 bits, got {bit_depth}")
    values = raster.values if isinstance(raster, FeatureMap) else as_band(raster)
    if values.min() < 0.0 or values.max() > 1.0:
        raise GrayImageError("Graymap values must lie in [0, 1]")
    levels = quantize(values, bit_depth)
    image = Image.fromarray(levels.astype(np.uint8 if bit_depth == 8 else np.int32))
    _save_image(image, path, "graymap")


def _save_image(image: Image.Image, path: PathLike, what: str) -> None:
    try:
        image.save(path, format="PPM")
    except OSError as exc:
        raise RasterIOError(f"write {what}", str(path), exc.strerror or str(exc)) from exc


def read_feature_map(path: PathLike, source: str = "mfbi") -> FeatureMap:
    return FeatureMap(read_gray_image(path), source=source)


def write_mask(mask: BuildingMask, path: PathLike) -> None:
    """Write a building mask as an 8-bit graymap with levels 0 / 255."""
    write_gray_image(mask.bits.astype(np.float64), path, bit_depth=8)


def read_mask(path: PathLike) -> BuildingMask:
    return BuildingMask(read_gray_image(path) >= 0.5)


# ---------------------------------------------------------------------------
# Change maps
# ---------------------------------------------------------------------------

class CellRecord(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    row:   int = Field(ge=0)
    col:   int = Field(ge=0)
    rect:  Tuple[int, int, int, int]
    a1:    int = Field(ge=0)
    a2:    int = Field(ge=0)
    label: ChangeLabel


class ChangeReport(BaseModel):
    """Serialized form of a ``GridChangeMap``."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    method: Literal["ratio", "difference"]
    width:  int = Field(gt=0)
    height: int = Field(gt=0)
    config: ChangeConfig
    counts: Dict[str, int] = Field(default_factory=dict)
    cells:  List[CellRecord]

    @classmethod
    def from_map(cls, gcm: GridChangeMap) -> "ChangeReport":
        return cls(
            method=gcm.method,
            width=gcm.width,
            height=gcm.height,
            config=gcm.config,
            counts={label.value: n for label, n in gcm.counts().items()},
            cells=[
                CellRecord(row=c.row, col=c.col, rect=c.pixel_rect, a1=c.a1, a2=c.a2, label=c.label)
                for c in gcm.cells
            ],
        )

    def to_map(self) -> GridChangeMap:
        n = self.config.n_segments
        cells = sorted(self.cells, key=lambda c: (c.row, c.col))
        expected = [(r, c) for r in range(n) for c in range(n)]
        if [(c.row, c.col) for c in cells] != expected:
            raise ReportFormatError(f"Report cells do not form a complete {n}x{n} grid")
        try:
            return GridChangeMap(
                self.width,
                self.height,
                self.config,
                tuple(GridCell(c.row, c.col, tuple(c.rect), c.a1, c.a2, c.label) for c in cells),
                self.method,
            )
        except RasterError as exc:
            raise ReportFormatError(f"Report does not describe a valid change map: {exc.message}") from exc


def change_map_image(gcm: GridChangeMap, overlay: Optional[np.ndarray] = None) -> np.ndarray:
    """``height x width x 3`` uint8 image painting each cell in its label colour.

    With *overlay* (a [0, 1] grey image of the same size) the colours are
    blended half and half with the grey rendering.
    """
    rgb = np.zeros((gcm.height, gcm.width, 3), dtype=np.float64)
    for cell in gcm.cells:
        x0, y0, x1, y1 = cell.pixel_rect
        rgb[y0:y1, x0:x1] = LABEL_COLOURS[cell.label]
    if overlay is not None:
        grey = as_band(overlay)
        if grey.shape != (gcm.height, gcm.width):
            raise RasterError(f"Overlay shape {grey.shape} does not match the change map {gcm.height}x{gcm.width}")
        rgb = 0.5 * rgb + 0.5 * np.clip(grey, 0.0, 1.0)[..., np.newaxis] * 255.0
    return np.floor(rgb + 0.5).astype(np.uint8)


def write_change_map(
    gcm: GridChangeMap,
    image_path: PathLike,
    report_path: PathLike,
    overlay: Optional[np.ndarray] = None,
) -> None:
    """Write the coloured change image (binary pixmap) and the JSON cell report."""
    _save_image(Image.fromarray(change_map_image(gcm, overlay)), image_path, "change image")
    report = ChangeReport.from_map(gcm).model_dump_json(indent=2)
    _write_bytes(report_path, report.encode("utf-8") + b"\n", "change report")
    logger.debug("wrote change map %s and report %s", image_path, report_path)


def read_change_report(path: PathLike) -> GridChangeMap:
    """Parse a change report back into a ``GridChangeMap``.

    Raises:
        ReportFormatError: The document is not a valid report.
    """
    text = _read_bytes(path, "change report").decode("utf-8", errors="replace")
    try:
        report = ChangeReport.model_validate_json(text)
    except ValidationError as exc:
        first = exc.errors()[0]
        loc = ".".join(str(p) for p in first.get("loc", ()))
        raise ReportFormatError(f"Invalid change report '{path}': {loc}: {first.get('msg')}") from exc
    return report.to_map()


# ---------------------------------------------------------------------------
# Truth labels
# ---------------------------------------------------------------------------

TRUTH_COLUMNS = ["row", "col", "label"]


def read_truth_labels(path: PathLike) -> Dict[Tuple[int, int], ChangeLabel]:
    """Read ``row,col,label`` lines (header row optional).

    Raises:
        TruthLabelError: Wrong column count, non-integer coordinates, unknown
            or mixed label alphabets, or duplicate cells.
    """
    try:
        frame = pd.read_csv(path, header=None, dtype=str, skipinitialspace=True, keep_default_na=False)
    except FileNotFoundError as exc:
        raise RasterIOError("read truth labels", str(path), "file not found") from exc
    except pd.errors.EmptyDataError as exc:
        raise TruthLabelError(f"Truth file '{path}' is empty") from exc
    except pd.errors.ParserError as exc:
        raise TruthLabelError(f"Truth file '{path}' is not valid CSV: {exc}") from exc

    if frame.shape[1] != 3:
        raise TruthLabelError(f"Truth file '{path}' needs 3 columns (row,col,label), got {frame.shape[1]}")
    frame.columns = TRUTH_COLUMNS
    if not str(frame.iloc[0]["row"]).strip().isdigit():
        frame = frame.iloc[1:]

    try:
        rows = frame["row"].astype(int).tolist()
        cols = frame["col"].astype(int).tolist()
    except ValueError as exc:
        raise TruthLabelError(f"Truth file '{path}' has non-integer cell coordinates") from exc

    names = [str(v).strip().upper() for v in frame["label"]]
    known = {label.value for label in ChangeLabel}
    unknown = sorted(set(names) - known)
    if unknown:
        raise TruthLabelError.alphabet_mismatch(sorted(known), unknown)
    labels = [ChangeLabel(v) for v in names]
    if len({label in (ChangeLabel.C, ChangeLabel.UC) for label in labels}) > 1:
        raise TruthLabelError.alphabet_mismatch(["SI", "SD", "AU"], sorted(set(names)))

    truth: Dict[Tuple[int, int], ChangeLabel] = {}
    for r, c, label in zip(rows, cols, labels):
        if (r, c) in truth:
            raise TruthLabelError(f"Duplicate truth label for cell ({r},{c})")
        truth[(r, c)] = label
    return truth


def write_truth_labels(labels: Mapping[Tuple[int, int], Union[ChangeLabel, str]], path: PathLike) -> None:
    """Write truth labels sorted by cell, with a header row."""
    frame = pd.DataFrame(
        [(r, c, str(label)) for (r, c), label in sorted(labels.items())],
        columns=TRUTH_COLUMNS,
    )
    write_csv(frame, path, index=False)


# ---------------------------------------------------------------------------
# CSV tables and metadata
# ---------------------------------------------------------------------------

def write_csv(frame: pd.DataFrame, path: PathLike, index: bool = False) -> None:
    try:
        frame.to_csv(path, index=index, lineterminator="\n")
    except OSError as exc:
        raise RasterIOError("write CSV", str(path), exc.strerror or str(exc)) from exc


def metadata_path(output: PathLike) -> Path:
    """Sidecar metadata path of *output*: ``<output>.meta.json``."""
    return Path(f"{output}.meta.json")


def write_metadata(output: PathLike, config: RunConfig, **fields: Any) -> Path:
    """Record the resolved run config (plus *fields*) beside *output*.

    Contents depend only on the inputs, so reruns produce identical files.
    """
    document = {"config": json.loads(config.model_dump_json()), **fields}
    target = metadata_path(output)
    _write_bytes(target, (json.dumps(document, indent=2, sort_keys=True) + "\n").encode("utf-8"), "metadata")
    return target
