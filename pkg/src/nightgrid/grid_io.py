"""Raster and city-table ingestion.

Rasters are ESRI ASCII grids (.asc): a small key/value header followed by
nrows lines of ncols whitespace-separated numbers, top row first. City
metadata arrives as a CSV with a fixed header. Both are parsed into
immutable in-memory structures. All point geometry goes through
:func:`cell_points` / :func:`cell_point_arrays`, so the internal top-first
row order never leaks to callers.

Geographic grids are projected with a local equirectangular approximation
about the grid's mid-latitude. City extents are small enough (a couple of
degrees) that the approximation error stays far below cell resolution;
near the poles the projection is refused outright.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from enum import Enum
from typing import TextIO, Union

import numpy as np
import pandas as pd

from .errors import CityTableError, GridParseError, ProjectionError

EARTH_RADIUS_M = 6_371_000.0
MAX_ABS_MID_LATITUDE_DEG = 85.0
DEFAULT_NODATA = -9999.0

VALID_REGIONS = ("US", "EU", "CN", "other")
CITY_TABLE_COLUMNS = ("city_id", "name", "region", "population", "gdp", "raster_path")


class CoordMode(str, Enum):
    PLANAR_METERS = "planar_meters"
    GEOGRAPHIC_DEGREES = "geographic_degrees"


@dataclass(frozen=True)
class GridHeader:
    """Georeferencing header of a luminosity raster."""

    ncols: int
    nrows: int
    xll: float
    yll: float
    cellsize: float
    nodata: float
    coord_mode: CoordMode

    def __post_init__(self):
        if self.ncols < 1 or self.nrows < 1:
            raise ValueError("ncols and nrows must be >= 1")
        if not self.cellsize > 0:
            raise ValueError("cellsize must be positive")


@dataclass(frozen=True)
class LuminosityGrid:
    """A rectangular raster of non-negative luminosity values.

    ``values`` is a read-only (nrows, ncols) float array with the top row
    first; ``valid_mask`` marks cells that are not the nodata sentinel.
    """

    header: GridHeader
    values: np.ndarray
    valid_mask: np.ndarray

    def __post_init__(self):
        self.values.setflags(write=False)
        self.valid_mask.setflags(write=False)

    @property
    def n_valid(self) -> int:
        return int(self.valid_mask.sum())

    @property
    def valid_values(self) -> np.ndarray:
        return self.values[self.valid_mask]


@dataclass(frozen=True)
class CityRecord:
    """One row of the city metadata table."""

    city_id: str
    name: str
    region: str
    population: float
    gdp: float
    raster_path: str


@dataclass(frozen=True)
class CellPoint:
    """A valid raster cell as a planar point (cell center, meters)."""

    x: float
    y: float
    value: float
    row: int
    col: int


_HEADER_KEYS = {
    "ncols": "ncols",
    "nrows": "nrows",
    "xllcorner": "xll",
    "yllcorner": "yll",
    "cellsize": "cellsize",
    "nodata_value": "nodata",
}
_REQUIRED_HEADER_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize")


def _as_text(text: Union[str, TextIO]) -> str:
    return text.read() if hasattr(text, "read") else text


def parse_ascii_grid(text: Union[str, TextIO], coord_mode: Union[str, CoordMode]) -> LuminosityGrid:
    """Parse ESRI ASCII grid text into a :class:`LuminosityGrid`.

    Header keys are case-insensitive; NODATA_value is optional and
    defaults to -9999. Negative non-nodata values are rejected, naming the
    offending cell.
    """
    coord_mode = CoordMode(coord_mode)
    raw = _as_text(text)
    lines = raw.splitlines()

    seen: dict[str, float] = {}
    i = 0
    while i < len(lines):
        stripped = lines[i].strip()
        if not stripped:
            i += 1
            continue
        if not stripped[0].isalpha():
            break
        parts = stripped.split()
        if len(parts) != 2:
            raise GridParseError(f"malformed header line {i + 1}: {stripped!r}")
        key = parts[0].lower()
        if key not in _HEADER_KEYS:
            raise GridParseError(f"malformed header key {parts[0]!r} (line {i + 1})")
        try:
            seen[key] = float(parts[1])
        except ValueError:
            raise GridParseError(
                f"non-numeric header value {parts[1]!r} for {parts[0]} (line {i + 1})"
            ) from None
        i += 1

    missing = [k for k in _REQUIRED_HEADER_KEYS if k not in seen]
    if missing:
        raise GridParseError(f"missing header keys: {', '.join(missing)}")

    for key in ("ncols", "nrows"):
        if seen[key] != int(seen[key]):
            raise GridParseError(f"{key} must be an integer, got {seen[key]}")
    try:
        header = GridHeader(
            ncols=int(seen["ncols"]),
            nrows=int(seen["nrows"]),
            xll=seen["xllcorner"],
            yll=seen["yllcorner"],
            cellsize=seen["cellsize"],
            nodata=seen.get("nodata_value", DEFAULT_NODATA),
            coord_mode=coord_mode,
        )
    except ValueError as exc:
        raise GridParseError(str(exc)) from None

    tokens = "\n".join(lines[i:]).split()
    expected = header.ncols * header.nrows
    if len(tokens) != expected:
        raise GridParseError(
            f"cell count mismatch: header declares {expected}, found {len(tokens)}"
        )
    try:
        values = np.array(tokens, dtype=np.float64)
    except ValueError:
        bad = next(t for t in tokens if not _is_number(t))
        idx = tokens.index(bad)
        raise GridParseError(
            f"non-numeric cell value {bad!r} at row {idx // header.ncols}, "
            f"column {idx % header.ncols}"
        ) from None

    if np.isnan(values).any():
        idx = int(np.flatnonzero(np.isnan(values))[0])
        raise GridParseError(
            f"NaN cell value at row {idx // header.ncols}, column {idx % header.ncols}"
        )
    valid = values != header.nodata
    negative = valid & (values < 0)
    if negative.any():
        idx = int(np.flatnonzero(negative)[0])
        raise GridParseError(
            f"negative luminosity {values[idx]} at row {idx // header.ncols}, "
            f"column {idx % header.ncols}"
        )

    values = values.reshape(header.nrows, header.ncols)
    return LuminosityGrid(header=header, values=values, valid_mask=valid.reshape(values.shape))


def _is_number(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def write_ascii_grid(grid: LuminosityGrid) -> str:
    """Serialize a grid back to ASCII-grid text.

    Values are written with shortest round-trip repr, so re-parsing
    reproduces values and mask bit-exactly.
    """
    h = grid.header
    buf = io.StringIO()
    buf.write(f"ncols {h.ncols}\n")
    buf.write(f"nrows {h.nrows}\n")
    buf.write(f"xllcorner {h.xll!r}\n")
    buf.write(f"yllcorner {h.yll!r}\n")
    buf.write(f"cellsize {h.cellsize!r}\n")
    buf.write(f"NODATA_value {h.nodata!r}\n")
    out = np.where(grid.valid_mask, grid.values, h.nodata)
    pd.DataFrame(out).to_csv(buf, sep=" ", header=False, index=False)
    return buf.getvalue()


def _mid_latitude(header: GridHeader) -> float:
    lat0 = header.yll + header.nrows * header.cellsize / 2.0
    if abs(lat0) >= MAX_ABS_MID_LATITUDE_DEG:
        raise ProjectionError(
            f"projection unreliable near poles (mid-latitude {lat0:.2f} deg)"
        )
    return lat0


def cell_area_m2(grid: LuminosityGrid) -> float:
    """Effective area of one cell in square meters."""
    h = grid.header
    if h.coord_mode is CoordMode.PLANAR_METERS:
        return h.cellsize**2
    lat0 = _mid_latitude(h)
    rad = math.pi / 180.0
    return h.cellsize**2 * rad**2 * EARTH_RADIUS_M**2 * math.cos(lat0 * rad)


def cell_point_arrays(grid: LuminosityGrid):
    """Planar cell centers of all valid cells as flat arrays.

    Returns ``(x, y, values, rows, cols)``. This is the vectorized core of
    :func:`cell_points`; large-raster callers should prefer it.
    """
    h = grid.header
    rows, cols = np.nonzero(grid.valid_mask)
    values = grid.values[rows, cols]
    if h.coord_mode is CoordMode.PLANAR_METERS:
        x = h.xll + (cols + 0.5) * h.cellsize
        y = h.yll + (h.nrows - rows - 0.5) * h.cellsize
    else:
        lat0 = _mid_latitude(h)
        lon0 = h.xll + h.ncols * h.cellsize / 2.0
        rad = math.pi / 180.0
        lon = h.xll + (cols + 0.5) * h.cellsize
        lat = h.yll + (h.nrows - rows - 0.5) * h.cellsize
        x = EARTH_RADIUS_M * math.cos(lat0 * rad) * (lon - lon0) * rad
        y = EARTH_RADIUS_M * (lat - lat0) * rad
    return x, y, values, rows, cols


def cell_points(grid: LuminosityGrid) -> list[CellPoint]:
    """All valid cells of a grid as :class:`CellPoint` objects."""
    x, y, values, rows, cols = cell_point_arrays(grid)
    return [
        CellPoint(float(xi), float(yi), float(vi), int(ri), int(ci))
        for xi, yi, vi, ri, ci in zip(x, y, values, rows, cols)
    ]


def load_city_table(text: Union[str, TextIO]) -> list[CityRecord]:
    """Parse the city metadata CSV into validated records.

    The header row must be exactly ``city_id,name,region,population,gdp,
    raster_path``; duplicate ids, unknown regions and non-positive
    population or gdp are rejected with the offending row number.
    """
    reader = csv.reader(io.StringIO(_as_text(text)))
    try:
        header = next(reader)
    except StopIteration:
        raise CityTableError("empty city table") from None
    if tuple(h.strip() for h in header) != CITY_TABLE_COLUMNS:
        raise CityTableError(
            f"city table header must be exactly {','.join(CITY_TABLE_COLUMNS)}, "
            f"got {','.join(header)}"
        )

    records: list[CityRecord] = []
    seen_ids: set[str] = set()
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not f.strip() for f in row):
            continue
        if len(row) != len(CITY_TABLE_COLUMNS):
            raise CityTableError(
                f"row {lineno}: expected {len(CITY_TABLE_COLUMNS)} columns, got {len(row)}"
            )
        city_id, name, region, pop_s, gdp_s, raster_path = (f.strip() for f in row)
        if city_id in seen_ids:
            raise CityTableError(f"row {lineno}: duplicate city_id {city_id!r}")
        seen_ids.add(city_id)
        if region not in VALID_REGIONS:
            raise CityTableError(
                f"row {lineno}: region {region!r} not one of {'/'.join(VALID_REGIONS)}"
            )
        try:
            population = float(pop_s)
            gdp = float(gdp_s)
        except ValueError:
            raise CityTableError(f"row {lineno}: non-numeric population or gdp") from None
        if not population > 0:
            raise CityTableError(f"row {lineno}: population must be positive")
        if not gdp > 0:
            raise CityTableError(f"row {lineno}: gdp must be positive")
        records.append(
            CityRecord(
                city_id=city_id,
                name=name,
                region=region,
                population=population,
                gdp=gdp,
                raster_path=raster_path,
            )
        )
    return records
