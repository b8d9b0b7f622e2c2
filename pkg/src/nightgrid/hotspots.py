"""Endogenous hotspot extraction via the Lorenz-curve quantile threshold.

The threshold is F = 1 - mean/max over the valid cells; the top
max(1, floor(N * (1 - F))) cells by value are the hotspots. Zero-valued
cells count as valid observations of darkness (they dilute the mean),
nodata cells do not. The fractional count sum(v_i)/v_max is exported
alongside the integer count; the two are linked by Ct/N = mean/max = 1 - F.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DegenerateCityError
from .grid_io import CellPoint, LuminosityGrid, cell_area_m2, cell_point_arrays


@dataclass(frozen=True)
class GridStats:
    """Aggregate density statistics of the valid cells."""

    n_valid: int
    mean: float
    max: float
    total: float


@dataclass(frozen=True)
class HotspotSet:
    """The extracted hotspot cells of one city.

    Cell coordinates are kept as flat arrays (meters, cell centers); the
    ``cells`` property materializes :class:`CellPoint` objects on demand.
    """

    f_threshold: float
    density_cutoff: float
    count: int
    fractional_count: float
    cell_area: float
    xs: np.ndarray
    ys: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        for arr in (self.xs, self.ys, self.rows, self.cols, self.values):
            arr.setflags(write=False)

    @cached_property
    def cells(self) -> list[CellPoint]:
        return [
            CellPoint(float(x), float(y), float(v), int(r), int(c))
            for x, y, v, r, c in zip(self.xs, self.ys, self.values, self.rows, self.cols)
        ]

    @property
    def hotspot_area(self) -> float:
        return self.count * self.cell_area

    def summary(self, city_id: str, n_valid: int) -> dict:
        return {
            "city_id": city_id,
            "F": self.f_threshold,
            "cutoff": self.density_cutoff,
            "count": self.count,
            "fractional_count": self.fractional_count,
            "n_valid": n_valid,
        }


def _checked(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise DegenerateCityError("no valid cells")
    if arr.max() <= 0:
        raise DegenerateCityError("degenerate city: no luminosity")
    return arr


def grid_stats(values) -> GridStats:
    arr = _checked(values)
    total = float(arr.sum())
    return GridStats(
        n_valid=arr.size, mean=total / arr.size, max=float(arr.max()), total=total
    )


def lorenz_threshold(values) -> float:
    """Quantile threshold F = 1 - mean/max; 0 iff all values are equal."""
    arr = _checked(values)
    # Summing equal floats can round the mean a hair above the max; clamp
    # so a uniform grid yields F == 0 exactly.
    ratio = min(1.0, float(arr.mean()) / float(arr.max()))
    return 1.0 - ratio


def fractional_count(values) -> float:
    """Fractional hotspot count: sum of values over the maximum value."""
    arr = _checked(values)
    return min(float(arr.size), float(arr.sum()) / float(arr.max()))


def extract_hotspots(grid: LuminosityGrid) -> HotspotSet:
    """Select the top max(1, floor(N*(1-F))) valid cells by value.

    Ties at the cutoff are broken by row-major cell order (smaller row,
    then smaller column, wins), which keeps runs deterministic on
    plateaued grids.
    """
    x, y, values, rows, cols = cell_point_arrays(grid)
    if values.size == 0:
        raise DegenerateCityError("no valid cells")
    vmax = float(values.max())
    if vmax <= 0:
        raise DegenerateCityError("degenerate city: no luminosity")

    n = values.size
    ratio = min(1.0, float(values.mean()) / vmax)
    f = 1.0 - ratio
    k = max(1, min(n, math.floor(n * ratio)))

    order = np.lexsort((cols, rows, -values))
    sel = order[:k]
    return HotspotSet(
        f_threshold=f,
        density_cutoff=float(values[sel[-1]]),
        count=k,
        fractional_count=min(float(n), float(values.sum()) / vmax),
        cell_area=cell_area_m2(grid),
        xs=x[sel],
        ys=y[sel],
        rows=rows[sel],
        cols=cols[sel],
        values=values[sel],
    )


def hotspot_rows(hotspots: HotspotSet) -> list[dict]:
    """Per-cell export rows (columns row,col,x_m,y_m,value)."""
    return [
        {
            "row": int(r),
            "col": int(c),
            "x_m": float(x),
            "y_m": float(y),
            "value": float(v),
        }
        for r, c, x, y, v in zip(
            hotspots.rows, hotspots.cols, hotspots.xs, hotspots.ys, hotspots.values
        )
    ]
