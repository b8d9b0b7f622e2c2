import numpy as np
import pytest

from nightgrid.grid_io import CoordMode, GridHeader, LuminosityGrid
from nightgrid.hotspots import HotspotSet


def grid_from_array(
    arr,
    cellsize=1.0,
    xll=0.0,
    yll=0.0,
    nodata=-9999.0,
    coord_mode=CoordMode.PLANAR_METERS,
):
    """Build a LuminosityGrid straight from a 2-D array (top row first)."""
    values = np.asarray(arr, dtype=np.float64)
    header = GridHeader(
        ncols=values.shape[1],
        nrows=values.shape[0],
        xll=xll,
        yll=yll,
        cellsize=cellsize,
        nodata=nodata,
        coord_mode=coord_mode,
    )
    return LuminosityGrid(
        header=header, values=values.copy(), valid_mask=values != nodata
    )


def hotspot_set_from_points(points, cell_area=1.0):
    """Wrap bare planar points as a HotspotSet for geometry tests."""
    pts = np.asarray(points, dtype=np.float64)
    n = len(pts)
    return HotspotSet(
        f_threshold=0.0,
        density_cutoff=1.0,
        count=n,
        fractional_count=float(n),
        cell_area=cell_area,
        xs=pts[:, 0].copy(),
        ys=pts[:, 1].copy(),
        rows=np.zeros(n, dtype=np.int64),
        cols=np.arange(n, dtype=np.int64),
        values=np.ones(n),
    )


@pytest.fixture
def simple_asc():
    return (
        "ncols 2\n"
        "nrows 2\n"
        "xllcorner 0\n"
        "yllcorner 0\n"
        "cellsize 1\n"
        "NODATA_value -9999\n"
        "1 2\n"
        "3 -9999\n"
    )
