"""Compactness of a hotspot set via equal-area-circle comparisons.

Two indices are computed. The proximity index compares the diameter of
the circle whose area equals the hotspot area against the maximum
pairwise distance between hotspot centers. The agglomeration index
compares the mean center-distance of a uniform disk of that same area
(2R/3 for radius R) against the mean distance of hotspot centers to
their centroid. Both are clamped to [0, 1]; the raw ratios are reported
too, because tiny discrete sets provably exceed 1.

The set diameter is exact: convex hull (monotone chain, with an
Akl-Toussaint prefilter for large inputs) followed by rotating calipers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .errors import DataError
from .hotspots import HotspotSet

_PREFILTER_MIN_POINTS = 512


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must have shape (n, 2)")
    return pts


def _unique_sorted(pts: np.ndarray) -> np.ndarray:
    return np.unique(pts, axis=0)  # sorts lexicographically by (x, y)


def _akl_toussaint(pts: np.ndarray) -> np.ndarray:
    """Drop points strictly inside the octagon of 8 directional extremes."""
    x, y = pts[:, 0], pts[:, 1]
    keys = (x, x + y, y, y - x, -x, -x - y, -y, x - y)
    corners = pts[[int(np.argmax(k)) for k in keys]]
    poly = [corners[0]]
    for c in corners[1:]:
        if not np.array_equal(c, poly[-1]):
            poly.append(c)
    if len(poly) > 1 and np.array_equal(poly[0], poly[-1]):
        poly.pop()
    if len(poly) < 3:
        return pts
    keep = np.zeros(len(pts), dtype=bool)
    for a, b in zip(poly, poly[1:] + poly[:1]):
        cross = (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0])
        keep |= cross <= 0
    return pts[keep]


def _chains(pts: np.ndarray) -> tuple[list, list]:
    """Lower and upper hull chains (left to right) of lex-sorted points."""

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    upper: list = []
    for p in pts:
        while len(lower) > 1 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
        while len(upper) > 1 and cross(upper[-2], upper[-1], p) >= 0:
            upper.pop()
        upper.append(p)
    return lower, upper


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Counter-clockwise convex hull vertices, collinear points excluded.

    All-collinear input yields the two extreme points; a single point
    yields itself.
    """
    pts = _as_points(points)
    if len(pts) > _PREFILTER_MIN_POINTS:
        pts = _akl_toussaint(pts)
    pts = _unique_sorted(pts)
    if len(pts) == 1:
        return pts
    lower, upper = _chains(pts)
    if len(lower) == 2 and len(upper) == 2:
        return np.array(lower)
    hull = lower[:-1] + upper[::-1][:-1]
    return np.array(hull)


def _antipodal_pairs(lower: list, upper: list) -> Iterator[tuple]:
    """Rotating calipers over the two hull chains, yielding touched pairs."""
    i, j = 0, len(lower) - 1
    while i < len(upper) - 1 or j > 0:
        yield upper[i], lower[j]
        if i == len(upper) - 1:
            j -= 1
        elif j == 0:
            i += 1
        elif (upper[i + 1][1] - upper[i][1]) * (lower[j][0] - lower[j - 1][0]) > (
            lower[j][1] - lower[j - 1][1]
        ) * (upper[i + 1][0] - upper[i][0]):
            i += 1
        else:
            j -= 1


def max_pairwise_distance(points: np.ndarray) -> float:
    """Exact diameter of a planar point set (rotating calipers)."""
    pts = _as_points(points)
    if len(pts) < 2:
        raise DataError("diameter undefined for a single hotspot")
    if len(pts) > _PREFILTER_MIN_POINTS:
        pts = _akl_toussaint(pts)
    uniq = _unique_sorted(pts)
    if len(uniq) == 1:
        return 0.0
    lower, upper = _chains(uniq)
    best = 0.0
    for p, q in _antipodal_pairs(lower, upper):
        d2 = (p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2
        if d2 > best:
            best = d2
    return math.sqrt(best)


@dataclass(frozen=True)
class CompactnessIndices:
    """Proximity and agglomeration indices with geometric intermediates."""

    pi: float
    ai: float
    pi_raw: float
    ai_raw: float
    dd: float
    dm: float
    de: float
    dh: float
    hotspot_area: float
    degenerate_flags: tuple[str, ...]

    def to_json_dict(self, city_id: Optional[str] = None) -> dict:
        out = {
            "pi": self.pi,
            "ai": self.ai,
            "pi_raw": self.pi_raw,
            "ai_raw": self.ai_raw,
            "dd_m": self.dd,
            "dm_m": self.dm,
            "de_m": self.de,
            "dh_m": self.dh,
            "degenerate_flags": list(self.degenerate_flags),
        }
        if city_id is not None:
            out = {"city_id": city_id, **out}
        return out


def equal_area_diameter(area: float) -> float:
    """Diameter of the circle with the given area."""
    return 2.0 * math.sqrt(area / math.pi)


def proximity_index(hotspots: HotspotSet) -> tuple[float, float, float, float, Optional[str]]:
    """Returns (pi, pi_raw, dd, dm, degenerate_flag)."""
    dd = equal_area_diameter(hotspots.hotspot_area)
    if hotspots.count < 2:
        return 1.0, math.inf, dd, 0.0, "degenerate: single hotspot"
    dm = max_pairwise_distance(np.column_stack((hotspots.xs, hotspots.ys)))
    if dm == 0.0:
        return 1.0, math.inf, dd, 0.0, "degenerate: coincident hotspots"
    raw = dd / dm
    return min(1.0, raw), raw, dd, dm, None


def agglomeration_index(hotspots: HotspotSet) -> tuple[float, float, float, float, Optional[str]]:
    """Returns (ai, ai_raw, de, dh, degenerate_flag)."""
    de = equal_area_diameter(hotspots.hotspot_area) / 3.0
    if hotspots.count < 2:
        return 1.0, math.inf, de, 0.0, "degenerate: single hotspot"
    cx = float(hotspots.xs.mean())
    cy = float(hotspots.ys.mean())
    dh = float(np.hypot(hotspots.xs - cx, hotspots.ys - cy).mean())
    if dh == 0.0:
        return 1.0, math.inf, de, 0.0, "degenerate: coincident hotspots"
    raw = de / dh
    return min(1.0, raw), raw, de, dh, None


def compactness_indices(hotspots: HotspotSet) -> CompactnessIndices:
    """Both indices of one hotspot set, degenerate cases flagged."""
    pi, pi_raw, dd, dm, flag_p = proximity_index(hotspots)
    ai, ai_raw, de, dh, flag_a = agglomeration_index(hotspots)
    flags = tuple(dict.fromkeys(f for f in (flag_p, flag_a) if f))
    return CompactnessIndices(
        pi=pi,
        ai=ai,
        pi_raw=pi_raw,
        ai_raw=ai_raw,
        dd=dd,
        dm=dm,
        de=de,
        dh=dh,
        hotspot_area=hotspots.hotspot_area,
        degenerate_flags=flags,
    )
