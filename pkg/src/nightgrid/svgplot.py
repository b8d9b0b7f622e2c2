"""Dependency-free SVG 1.1 scatter plots with fitted curves.

The viewport is fixed at 800x600. Data coordinates map to pixels through
:class:`AxisMapping`: linear axes interpolate between the padded data
range and the plot box; log axes interpolate in log10 space. The mapping
is exposed so tests can recompute pixel positions independently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .errors import DataError

WIDTH = 800
HEIGHT = 600
MARGIN_LEFT = 70.0
MARGIN_RIGHT = 20.0
MARGIN_TOP = 30.0
MARGIN_BOTTOM = 50.0
POINT_RADIUS = 3.0
RANGE_PAD = 0.05


@dataclass(frozen=True)
class AxisMapping:
    """Affine map from (possibly log10-transformed) data to pixels."""

    lo: float
    hi: float
    px0: float
    px1: float
    log: bool

    def __call__(self, value: float) -> float:
        v = math.log10(value) if self.log else value
        if self.hi == self.lo:
            return (self.px0 + self.px1) / 2.0
        return self.px0 + (v - self.lo) / (self.hi - self.lo) * (self.px1 - self.px0)


def axis_mapping(values: Sequence[float], px0: float, px1: float, log: bool) -> AxisMapping:
    if log:
        transformed = [math.log10(v) for v in values]
    else:
        transformed = list(values)
    lo, hi = min(transformed), max(transformed)
    pad = (hi - lo) * RANGE_PAD or 0.5
    return AxisMapping(lo=lo - pad, hi=hi + pad, px0=px0, px1=px1, log=log)


def scatter_svg(
    x: Sequence[float],
    y: Sequence[float],
    *,
    xlabel: str,
    ylabel: str,
    title: str = "",
    xlog: bool = False,
    ylog: bool = False,
    line: Optional[tuple[tuple[float, float], tuple[float, float]]] = None,
    curve: Optional[Callable[[float], float]] = None,
    curve_samples: int = 100,
) -> str:
    """Render one scatter plot; exactly one <circle> per data point.

    ``line`` draws a straight segment between two data-space endpoints
    (used for the fitted scaling line); ``curve`` is sampled across the
    x range and drawn as a polyline (used for the fitted quadratic).
    """
    if len(x) != len(y):
        raise ValueError("x and y must have equal length")
    if len(x) < 3:
        raise DataError(f"need at least 3 points to plot, got {len(x)}")

    mx = axis_mapping(x, MARGIN_LEFT, WIDTH - MARGIN_RIGHT, xlog)
    my = axis_mapping(y, HEIGHT - MARGIN_BOTTOM, MARGIN_TOP, ylog)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{MARGIN_LEFT}" y1="{HEIGHT - MARGIN_BOTTOM}" '
        f'x2="{WIDTH - MARGIN_RIGHT}" y2="{HEIGHT - MARGIN_BOTTOM}" stroke="black"/>',
        f'<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" '
        f'x2="{MARGIN_LEFT}" y2="{HEIGHT - MARGIN_BOTTOM}" stroke="black"/>',
        f'<text x="{WIDTH / 2}" y="{HEIGHT - 12}" text-anchor="middle" '
        f'font-size="14">{xlabel}</text>',
        f'<text x="18" y="{HEIGHT / 2}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 18 {HEIGHT / 2})">{ylabel}</text>',
    ]
    if title:
        parts.append(
            f'<text x="{WIDTH / 2}" y="20" text-anchor="middle" font-size="15">{title}</text>'
        )

    for xi, yi in zip(x, y):
        parts.append(
            f'<circle cx="{mx(xi):.3f}" cy="{my(yi):.3f}" r="{POINT_RADIUS}" '
            f'fill="steelblue" fill-opacity="0.7"/>'
        )

    if line is not None:
        (xa, ya), (xb, yb) = line
        parts.append(
            f'<line x1="{mx(xa):.3f}" y1="{my(ya):.3f}" '
            f'x2="{mx(xb):.3f}" y2="{my(yb):.3f}" stroke="crimson" stroke-width="2"/>'
        )
    if curve is not None:
        lo_t, hi_t = mx.lo + (mx.hi - mx.lo) * RANGE_PAD, mx.hi - (mx.hi - mx.lo) * RANGE_PAD
        pts = []
        for i in range(curve_samples + 1):
            t = lo_t + (hi_t - lo_t) * i / curve_samples
            xi = 10.0**t if mx.log else t
            yi = curve(xi)
            if ylog and yi <= 0:
                continue
            pts.append(f"{mx(xi):.3f},{my(yi):.3f}")
        parts.append(
            f'<polyline points="{" ".join(pts)}" fill="none" '
            f'stroke="crimson" stroke-width="2"/>'
        )

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
