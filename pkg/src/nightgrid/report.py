"""Static result plots rendered from an exported corpus CSV.

Two plot families: the log-log hotspot-count vs population scatter with
its fitted scaling line, and compactness vs ln(GDP/km^2) scatters with
the fitted quadratic (population held at the corpus mean, since the
growth model controls for it). Each plot is written both as plain SVG
(diffable, element counts are testable) and, optionally, as a matplotlib
PNG for quick viewing.
"""

from __future__ import annotations

import csv
import math
import os
from typing import Optional

from . import stats, svgplot
from .errors import CollinearityError, DataError

CORPUS_COLUMNS = (
    "city_id",
    "region",
    "population",
    "gdp",
    "area_km2",
    "n_hotspots",
    "ct",
    "pi",
    "ai",
    "scaling_residual",
    "outlier",
)


def load_corpus_csv(path: str) -> list[dict]:
    """Read the pipeline's corpus results CSV back into typed rows."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != CORPUS_COLUMNS:
            raise DataError(
                f"corpus CSV {path} must have columns {','.join(CORPUS_COLUMNS)}"
            )
        rows = []
        for raw in reader:
            row = dict(raw)
            for key in ("population", "gdp", "area_km2", "ct", "pi", "ai"):
                row[key] = float(raw[key])
            row["n_hotspots"] = int(raw["n_hotspots"])
            row["scaling_residual"] = (
                float(raw["scaling_residual"]) if raw["scaling_residual"] else None
            )
            row["outlier"] = raw["outlier"] == "true"
            rows.append(row)
    return rows


def _quadratic_curve(rows: list[dict], index: str) -> Optional:
    variant = stats.ModelSpec.M3_pop_pi_sq if index == "pi" else stats.ModelSpec.M5_pop_ai_sq
    try:
        fit = stats.fit_growth_model(
            (
                (r["city_id"], r["gdp"] / r["area_km2"], r["population"], r["pi"], r["ai"])
                for r in rows
            ),
            variant,
        )
    except (CollinearityError, DataError):
        return None
    mean_ln_pop = sum(math.log(r["population"]) for r in rows) / len(rows)
    c = fit.coefficients
    base = c["constant"] + c["ln_pop"] * mean_ln_pop
    return lambda com: base + c["com"] * com + c["com_sq"] * com**2


def write_report(rows: list[dict], out_dir: str, png: bool = True) -> list[str]:
    """Render all report figures; returns the written file paths."""
    if len(rows) < 3:
        raise DataError(f"report needs at least 3 corpus rows, got {len(rows)}")
    os.makedirs(out_dir, exist_ok=True)
    written: list[str] = []

    populations = [r["population"] for r in rows]
    counts = [r["n_hotspots"] for r in rows]
    fit = stats.fit_scaling((r["city_id"], r["population"], r["n_hotspots"]) for r in rows)
    p_lo, p_hi = min(populations), max(populations)
    line = (
        (p_lo, fit.alpha * p_lo**fit.beta),
        (p_hi, fit.alpha * p_hi**fit.beta),
    )
    svg = svgplot.scatter_svg(
        populations,
        counts,
        xlabel="population",
        ylabel="hotspot count",
        title=f"N = {fit.alpha:.3g} P^{fit.beta:.3g} (R2 = {fit.r2:.3f})",
        xlog=True,
        ylog=True,
        line=line,
    )
    written.append(_write(out_dir, "scaling_scatter.svg", svg))

    ln_y = [math.log(r["gdp"] / r["area_km2"]) for r in rows]
    for index in ("pi", "ai"):
        com = [r[index] for r in rows]
        svg = svgplot.scatter_svg(
            com,
            ln_y,
            xlabel=f"{index.upper()} compactness",
            ylabel="ln(GDP per km2)",
            title=f"{index.upper()} vs economic density",
            curve=_quadratic_curve(rows, index),
        )
        written.append(_write(out_dir, f"{index}_gdp_scatter.svg", svg))

    if png:
        written.extend(_write_png_figures(rows, out_dir, fit))
    return written


def _write(out_dir: str, name: str, text: str) -> str:
    path = os.path.join(out_dir, name)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return path


def _write_png_figures(rows: list[dict], out_dir: str, fit) -> list[str]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    written = []
    populations = np.array([r["population"] for r in rows])
    counts = np.array([r["n_hotspots"] for r in rows])

    fig, ax = plt.subplots(figsize=(8, 6))
    ax.loglog(populations, counts, "o", alpha=0.6)
    ps = np.geomspace(populations.min(), populations.max(), 100)
    ax.loglog(ps, fit.alpha * ps**fit.beta, "-", color="crimson")
    ax.set_xlabel("population")
    ax.set_ylabel("hotspot count")
    ax.set_title(f"N = {fit.alpha:.3g} P^{fit.beta:.3g} (R$^2$ = {fit.r2:.3f})")
    path = os.path.join(out_dir, "scaling_scatter.png")
    fig.savefig(path, dpi=100)
    plt.close(fig)
    written.append(path)

    ln_y = np.array([math.log(r["gdp"] / r["area_km2"]) for r in rows])
    for index in ("pi", "ai"):
        com = np.array([r[index] for r in rows])
        fig, ax = plt.subplots(figsize=(8, 6))
        ax.plot(com, ln_y, "o", alpha=0.6)
        curve = _quadratic_curve(rows, index)
        if curve is not None:
            cs = np.linspace(com.min(), com.max(), 100)
            ax.plot(cs, [curve(c) for c in cs], "-", color="crimson")
        ax.set_xlabel(f"{index.upper()} compactness")
        ax.set_ylabel("ln(GDP per km$^2$)")
        path = os.path.join(out_dir, f"{index}_gdp_scatter.png")
        fig.savefig(path, dpi=100)
        plt.close(fig)
        written.append(path)
    return written
