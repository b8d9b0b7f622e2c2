"""Model fitting: scaling law, outlier flagging, growth regressions.

One QR-based least-squares kernel backs everything. The scaling fit is
OLS of ln(count) on ln(population) with outliers flagged where the
standardized residual leaves [-2, 2]. The growth regressions are the
five variants of ln(GDP/km^2) on ln(population) plus a compactness index
and optionally its square; models are compared by AIC, fixed here as
n*ln(rss/n) + 2*(p+1) (the error variance counts as a parameter; only the
cross-model ordering is meaningful).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import CollinearityError, DataError
from .special import f_sf, student_t_sf_two_sided

log = logging.getLogger(__name__)

_RANK_TOL = 1e-10
OUTLIER_Z = 2.0
HISTOGRAM_BIN_WIDTH = 0.05


@dataclass(frozen=True)
class OLSResult:
    coefficients: np.ndarray
    std_errors: np.ndarray
    residuals: np.ndarray
    rss: float
    r2: float


def ols(design: np.ndarray, response: np.ndarray) -> OLSResult:
    """Least squares via QR; the design must carry its constant column.

    R-squared is computed about the response mean, so it is only
    meaningful when the design actually contains a constant.
    """
    x = np.asarray(design, dtype=np.float64)
    y = np.asarray(response, dtype=np.float64)
    n, p = x.shape
    if n <= p:
        raise DataError(f"need more rows ({n}) than covariates ({p})")
    q, r = np.linalg.qr(x)
    diag = np.abs(np.diag(r))
    if diag.min() <= diag.max() * _RANK_TOL:
        raise CollinearityError("collinear covariates")
    coef = np.linalg.solve(r, q.T @ y)
    resid = y - x @ coef
    rss = float(resid @ resid)
    tss = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if tss == 0.0 else 1.0 - rss / tss
    r_inv = np.linalg.solve(r, np.eye(p))
    xtx_inv = r_inv @ r_inv.T
    sigma2 = rss / (n - p)
    std_errors = np.sqrt(np.diag(xtx_inv) * sigma2)
    return OLSResult(coefficients=coef, std_errors=std_errors, residuals=resid, rss=rss, r2=r2)


@dataclass(frozen=True)
class ScalingFit:
    """Log-log OLS of hotspot count against population."""

    city_ids: tuple[str, ...]
    alpha: float
    beta: float
    log_intercept: float
    r2: float
    residuals: np.ndarray
    std_residuals: np.ndarray
    outlier_ids: tuple[str, ...]

    def to_json_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "log_intercept": self.log_intercept,
            "r2": self.r2,
            "n_cities": len(self.city_ids),
            "outlier_ids": list(self.outlier_ids),
        }


def fit_scaling(cities: Iterable[tuple[str, float, float]]) -> ScalingFit:
    """Fit N = alpha * P^beta by OLS in log space.

    ``cities`` yields (city_id, population, hotspot_count); each must be
    positive. Standardized residuals divide by the sample standard
    deviation of the raw residuals, and |z| > 2 marks an outlier.
    """
    rows = list(cities)
    if len(rows) < 3:
        raise DataError(f"scaling fit needs at least 3 cities, got {len(rows)}")
    for city_id, population, count in rows:
        if not population > 0:
            raise DataError(f"non-positive population for city {city_id!r}")
        if not count > 0:
            raise DataError(f"non-positive hotspot count for city {city_id!r}")
    ids = tuple(r[0] for r in rows)
    ln_p = np.log([r[1] for r in rows])
    ln_n = np.log([r[2] for r in rows])
    design = np.column_stack((np.ones(len(rows)), ln_p))
    fit = ols(design, ln_n)
    resid = fit.residuals
    s = float(resid.std(ddof=1))
    # An essentially perfect fit leaves only rounding dust; studentizing
    # that dust would flag arbitrary cities, so treat it as zero spread.
    scale = max(1.0, float(np.abs(ln_n).max()))
    if s <= 1e-12 * scale:
        z = np.zeros_like(resid)
    else:
        z = resid / s
    outliers = tuple(cid for cid, zi in zip(ids, z) if abs(zi) > OUTLIER_Z)
    return ScalingFit(
        city_ids=ids,
        alpha=float(math.exp(fit.coefficients[0])),
        beta=float(fit.coefficients[1]),
        log_intercept=float(fit.coefficients[0]),
        r2=fit.r2,
        residuals=resid,
        std_residuals=z,
        outlier_ids=outliers,
    )


class ModelSpec(Enum):
    """The five growth-regression variants (one per table column)."""

    M1_pop_only = 1
    M2_pop_pi = 2
    M3_pop_pi_sq = 3
    M4_pop_ai = 4
    M5_pop_ai_sq = 5

    @property
    def index_name(self) -> Optional[str]:
        if self in (ModelSpec.M2_pop_pi, ModelSpec.M3_pop_pi_sq):
            return "pi"
        if self in (ModelSpec.M4_pop_ai, ModelSpec.M5_pop_ai_sq):
            return "ai"
        return None

    @property
    def quadratic(self) -> bool:
        return self in (ModelSpec.M3_pop_pi_sq, ModelSpec.M5_pop_ai_sq)


@dataclass(frozen=True)
class RegressionFit:
    """One fitted growth-model variant."""

    variant: ModelSpec
    coefficients: dict[str, float]
    std_errors: dict[str, float]
    t_values: dict[str, float]
    p_values: dict[str, float]
    r2: float
    adj_r2: float
    aic: float
    f_statistic: float
    f_pvalue: float
    n_obs: int
    optimal_compactness: Optional[float]

    def to_json_dict(self) -> dict:
        return {
            "variant": self.variant.name,
            "coefficients": self.coefficients,
            "std_errors": self.std_errors,
            "t_values": self.t_values,
            "p_values": self.p_values,
            "r2": self.r2,
            "adj_r2": self.adj_r2,
            "aic": self.aic,
            "f_statistic": self.f_statistic,
            "f_pvalue": self.f_pvalue,
            "n_obs": self.n_obs,
            "optimal_compactness": self.optimal_compactness,
        }


def aic(rss: float, n: int, p: int) -> float:
    """n*ln(rss/n) + 2*(p+1), counting the error variance as a parameter."""
    if rss <= 0:
        raise DataError("perfect fit: AIC undefined under Gaussian likelihood")
    if not n > p >= 1:
        raise DataError(f"aic requires n > p >= 1, got n={n}, p={p}")
    return n * math.log(rss / n) + 2.0 * (p + 1)


def t_pvalue(t: float, dof: int) -> float:
    """Two-sided p-value of a t statistic."""
    return student_t_sf_two_sided(t, dof)


def f_statistic(r2: float, n: int, k: int) -> tuple[float, float]:
    """Overall F test from R-squared: k slopes, n observations."""
    if not 0.0 <= r2 < 1.0:
        if r2 >= 1.0:
            raise DataError("perfect fit")
        raise DataError(f"r2 out of range: {r2}")
    if not n > k + 1 >= 2:
        raise DataError(f"f_statistic requires n > k+1 >= 2, got n={n}, k={k}")
    f = (r2 / k) / ((1.0 - r2) / (n - k - 1))
    return f, f_sf(f, k, n - k - 1)


def vertex_of_quadratic(b_lin: float, b_quad: float) -> Optional[float]:
    """Maximizer of b_lin*c + b_quad*c^2, present only for b_quad < 0."""
    if b_quad >= 0:
        return None
    return -b_lin / (2.0 * b_quad)


def fit_growth_model(
    cities: Iterable[tuple[str, float, float, float, float]],
    spec: ModelSpec,
) -> RegressionFit:
    """Fit one variant of ln(Y) = b1 + b2*ln(Pop) + b3*Com + b4*Com^2.

    ``cities`` yields (city_id, gdp_per_km2, population, pi, ai). The
    compactness column used (if any) follows the variant.
    """
    rows = list(cities)
    names = ["constant", "ln_pop"]
    index = spec.index_name
    if index is not None:
        names.append("com")
        if spec.quadratic:
            names.append("com_sq")
    p = len(names)
    if len(rows) < p + 2:
        raise DataError(f"{spec.name} needs at least {p + 2} cities, got {len(rows)}")
    for city_id, gdp_per_km2, population, pi, ai in rows:
        if not gdp_per_km2 > 0:
            raise DataError(f"non-positive gdp_per_km2 for city {city_id!r}")
        if not population > 0:
            raise DataError(f"non-positive population for city {city_id!r}")
        for label, value in (("pi", pi), ("ai", ai)):
            if not 0.0 <= value <= 1.0:
                raise DataError(f"{label} out of [0,1] for city {city_id!r}: {value}")

    n = len(rows)
    y = np.log([r[1] for r in rows])
    cols = [np.ones(n), np.log([r[2] for r in rows])]
    if index is not None:
        com = np.array([r[3] if index == "pi" else r[4] for r in rows])
        cols.append(com)
        if spec.quadratic:
            cols.append(com**2)
    fit = ols(np.column_stack(cols), y)

    dof = n - p
    coeffs = dict(zip(names, (float(c) for c in fit.coefficients)))
    std_errors = dict(zip(names, (float(s) for s in fit.std_errors)))
    t_values = {k: coeffs[k] / std_errors[k] for k in names}
    p_values = {k: t_pvalue(t_values[k], dof) for k in names}
    f_stat, f_p = f_statistic(fit.r2, n, p - 1)
    optimal = None
    if spec.quadratic:
        optimal = vertex_of_quadratic(coeffs["com"], coeffs["com_sq"])
    return RegressionFit(
        variant=spec,
        coefficients=coeffs,
        std_errors=std_errors,
        t_values=t_values,
        p_values=p_values,
        r2=fit.r2,
        adj_r2=1.0 - (1.0 - fit.r2) * (n - 1) / (n - p),
        aic=aic(fit.rss, n, p),
        f_statistic=f_stat,
        f_pvalue=f_p,
        n_obs=n,
        optimal_compactness=optimal,
    )


@dataclass(frozen=True)
class IndexSummary:
    """Per-region distribution summary of one compactness index."""

    region: str
    index: str
    mean: float
    median: float
    histogram: tuple[int, ...]  # 20 bins of width 0.05 over [0, 1]

    def to_json_dict(self) -> dict:
        return {
            "region": self.region,
            "index": self.index,
            "mean": self.mean,
            "median": self.median,
            "bin_width": HISTOGRAM_BIN_WIDTH,
            "histogram": list(self.histogram),
        }


def summarize_index(
    cities: Iterable[tuple[str, float, float]],
    regions: Optional[Sequence[str]] = None,
) -> list[IndexSummary]:
    """Mean, median and fixed-bin histogram of PI and AI per region.

    ``cities`` yields (region, pi, ai). Requested regions with no cities
    are omitted with a warning. Medians use the midpoint rule for even
    counts (that is what np.median does).
    """
    rows = list(cities)
    by_region: dict[str, list[tuple[float, float]]] = {}
    for region, pi, ai in rows:
        by_region.setdefault(region, []).append((pi, ai))
    wanted = list(regions) if regions is not None else sorted(by_region)
    edges = np.linspace(0.0, 1.0, int(round(1.0 / HISTOGRAM_BIN_WIDTH)) + 1)
    out: list[IndexSummary] = []
    for region in wanted:
        if region not in by_region:
            log.warning("summarize_index: no cities in region %r, omitted", region)
            continue
        values = np.array(by_region[region])
        for idx, column in (("PI", values[:, 0]), ("AI", values[:, 1])):
            counts, _ = np.histogram(column, bins=edges)
            out.append(
                IndexSummary(
                    region=region,
                    index=idx,
                    mean=float(column.mean()),
                    median=float(np.median(column)),
                    histogram=tuple(int(c) for c in counts),
                )
            )
    return out
