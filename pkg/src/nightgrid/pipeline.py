"""Corpus orchestration: parallel per-city analysis, serial fits, reports.

Per-city work (parse raster, extract hotspots, compactness) is an
embarrassingly parallel map; results are sorted by city_id before any
output is written, so the emitted files are byte-identical at every
parallelism level. Fits (scaling, growth models, index summaries) run
serially per region on the assembled table.
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import report as report_mod
from . import stats
from .compactness import compactness_indices
from .errors import DataError, NightgridError, UsageError
from .grid_io import CityRecord, CoordMode, load_city_table, parse_ascii_grid
from .hotspots import extract_hotspots

log = logging.getLogger(__name__)

THREADS_ENV_VAR = "NIGHTGRID_THREADS"
AREA_MODES = ("valid", "lit")
ALL_VARIANTS = tuple(stats.ModelSpec)
MIN_CITIES_FOR_SCALING = 3


@dataclass(frozen=True)
class PipelineConfig:
    """Everything cmd_analyze needs; flags override file values upstream."""

    city_table_path: str
    output_dir: str
    coord_mode: CoordMode = CoordMode.PLANAR_METERS
    regions_to_fit: tuple[str, ...] = ()  # empty = every region present
    model_variants: tuple[stats.ModelSpec, ...] = ALL_VARIANTS
    parallelism: int = 1
    emit_svg: bool = True
    emit_png: bool = False
    skip_errors: bool = False
    area_mode: str = "valid"  # city area = valid cells; "lit" = positive cells

    def __post_init__(self):
        if self.parallelism < 1:
            raise UsageError("parallelism must be >= 1")
        if self.area_mode not in AREA_MODES:
            raise UsageError(f"area_mode must be one of {'/'.join(AREA_MODES)}")


_CONFIG_BOOL_KEYS = {"emit_svg", "emit_png", "skip_errors"}


def load_config(path: str) -> PipelineConfig:
    """Parse a line-oriented key=value config file."""
    values: dict = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
                key, _, value = line.partition("=")
                values[key.strip()] = value.strip()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    return config_from_strings(values)


def config_from_strings(values: dict) -> PipelineConfig:
    kwargs: dict = {}
    for key, value in values.items():
        if key in ("city_table_path", "output_dir", "area_mode"):
            kwargs[key] = value
        elif key == "coord_mode":
            kwargs[key] = CoordMode(value)
        elif key == "parallelism":
            kwargs[key] = int(value)
        elif key in _CONFIG_BOOL_KEYS:
            kwargs[key] = value.lower() in ("1", "true", "yes")
        elif key == "regions_to_fit":
            kwargs[key] = tuple(r.strip() for r in value.split(",") if r.strip())
        elif key == "model_variants":
            kwargs[key] = tuple(
                stats.ModelSpec(int(v)) for v in value.split(",") if v.strip()
            )
        else:
            raise UsageError(f"unknown config key {key!r}")
    for required in ("city_table_path", "output_dir"):
        if required not in kwargs:
            raise UsageError(f"config is missing required key {required!r}")
    return PipelineConfig(**kwargs)


def analyze_city(record: CityRecord, coord_mode: CoordMode, area_mode: str) -> dict:
    """Full per-city chain: raster -> hotspots -> compactness -> row."""
    try:
        with open(record.raster_path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DataError(f"missing raster for city {record.city_id!r}: {exc}") from None
    grid = parse_ascii_grid(text, coord_mode)
    hs = extract_hotspots(grid)
    indices = compactness_indices(hs)
    if area_mode == "lit":
        n_area_cells = int((grid.valid_values > 0).sum())
    else:
        n_area_cells = grid.n_valid
    area_km2 = n_area_cells * hs.cell_area / 1e6
    if not area_km2 > 0:
        raise DataError(f"city {record.city_id!r} has zero {area_mode} area")
    return {
        "city_id": record.city_id,
        "region": record.region,
        "population": record.population,
        "gdp": record.gdp,
        "area_km2": area_km2,
        "n_hotspots": hs.count,
        "ct": hs.fractional_count,
        "pi": indices.pi,
        "ai": indices.ai,
    }


def _worker(task):
    record, coord_mode, area_mode = task
    try:
        return "ok", analyze_city(record, coord_mode, area_mode)
    except NightgridError as exc:
        return "err", {"city_id": record.city_id, "error": str(exc)}


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".10g")
    return str(value)


@dataclass
class AnalyzeResult:
    corpus_csv: str
    report_json: str
    errors_csv: str | None
    rows: list = field(default_factory=list)
    failures: list = field(default_factory=list)


def analyze(config: PipelineConfig) -> AnalyzeResult:
    """Run the whole pipeline and write corpus CSV, report JSON, plots."""
    parallelism = config.parallelism
    env = os.environ.get(THREADS_ENV_VAR)
    if env:
        try:
            parallelism = max(1, int(env))
        except ValueError:
            raise UsageError(f"{THREADS_ENV_VAR} must be an integer, got {env!r}") from None

    try:
        with open(config.city_table_path, encoding="utf-8") as fh:
            records = load_city_table(fh)
    except OSError as exc:
        raise DataError(f"cannot read city table: {exc}") from None
    if not records:
        raise DataError("city table contains no cities")

    tasks = [(rec, config.coord_mode, config.area_mode) for rec in records]
    if parallelism > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(_worker, tasks, chunksize=max(1, len(tasks) // (4 * parallelism))))
    else:
        results = [_worker(t) for t in tasks]

    rows = sorted((r for status, r in results if status == "ok"), key=lambda r: r["city_id"])
    failures = sorted((r for status, r in results if status == "err"), key=lambda r: r["city_id"])
    if failures and not config.skip_errors:
        first = failures[0]
        raise DataError(
            f"{len(failures)} city failure(s); first: {first['city_id']}: {first['error']}"
        )

    os.makedirs(config.output_dir, exist_ok=True)

    regions = config.regions_to_fit or tuple(sorted({r["region"] for r in rows}))
    region_fits: dict[str, dict] = {}
    residual_by_city: dict[str, tuple[float, bool]] = {}
    for region in regions:
        region_rows = [r for r in rows if r["region"] == region]
        entry: dict = {"n_cities": len(region_rows)}
        entry["scaling"] = _fit_scaling_entry(region, region_rows, residual_by_city)
        entry["models"], entry["selected_model"] = _fit_models_entry(
            region, region_rows, config.model_variants
        )
        entry["index_summaries"] = [
            s.to_json_dict()
            for s in stats.summarize_index(
                ((r["region"], r["pi"], r["ai"]) for r in region_rows), regions=[region]
            )
        ]
        region_fits[region] = entry

    corpus_csv = os.path.join(config.output_dir, "corpus_results.csv")
    with open(corpus_csv, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(report_mod.CORPUS_COLUMNS) + "\n")
        for r in rows:
            residual, outlier = residual_by_city.get(r["city_id"], (None, False))
            fields = [
                r["city_id"],
                r["region"],
                _fmt(r["population"]),
                _fmt(r["gdp"]),
                _fmt(r["area_km2"]),
                str(r["n_hotspots"]),
                _fmt(r["ct"]),
                _fmt(r["pi"]),
                _fmt(r["ai"]),
                _fmt(residual) if residual is not None else "",
                "true" if outlier else "false",
            ]
            fh.write(",".join(fields) + "\n")

    report_json = os.path.join(config.output_dir, "model_report.json")
    with open(report_json, "w", encoding="utf-8") as fh:
        json.dump({"regions": region_fits}, fh, indent=2, sort_keys=True)
        fh.write("\n")

    errors_csv = None
    if failures:
        errors_csv = os.path.join(config.output_dir, "errors.csv")
        with open(errors_csv, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("city_id,error\n")
            for f in failures:
                message = f["error"].replace('"', "'")
                fh.write(f'{f["city_id"]},"{message}"\n')

    if config.emit_svg and len(rows) >= 3:
        report_mod.write_report(rows, config.output_dir, png=config.emit_png)

    return AnalyzeResult(
        corpus_csv=corpus_csv,
        report_json=report_json,
        errors_csv=errors_csv,
        rows=rows,
        failures=failures,
    )


def _fit_scaling_entry(region, region_rows, residual_by_city) -> dict:
    if len(region_rows) < MIN_CITIES_FOR_SCALING:
        return {"error": f"region {region}: too few cities for scaling fit"}
    try:
        fit = stats.fit_scaling(
            (r["city_id"], r["population"], r["n_hotspots"]) for r in region_rows
        )
    except NightgridError as exc:
        return {"error": f"region {region}: {exc}"}
    outliers = set(fit.outlier_ids)
    for cid, z in zip(fit.city_ids, fit.std_residuals):
        residual_by_city[cid] = (float(z), cid in outliers)
    return fit.to_json_dict()


def _fit_models_entry(region, region_rows, variants):
    models: dict = {}
    best_name = None
    best_aic = None
    for variant in variants:
        try:
            fit = stats.fit_growth_model(
                (
                    (r["city_id"], r["gdp"] / r["area_km2"], r["population"], r["pi"], r["ai"])
                    for r in region_rows
                ),
                variant,
            )
        except NightgridError as exc:
            models[variant.name] = {"error": f"region {region}: {exc}"}
            continue
        models[variant.name] = fit.to_json_dict()
        if best_aic is None or fit.aic < best_aic:
            best_aic = fit.aic
            best_name = variant.name
    return models, best_name
