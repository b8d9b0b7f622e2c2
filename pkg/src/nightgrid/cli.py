"""Command line interface.

Subcommands mirror the analysis chain: per-raster `hotspots` and
`compact`, corpus-level `fit-scaling` and `regress`, `synth` for
generating test corpora, `analyze` for the full pipeline and `report`
for the plot files. Exit codes: 0 success, 1 usage error, 2 data error,
3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

from . import __version__, pipeline, report, stats, synth
from .compactness import compactness_indices
from .errors import DataError, UsageError
from .grid_io import CoordMode, parse_ascii_grid
from .hotspots import extract_hotspots, hotspot_rows

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read_grid(path: str, coord_mode: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read raster {path}: {exc}") from None
    return parse_ascii_grid(text, coord_mode)


def _city_id_from(path: str) -> str:
    import os

    return os.path.splitext(os.path.basename(path))[0]


def cmd_hotspots(args) -> int:
    grid = _read_grid(args.raster, args.coord_mode)
    hs = extract_hotspots(grid)
    if args.cells_csv:
        with open(args.cells_csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=["row", "col", "x_m", "y_m", "value"])
            writer.writeheader()
            writer.writerows(hotspot_rows(hs))
    print(json.dumps(hs.summary(_city_id_from(args.raster), grid.n_valid), indent=2))
    return EXIT_OK


def cmd_compact(args) -> int:
    grid = _read_grid(args.raster, args.coord_mode)
    indices = compactness_indices(extract_hotspots(grid))
    print(json.dumps(indices.to_json_dict(_city_id_from(args.raster)), indent=2))
    return EXIT_OK


def _load_corpus(path: str) -> list[dict]:
    try:
        return report.load_corpus_csv(path)
    except OSError as exc:
        raise DataError(f"cannot read corpus {path}: {exc}") from None


def cmd_fit_scaling(args) -> int:
    rows = _load_corpus(args.corpus)
    if args.region:
        rows = [r for r in rows if r["region"] == args.region]
        if not rows:
            raise DataError(f"no cities in region {args.region!r}")
    fit = stats.fit_scaling((r["city_id"], r["population"], r["n_hotspots"]) for r in rows)
    print(json.dumps(fit.to_json_dict(), indent=2))
    return EXIT_OK


_MODEL_INDEX = {1: None, 2: "pi", 3: "pi", 4: "ai", 5: "ai"}


def cmd_regress(args) -> int:
    if args.index is not None:
        expected = _MODEL_INDEX[args.model]
        if expected is not None and args.index != expected:
            raise UsageError(
                f"model {args.model} uses the {expected} index, not {args.index}"
            )
    rows = _load_corpus(args.corpus)
    if args.region:
        rows = [r for r in rows if r["region"] == args.region]
    fit = stats.fit_growth_model(
        (
            (r["city_id"], r["gdp"] / r["area_km2"], r["population"], r["pi"], r["ai"])
            for r in rows
        ),
        stats.ModelSpec(args.model),
    )
    print(json.dumps(fit.to_json_dict(), indent=2))
    return EXIT_OK


def cmd_synth(args) -> int:
    try:
        with open(args.spec, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read spec {args.spec}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"invalid JSON in {args.spec}: {exc}") from None
    spec = synth.corpus_spec_from_dict(data)
    table_path, truth_path = synth.write_corpus(spec, args.out)
    print(json.dumps({"city_table": table_path, "ground_truth": truth_path}, indent=2))
    return EXIT_OK


def cmd_analyze(args) -> int:
    if args.config:
        config = pipeline.load_config(args.config)
    else:
        if not (args.city_table and args.out):
            raise UsageError("analyze needs either a config file or --city-table and --out")
        config = pipeline.PipelineConfig(city_table_path="", output_dir="")
    overrides = {}
    if args.city_table:
        overrides["city_table_path"] = args.city_table
    if args.out:
        overrides["output_dir"] = args.out
    if args.coord_mode:
        overrides["coord_mode"] = CoordMode(args.coord_mode)
    if args.parallelism is not None:
        overrides["parallelism"] = args.parallelism
    if args.skip_errors:
        overrides["skip_errors"] = True
    if args.no_svg:
        overrides["emit_svg"] = False
    if args.png:
        overrides["emit_png"] = True
    if overrides:
        from dataclasses import replace

        config = replace(config, **overrides)
    if not config.city_table_path or not config.output_dir:
        raise UsageError("city_table_path and output_dir are required")
    result = pipeline.analyze(config)
    print(
        json.dumps(
            {
                "corpus_csv": result.corpus_csv,
                "report_json": result.report_json,
                "errors_csv": result.errors_csv,
                "n_cities": len(result.rows),
                "n_failures": len(result.failures),
            },
            indent=2,
        )
    )
    return EXIT_OK


def cmd_report(args) -> int:
    rows = _load_corpus(args.corpus)
    written = report.write_report(rows, args.out, png=not args.no_png)
    print(json.dumps({"written": written}, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nightgrid", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_coord_mode(p):
        p.add_argument(
            "--coord-mode",
            choices=[m.value for m in CoordMode],
            default=CoordMode.PLANAR_METERS.value,
        )

    p = sub.add_parser("hotspots", help="extract hotspots from one raster")
    p.add_argument("raster")
    add_coord_mode(p)
    p.add_argument("--cells-csv", help="write per-cell CSV here")
    p.set_defaults(func=cmd_hotspots)

    p = sub.add_parser("compact", help="compactness indices of one raster")
    p.add_argument("raster")
    add_coord_mode(p)
    p.set_defaults(func=cmd_compact)

    p = sub.add_parser("fit-scaling", help="scaling-law fit from a corpus CSV")
    p.add_argument("corpus")
    p.add_argument("--region")
    p.set_defaults(func=cmd_fit_scaling)

    p = sub.add_parser("regress", help="growth-model regression from a corpus CSV")
    p.add_argument("corpus")
    p.add_argument("--index", choices=["pi", "ai"])
    p.add_argument("--model", type=int, choices=[1, 2, 3, 4, 5], required=True)
    p.add_argument("--region")
    p.set_defaults(func=cmd_regress)

    p = sub.add_parser("synth", help="generate a synthetic corpus from a JSON spec")
    p.add_argument("spec")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("analyze", help="full pipeline over a city table")
    p.add_argument("config", nargs="?", help="key=value config file")
    p.add_argument("--city-table")
    p.add_argument("--out")
    p.add_argument("--coord-mode", choices=[m.value for m in CoordMode])
    p.add_argument("--parallelism", type=int)
    p.add_argument("--skip-errors", action="store_true")
    p.add_argument("--no-svg", action="store_true")
    p.add_argument("--png", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("report", help="render plots from a corpus CSV")
    p.add_argument("corpus")
    p.add_argument("out")
    p.add_argument("--no-png", action="store_true")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
