"""Command-line entry point.

Exit codes: 0 success, 1 usage or user error, 2 data or validation error,
3 internal error. Payloads go to stdout; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .errors import AnalysisFailed, DataError, UserError, ValidationRejected
from .ingest import load_meta, parse_dataset, validate_domain
from .render import render_km_plot_data, render_km_svg, render_table
from .schema import init_schema, register_dataset
from .standards import list_standards, register_builtins, run_standard
from .store import ResultFilter, open_store, query_results, results_to_csv, results_to_json

EXIT_OK, EXIT_USER, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(UserError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(f"{self.format_usage().strip()}\n{self.prog}: error: {message}")


def _pair(text: str) -> tuple[str, str]:
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    return key.strip(), value


def build_parser() -> argparse.ArgumentParser:
    db_default = os.environ.get("ARDM_DB")
    db_kwargs = {"default": db_default, "required": db_default is None, "metavar": "PATH"}

    parser = _Parser(prog="ardm", description="Analysis results data model engine.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("init", help="create the store and register built-in standards")
    p.add_argument("--db", **db_kwargs)

    p = sub.add_parser("ingest", help="parse, validate and register a CSV dataset")
    p.add_argument("--db", **db_kwargs)
    p.add_argument("--file", required=True, type=Path)
    p.add_argument("--domain", required=True, choices=["ADSL", "ADTTE", "ADAE"])
    p.add_argument("--meta", type=Path, help="JSON column descriptor overriding inference")

    p = sub.add_parser("standards", help="inspect registered standards")
    ssub = p.add_subparsers(dest="standards_command", required=True, parser_class=_Parser)
    sp = ssub.add_parser("list")
    sp.add_argument("--db", **db_kwargs)

    p = sub.add_parser("run", help="execute a standard against registered datasets")
    p.add_argument("--db", **db_kwargs)
    p.add_argument("--standard", required=True)
    p.add_argument("--version", dest="standard_version")
    p.add_argument("--param", action="append", type=_pair, default=[], metavar="K=V")
    p.add_argument("--dataset", action="extend", nargs="+", type=int, required=True, metavar="ID")

    p = sub.add_parser("query", help="search stored results")
    p.add_argument("--db", **db_kwargs)
    p.add_argument("--standard")
    p.add_argument("--run", type=int)
    p.add_argument("--dataset", type=int)
    p.add_argument("--group", action="append", type=_pair, default=[], metavar="K=V")
    p.add_argument("--variable")
    p.add_argument("--statistic", action="append", default=[])
    p.add_argument("--time-min", type=float)
    p.add_argument("--time-max", type=float)
    p.add_argument("--format", choices=["csv", "json"], default="csv")

    p = sub.add_parser("render", help="render stored results")
    rsub = p.add_subparsers(dest="render_command", required=True, parser_class=_Parser)
    rp = rsub.add_parser("km", help="Kaplan-Meier plot data (JSON) and optional SVG")
    rp.add_argument("--db", **db_kwargs)
    rp.add_argument("--run", type=int, required=True)
    rp.add_argument("--exclude-stratum", action="append", default=[], metavar="LABEL")
    rp.add_argument("--svg", type=Path)
    rp.add_argument("--out", type=Path)
    rp.add_argument("--format", choices=["json", "csv"], default="json")
    rp.add_argument("--width", type=int, default=640)
    rp.add_argument("--height", type=int, default=400)
    rp = rsub.add_parser("table", help="long or wide results table")
    rp.add_argument("--db", **db_kwargs)
    rp.add_argument("--run", type=int, required=True)
    rp.add_argument("--orientation", choices=["long", "wide"], required=True)
    rp.add_argument("--out", type=Path)
    rp.add_argument("--format", choices=["csv", "text"], default="csv")
    return parser


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _cmd_init(args: argparse.Namespace) -> int:
    with open_store(args.db, create=True) as store:
        descriptor = init_schema(store)
        register_builtins(store)
    print(json.dumps({"db": str(args.db), "version": descriptor.version,
                      "tables": [t.name for t in descriptor.tables]}))
    return EXIT_OK


def _cmd_ingest(args: argparse.Namespace) -> int:
    meta = load_meta(args.meta) if args.meta else None
    dataset = parse_dataset(args.file, args.domain, meta=meta)
    report = validate_domain(dataset)
    if not report.passed:
        raise ValidationRejected(report)
    for issue in report.issues:
        print(f"warning: {issue.column}: {issue.message}", file=sys.stderr)
    with open_store(args.db) as store:
        reg = register_dataset(store, dataset)
    print(json.dumps(reg.__dict__))
    return EXIT_OK


def _cmd_standards(args: argparse.Namespace) -> int:
    with open_store(args.db, readonly=True) as store:
        rows = [
            {"name": s.name, "version": s.version, "param_schema": [p.to_dict() for p in s.param_schema]}
            for s in list_standards(store)
        ]
    print(json.dumps(rows, indent=2))
    return EXIT_OK


def _cmd_run(args: argparse.Namespace) -> int:
    params = dict(args.param)
    with open_store(args.db) as store:
        run = run_standard(store, args.standard, params, args.dataset, version=args.standard_version)
    if run.status == "skipped_duplicate":
        print(f"skipped duplicate: identical run {run.run_id} already completed", file=sys.stderr)
    print(json.dumps({
        "run_id": run.run_id,
        "status": run.status,
        "standard": run.standard_name,
        "version": run.standard_version,
        "params": json.loads(run.canonical_params),
        "identity": run.identity,
    }))
    return EXIT_OK


def _cmd_query(args: argparse.Namespace) -> int:
    flt = ResultFilter(
        standard_name=args.standard,
        run_id=args.run,
        dataset_id=args.dataset,
        groups=list(args.group),
        variable=args.variable,
        statistic_names=list(args.statistic),
        time_min=args.time_min,
        time_max=args.time_max,
    )
    with open_store(args.db, readonly=True) as store:
        records = query_results(store, flt)
    sys.stdout.write(results_to_csv(records) if args.format == "csv" else results_to_json(records))
    return EXIT_OK


def _cmd_render(args: argparse.Namespace) -> int:
    with open_store(args.db, readonly=True) as store:
        if args.render_command == "km":
            plot = render_km_plot_data(store, args.run, args.exclude_stratum)
            if args.svg is not None:
                args.svg.write_text(render_km_svg(plot, args.width, args.height), encoding="utf-8")
            _emit(plot.to_json() if args.format == "json" else plot.to_csv(), args.out)
        else:
            table = render_table(store, args.run, args.orientation)
            _emit(table.to_csv() if args.format == "csv" else table.to_text(), args.out)
    return EXIT_OK


_COMMANDS = {
    "init": _cmd_init,
    "ingest": _cmd_ingest,
    "standards": _cmd_standards,
    "run": _cmd_run,
    "query": _cmd_query,
    "render": _cmd_render,
}


def main(argv: Sequence[str] | None = None) -> int:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    pkg_log = logging.getLogger("ardm")
    pkg_log.addHandler(handler)
    try:
        return _dispatch(argv)
    finally:
        pkg_log.removeHandler(handler)


def _dispatch(argv: Sequence[str] | None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USER
    except ValidationRejected as exc:
        print(json.dumps(exc.report.to_dict(), indent=2), file=sys.stderr)
        return EXIT_DATA
    except AnalysisFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except UserError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
