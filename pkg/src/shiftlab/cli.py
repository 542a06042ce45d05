"""Command-line interface.

One subcommand per experiment kind plus ``preset`` for named runs and
``report`` for figures-next-to-data output. Results go to stdout or
``--out`` as CSV (default) or JSON. Exit codes: 0 when the run's
contract checks pass, 1 when the run completes but a check fails, 2 for
configuration or usage errors. Set LAB_LOG (e.g. ``LAB_LOG=info``) to
get timing and progress logs on stderr; outputs stay byte-identical
either way.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .errors import ConfigInvalidError, ShiftLabError
from .experiments import PRESET_RUNS, ResultTable, run, run_preset

EXIT_OK = 0
EXIT_CHECKS_FAILED = 1
EXIT_CONFIG = 2

_KIND_COMMANDS = ("classify", "spectrum", "orbit", "aluthge", "certificate", "shadow")


def _setup_logging() -> None:
    level_name = os.environ.get("LAB_LOG", "").strip()
    if not level_name:
        return
    level = getattr(logging, level_name.upper(), None)
    if not isinstance(level, int):
        level = logging.INFO
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )


def _add_output_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", type=Path, default=None, help="output file (default: stdout)")
    parser.add_argument(
        "--format", choices=("csv", "json"), default="csv", help="output format"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shiftlab",
        description="weighted-shift spectra, mean-transform iteration, and shadowing runs",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    for kind in _KIND_COMMANDS:
        p = sub.add_parser(kind, help=f"run a '{kind}' experiment from a config file")
        p.add_argument("--config", type=Path, required=True, help="JSON config path")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        _add_output_flags(p)

    p = sub.add_parser("preset", help="run a named, self-contained experiment")
    p.add_argument("name", choices=sorted(PRESET_RUNS), help="preset run name")
    _add_output_flags(p)

    p = sub.add_parser("report", help="write the result and its figures to a directory")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", type=Path, help="JSON config path")
    src.add_argument("--preset", choices=sorted(PRESET_RUNS), help="preset run name")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out-dir", type=Path, required=True, help="directory for data and figures")
    p.add_argument(
        "--format", choices=("csv", "json"), default="csv", help="data file format"
    )
    return parser


def _load_config(path: Path, kind: str | None, seed: int | None) -> dict:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigInvalidError(str(path), f"cannot read config: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigInvalidError(str(path), f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ConfigInvalidError("/", "config must be a JSON object")
    if kind is not None and obj.get("kind") != kind:
        raise ConfigInvalidError(
            "/kind", f"config kind {obj.get('kind')!r} does not match subcommand '{kind}'"
        )
    if seed is not None:
        obj["seed"] = seed
    return obj


def _emit(table: ResultTable, out: Path | None, fmt: str) -> None:
    text = table.to_csv() if fmt == "csv" else table.to_json()
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")


def _table_exit(table: ResultTable) -> int:
    return EXIT_OK if table.checks_passed else EXIT_CHECKS_FAILED


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command in _KIND_COMMANDS:
            obj = _load_config(args.config, args.command, args.seed)
            table = run(obj)
            _emit(table, args.out, args.format)
            return _table_exit(table)

        if args.command == "preset":
            table = run_preset(args.name)
            _emit(table, args.out, args.format)
            return _table_exit(table)

        if args.command == "report":
            if args.preset is not None:
                table = run_preset(args.preset)
            else:
                obj = _load_config(args.config, None, args.seed)
                table = run(obj)
            # Defer the import so plain data runs never touch matplotlib.
            from .report import render_report

            out_dir = args.out_dir
            data_path = out_dir / f"result.{args.format}"
            _emit(table, data_path, args.format)
            figures = render_report(table, out_dir)
            for path in [data_path] + list(figures):
                sys.stdout.write(f"{path}\n")
            return _table_exit(table)
    except ConfigInvalidError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ShiftLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
