"""Command-line entry point: ``ampforge <task> --in problem.json``."""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from . import __version__
from .errors import AmpforgeError, ParseError, SchemaError, VersionUnsupported
from .io import TASKS, dump_report, parse_problem, run_task

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_INPUT = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ampforge", description="Quantum amplification feasibility toolkit.")
    parser.add_argument("--version", action="version", version=f"ampforge {__version__}")
    parser.add_argument("task", choices=TASKS, help="task to run; must match the problem file's task")
    parser.add_argument("--in", dest="input", required=True, help="problem JSON file ('-' for stdin)")
    parser.add_argument("--out", help="write the JSON report here instead of stdout")
    parser.add_argument("--csv", help="write the task's table (homodyne, channel) as CSV")
    parser.add_argument("--seed", type=int, help="override params.seed")
    parser.add_argument("--tol", type=float, help="override params.tol")
    return parser


def _diagnostic(exc: Exception) -> str:
    body = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, SchemaError):
        body["path"] = exc.path
        body["message"] = exc.message
    return json.dumps(body, sort_keys=True)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.input == "-":
            text = sys.stdin.read()
        else:
            with open(args.input, "rb") as fh:
                raw = fh.read()
            try:
                text = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise ParseError(f"input is not UTF-8: {exc}") from exc
        problem = parse_problem(text)
        if problem.task != args.task:
            raise SchemaError("task", f"file declares {problem.task!r} but {args.task!r} was requested")
        if args.seed is not None:
            problem.params["seed"] = args.seed
        if args.tol is not None:
            if not args.tol > 0:
                raise SchemaError("--tol", "tolerance must be positive")
            problem.params["tol"] = args.tol
    except OSError as exc:
        print(json.dumps({"error": "OSError", "message": str(exc)}, sort_keys=True), file=sys.stderr)
        return EXIT_INPUT
    except (ParseError, SchemaError, VersionUnsupported) as exc:
        print(_diagnostic(exc), file=sys.stderr)
        return EXIT_INPUT

    try:
        report, csv_text = run_task(problem, text)
    except SchemaError as exc:
        print(_diagnostic(exc), file=sys.stderr)
        return EXIT_INPUT
    except (AmpforgeError, ValueError, ArithmeticError) as exc:
        print(_diagnostic(exc), file=sys.stderr)
        return EXIT_RUNTIME

    text_out = dump_report(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text_out)
    else:
        sys.stdout.write(text_out)
    if args.csv:
        if csv_text is None:
            print(json.dumps({"warning": f"task {args.task!r} produces no table"}), file=sys.stderr)
        else:
            with open(args.csv, "w", encoding="utf-8", newline="") as fh:
                fh.write(csv_text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
