"""Command-line driver: ``cantorembed build|verify|render|export``.

Exit codes: 0 pass, 1 verification failure, 2 usage error, 3 construction
failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import export
from .embedding import DEFAULT_SAMPLES
from .schedule import ConstructionFailure, build, default_seed
from .state import ConstructionState, StateError
from .verify import parse_levels, run_suite

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_CONSTRUCTION = 0, 1, 2, 3
DEFAULT_STATE = "cantor_state.json"


class UsageError(Exception):
    pass


def _common(suppress: bool) -> argparse.ArgumentParser:
    # subcommands repeat the global flags; SUPPRESS keeps them from resetting
    # values given before the subcommand
    def d(value):
        return argparse.SUPPRESS if suppress else value

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--state", default=d(DEFAULT_STATE), help="state file (JSON)")
    common.add_argument("--seed", type=int, default=d(None),
                        help="generator seed (default: $CANTOR_SEED or 7)")
    common.add_argument("--depth", type=int, default=d(None), help="construction depth")
    common.add_argument("--samples", type=int, default=d(DEFAULT_SAMPLES),
                        help="Monte-Carlo sample count for embedding checks")
    common.add_argument("--levels", default=d(None), help="level filter, e.g. 2..4 or 1,3")
    return common


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cantorembed", parents=[_common(False)],
                                description="Build and check the rational tower construction.")
    common = _common(True)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("build", parents=[common], help="build or resume the construction")
    v = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    v.add_argument("--report", default=None, help="write the JSON report here")
    r = sub.add_parser("render", parents=[common], help="write an SVG figure")
    r.add_argument("--target", choices=export.TARGETS, required=True)
    r.add_argument("--level", type=int, default=None)
    r.add_argument("--out", required=True)
    e = sub.add_parser("export", parents=[common], help="write a CSV table")
    e.add_argument("--what", required=True, help="one of " + ", ".join(export.TABLES))
    e.add_argument("--out", default="-", help="CSV path, '-' for stdout")
    return p


def _load(path) -> ConstructionState:
    path = Path(path)
    if not path.exists():
        raise UsageError(f"state file {path} does not exist; run 'build' first")
    try:
        return ConstructionState.load(path)
    except StateError as exc:
        raise UsageError(str(exc)) from exc


def _write(out: str, text: str) -> None:
    if out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_build(args) -> int:
    if args.depth is None or args.depth < 1:
        raise UsageError("build needs --depth >= 1")
    path = Path(args.state)
    if path.exists():
        state = _load(path)
        if args.seed is not None and args.seed != state.seed:
            raise UsageError(f"state was built with seed {state.seed}, not {args.seed}")
        if state.depth >= args.depth:
            print(f"state already holds {state.depth} levels; nothing to do")
            return EXIT_OK
    else:
        seed = default_seed() if args.seed is None else args.seed
        state = ConstructionState(seed, None)

    def save_level(n, schedule, tower, cert):
        state.schedule = schedule
        state.record_level(n, tower, cert)
        state.save(path)
        print(f"level {n}: {len(tower.level(n))} poles, R = {schedule.R[n]:.6g}, "
              f"eps = {schedule.eps[n]:.3g}")

    try:
        build(args.depth, state.seed, schedule=state.schedule, on_level=save_level)
    except ConstructionFailure as exc:
        print(f"construction failed: {exc}", file=sys.stderr)
        return EXIT_CONSTRUCTION
    return EXIT_OK


def cmd_verify(args) -> int:
    state = _load(args.state)
    try:
        levels = parse_levels(args.levels, state.depth)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    report = run_suite(state, levels, samples=args.samples)
    print(report.summary())
    if args.report:
        Path(args.report).write_text(json.dumps(report.to_dict(), indent=1) + "\n")
    if not report.ok:
        bad = report.first_failure
        print(f"first failing invariant: {bad.name}"
              + ("" if bad.level is None else f" at level {bad.level}"), file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_render(args) -> int:
    state = _load(args.state)
    if args.target == "cantor":
        text = export.render_cantor(state)
    else:
        n = args.level if args.level is not None else state.depth
        if not 1 <= n <= state.depth:
            raise UsageError(f"level {n} is not in the state (depth {state.depth})")
        render = export.render_regions if args.target == "regions" else export.render_curve
        text = render(state, n)
    _write(args.out, text)
    return EXIT_OK


def cmd_export(args) -> int:
    if args.what not in export.TABLES:
        raise UsageError(f"unknown table {args.what!r}; choose from {', '.join(export.TABLES)}")
    state = _load(args.state)
    _write(args.out, export.table(state, args.what))
    return EXIT_OK


COMMANDS = {"build": cmd_build, "verify": cmd_verify, "render": cmd_render, "export": cmd_export}


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
