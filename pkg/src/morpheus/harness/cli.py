"""Command line entry point: ``morpheus {run,check,sweep,fixtures}``.

Exit status is 0 when every checker passes, 1 on a checker violation and
2 on a configuration or input error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from ..config import ConfigInvalid
from ..messages import to_json
from ..simnet import Trace, run
from .checks import run_checks
from .config import load_config
from .fixtures import FIXTURES, corrupted_trace, fixture_messages
from .metrics import report
from .sweep import aggregate, cases, sweep

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG = 0, 1, 2


def _int_list(s: str) -> list[int]:
    try:
        return [int(x) for x in s.split(",") if x.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}") from e


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="morpheus", description="Simulate and check the consensus protocol.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate a scenario, write its trace and metrics, run the checkers")
    r.add_argument("--config", required=True, type=Path)
    r.add_argument("--seed", type=int, help="override the scenario seed")
    r.add_argument("--out", type=Path, default=Path("."), help="directory for trace.jsonl and metrics.json")
    r.add_argument("--format", choices=("table", "jsonl"), default="table")

    c = sub.add_parser("check", help="run the checkers on a stored trace")
    c.add_argument("--trace", required=True, type=Path)
    c.add_argument("--format", choices=("table", "jsonl"), default="table")

    s = sub.add_parser("sweep", help="run a matrix of seeded scenarios with every Byzantine strategy")
    s.add_argument("--n", type=_int_list, default=[4, 7, 10])
    s.add_argument("--seeds", type=int, default=10)
    s.add_argument("--strategies", type=lambda x: x.split(","), default=None)
    s.add_argument("--workers", type=int, default=None)
    s.add_argument("--format", choices=("table", "jsonl"), default="table")

    f = sub.add_parser("fixtures", help="write the hand-built ordering fixtures and the corrupted trace")
    f.add_argument("--out", type=Path, default=Path("fixtures"))
    return p


def _print_verdicts(verdicts, fmt: str, out) -> None:
    for v in verdicts:
        if fmt == "jsonl":
            print(json.dumps({"check": v.name, "ok": v.ok, "violations": v.violations, "stats": v.stats}, default=str), file=out)
        else:
            print(str(v), file=out)


def _table(rows: list[dict]) -> str:
    cols = list(dict.fromkeys(k for r in rows for k in r))
    width = {c: max(len(c), *(len(str(r.get(c, ""))) for r in rows)) for c in cols}
    lines = ["  ".join(c.ljust(width[c]) for c in cols)]
    lines += ["  ".join(str(r.get(c, "")).ljust(width[c]) for c in cols) for r in rows]
    return "\n".join(lines)


def cmd_run(args, out) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    trace = run(cfg)
    args.out.mkdir(parents=True, exist_ok=True)
    trace.write(args.out / "trace.jsonl")
    metrics = report(trace)
    (args.out / "metrics.json").write_text(json.dumps(metrics, indent=2, default=str) + "\n")
    verdicts = run_checks(trace)
    _print_verdicts(verdicts, args.format, out)
    return EXIT_OK if all(v.ok for v in verdicts) else EXIT_VIOLATION


def cmd_check(args, out) -> int:
    try:
        trace = Trace.read(args.trace)
    except (OSError, ValueError, KeyError) as e:
        raise ConfigInvalid(f"{args.trace}: {e}") from e
    verdicts = run_checks(trace)
    _print_verdicts(verdicts, args.format, out)
    return EXIT_OK if all(v.ok for v in verdicts) else EXIT_VIOLATION


def cmd_sweep(args, out) -> int:
    results = sweep(cases(args.n, args.seeds, args.strategies), args.workers)
    rows = aggregate(results)
    if args.format == "jsonl":
        for row in rows:
            print(json.dumps(row), file=out)
    else:
        print(_table(rows), file=out)
    for r in results:
        for v in r.violations:
            print(f"n={r.case.n} {r.case.strategy} seed={r.case.seed}: {v}", file=out)
    return EXIT_OK if all(r.ok for r in results) else EXIT_VIOLATION


def cmd_fixtures(args, out) -> int:
    args.out.mkdir(parents=True, exist_ok=True)
    for name in FIXTURES:
        path = args.out / f"{name}.jsonl"
        with open(path, "w") as fh:
            for m in fixture_messages(name):
                fh.write(json.dumps(to_json(m), sort_keys=True) + "\n")
        print(path, file=out)
    path = args.out / "corrupted.trc"
    corrupted_trace().write(path)
    print(path, file=out)
    return EXIT_OK


COMMANDS = {"run": cmd_run, "check": cmd_check, "sweep": cmd_sweep, "fixtures": cmd_fixtures}


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_CONFIG
    try:
        return COMMANDS[args.command](args, out)
    except ConfigInvalid as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    return main(argv)


if __name__ == "__main__":
    sys.exit(main())
