"""Command line: ``python -m src.cli run`` and ``python -m src.cli bench``."""
from __future__ import annotations

import argparse
import logging
import sys

from pydantic import ValidationError

from src.config import BenchSettings, DiffMode, EngineName, EngineSettings, MplusPolicy, RunSettings
from src.exceptions import KanrenError, QueryTimeout
from src.harness import bench, diff, execute, write_csv
from src.models import make_session
from src.protocol import trace_logger
from src.rellib import relations
from src.sexpr import compile_script, parse
from src.terms import show

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_TIMEOUT = 2
EXIT_MISMATCH = 3


def _csv_list(value: str) -> list[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="python -m src.cli", description="Run and benchmark relational queries")
    parser.add_argument("-v", "--verbose", action="store_true", help="log at INFO")
    parser.add_argument("--trace", action="store_true", help="log every protocol message")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a query script")
    run.add_argument("script", nargs="?", type=argparse.FileType("r"), default=sys.stdin)
    run.add_argument("--engine", default=EngineName.BASELINE.value, choices=[e.value for e in EngineName])
    run.add_argument("--workers", type=int, help="pool size (pool engine only)")
    count = run.add_mutually_exclusive_group()
    count.add_argument("--run", type=int, dest="limit", help="answers to take, overriding the script")
    count.add_argument("--run-star", action="store_true", help="take every answer")
    run.add_argument("--timeout", type=float, default=10.0)
    run.add_argument("--policy", default=MplusPolicy.ORDERED.value, choices=[p.value for p in MplusPolicy])
    run.add_argument("--diff", metavar="ENGINE2", choices=[e.value for e in EngineName])
    run.add_argument("--mode", default=DiffMode.ORDER.value, choices=[m.value for m in DiffMode])

    b = sub.add_parser("bench", help="time sums-to-n across engines")
    b.add_argument("--nums", type=_csv_list)
    b.add_argument("--engines", type=_csv_list)
    b.add_argument("--workers", type=_csv_list)
    b.add_argument("--repeats", type=int)
    b.add_argument("--timeout", type=float)
    b.add_argument("--disj-conc", action="store_true")
    b.add_argument("--csv", type=argparse.FileType("w"), default=sys.stdout)
    b.add_argument("--db", default="sqlite:///:memory:", help="SQLAlchemy URL for the results")
    return parser


def _engine_settings(args, engine: str) -> EngineSettings:
    values = {"engine": engine, "mplus_policy": args.policy}
    if args.workers is not None:
        values["workers"] = args.workers
    return EngineSettings(**values)


def run_command(args) -> int:
    query = compile_script(parse(args.script.read()), relations())
    run = RunSettings(
        timeout=args.timeout,
        limit=args.limit,
        override_limit=args.limit is not None or args.run_star,
    )
    settings = _engine_settings(args, args.engine)
    if args.diff:
        try:
            verdict = diff(query, settings, _engine_settings(args, args.diff), DiffMode(args.mode), run)
        except QueryTimeout as exc:
            print(f"timeout: {exc}", file=sys.stderr)
            return EXIT_TIMEOUT
        if verdict.ok:
            print(f"ok: {len(verdict.left)} answers agree")
            return EXIT_OK
        print(f"mismatch: {verdict.message}")
        return EXIT_MISMATCH
    outcome = execute(query, settings, run)
    if outcome.timed_out:
        print(f"timeout after {args.timeout}s", file=sys.stderr)
        return EXIT_TIMEOUT
    if not outcome.answers:
        print("()")
    for answer in outcome.answers:
        print(show(answer))
    return EXIT_OK


def bench_command(args) -> int:
    values = {
        "nums": args.nums,
        "engines": args.engines,
        "workers": args.workers,
        "repeats": args.repeats,
        "timeout": args.timeout,
        "disj_conc": args.disj_conc,
    }
    settings = BenchSettings(**{k: v for k, v in values.items() if v is not None})
    with make_session(args.db) as session:
        sweep = bench(settings, session)
        write_csv(session, sweep, args.csv)
    args.csv.flush()
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    if args.trace:
        trace_logger.setLevel(logging.DEBUG)
    command = run_command if args.command == "run" else bench_command
    try:
        return command(args)
    except (KanrenError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
