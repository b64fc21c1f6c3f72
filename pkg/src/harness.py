"""Running compiled queries on an engine, comparing engines, and benchmarking."""
from __future__ import annotations

import csv
import logging
import threading
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, TextIO

from sqlalchemy.orm import Session

from src.actor import ActorRuntime
from src.baseline import BaselineEngine
from src.config import BenchSettings, DiffMode, EngineName, EngineSettings, RunSettings
from src.exceptions import QueryTimeout
from src.goals import Goal, RelationTable
from src.models import RECORD_TYPES, BenchRecord, BenchSweep
from src.pool import PoolRuntime
from src.rellib import DEFAULT_RELATIONS, relations, sums_to_n
from src.sexpr import CompiledQuery
from src.terms import State, Term, Var, reify, show

logger = logging.getLogger(__name__)

ENGINES: dict[EngineName, Callable] = {
    EngineName.BASELINE: lambda table, settings: BaselineEngine(table),
    EngineName.ACTOR: ActorRuntime,
    EngineName.POOL: PoolRuntime,
}


def make_engine(table: RelationTable, settings: EngineSettings):
    return ENGINES[settings.engine](table, settings)


@dataclass
class Outcome:
    answers: list[Term] = field(default_factory=list)
    timed_out: bool = False
    seconds: float = 0.0


def execute(
    query: CompiledQuery,
    settings: EngineSettings | None = None,
    run: RunSettings | None = None,
) -> Outcome:
    """Run ``query`` under a watchdog; returns within the timeout plus one poll interval."""
    settings = settings or EngineSettings()
    run = run or RunSettings()
    limit = run.limit if run.override_limit else query.limit
    query_vars = [Var(i) for i in range(query.nvars)]
    engine = make_engine(query.table, settings)
    result: dict[str, object] = {}

    def solve():
        try:
            result["states"] = engine.solve(query.goal, State.initial(query.nvars), limit)
        except BaseException as exc:
            result["error"] = exc

    worker = threading.Thread(target=solve, name=f"{settings.engine.value}-query", daemon=True)
    started = time.perf_counter()
    worker.start()
    worker.join(run.timeout)
    seconds = time.perf_counter() - started
    if worker.is_alive():
        logger.warning("%s query timed out after %.1fs", settings.engine.value, run.timeout)
        engine.cancel()
        worker.join(settings.poll_interval)
        engine.close()
        return Outcome(timed_out=True, seconds=seconds)
    engine.close()
    if "error" in result:
        raise result["error"]
    answers = [reify(st, query_vars) for st in result["states"]]
    logger.debug("%s query finished: %d answers in %.3fs", settings.engine.value, len(answers), seconds)
    return Outcome(answers, False, seconds)


@dataclass
class Verdict:
    ok: bool
    left: list[Term]
    right: list[Term]
    # index of the first differing answer in order mode
    divergence: int | None = None
    message: str = ""


def compare_answers(left: list[Term], right: list[Term], mode: DiffMode = DiffMode.ORDER) -> Verdict:
    if mode is DiffMode.MULTISET:
        missing = Counter(map(show, left)) - Counter(map(show, right))
        extra = Counter(map(show, right)) - Counter(map(show, left))
        if not missing and not extra:
            return Verdict(True, left, right)
        return Verdict(
            False,
            left,
            right,
            message=f"only left: {sorted(missing.elements())}, only right: {sorted(extra.elements())}",
        )
    for i, (a, b) in enumerate(zip(left, right)):
        if show(a) != show(b):
            return Verdict(False, left, right, i, f"answer {i}: {show(a)} != {show(b)}")
    if len(left) != len(right):
        i = min(len(left), len(right))
        return Verdict(False, left, right, i, f"answer counts differ: {len(left)} != {len(right)}")
    return Verdict(True, left, right)


def diff(
    query: CompiledQuery,
    left: EngineSettings,
    right: EngineSettings,
    mode: DiffMode = DiffMode.ORDER,
    run: RunSettings | None = None,
) -> Verdict:
    outcomes = []
    for settings in (left, right):
        outcome = execute(query, settings, run)
        if outcome.timed_out:
            raise QueryTimeout(f"{settings.engine.value} timed out")
        outcomes.append(outcome)
    return compare_answers(outcomes[0].answers, outcomes[1].answers, mode)


def run_query(
    n: int | None,
    body: Callable[..., Goal],
    nvars: int = 1,
    engine: EngineName = EngineName.BASELINE,
    table: RelationTable = DEFAULT_RELATIONS,
    settings: EngineSettings | None = None,
) -> list[Term]:
    """Run a goal built in Python; ``body`` receives the ``nvars`` query variables."""
    settings = settings or EngineSettings(engine=engine)
    query_vars = [Var(i) for i in range(nvars)]
    with make_engine(table, settings) as rt:
        states = rt.solve(body(*query_vars), State.initial(nvars), n)
    return [reify(st, query_vars) for st in states]


def sums_to_n_query(num: int, table: RelationTable = DEFAULT_RELATIONS) -> CompiledQuery:
    return CompiledQuery(table, sums_to_n(Var(0), num), 1, None)


def bench(settings: BenchSettings, session: Session) -> BenchSweep:
    """Time sums-to-n for every (engine, workers, num) cell and store one row per run."""
    table = relations(disj_conc=settings.disj_conc)
    sweep = BenchSweep(repeats=settings.repeats, disj_conc=settings.disj_conc)
    session.add(sweep)
    run_settings = RunSettings(timeout=settings.timeout)
    for engine in settings.engines:
        # only the pool is sized by its worker count
        for workers in settings.workers if engine is EngineName.POOL else [1]:
            engine_settings = EngineSettings(engine=engine, workers=workers)
            for num in settings.nums:
                query = sums_to_n_query(num, table)
                outcomes = []
                for run in range(settings.repeats):
                    outcome = execute(query, engine_settings, run_settings)
                    if outcome.timed_out:
                        break
                    outcomes.append(outcome)
                if len(outcomes) < settings.repeats:
                    logger.warning("dropping %s/%d from num=%d on: timed out", engine.value, workers, num)
                    break
                record_type = RECORD_TYPES[engine.value]
                for run, outcome in enumerate(outcomes):
                    sweep.records.append(
                        record_type(
                            workers=workers,
                            num=num,
                            run=run,
                            seconds=outcome.seconds,
                            answers=len(outcome.answers),
                        )
                    )
                logger.info(
                    "%s workers=%d num=%d mean %.3fs",
                    engine.value,
                    workers,
                    num,
                    sum(o.seconds for o in outcomes) / len(outcomes),
                )
    session.commit()
    return sweep


CSV_COLUMNS = ["engine", "workers", "num", "run", "seconds", "answers"]


def write_csv(session: Session, sweep: BenchSweep, out: TextIO) -> None:
    writer = csv.writer(out)
    writer.writerow(CSV_COLUMNS)
    for record in sweep.records:
        writer.writerow(
            [record.engine, record.workers, record.num, record.run, f"{record.seconds:.6f}", record.answers]
        )
    for engine, workers, num, seconds, answers in BenchRecord.cell_means(session, sweep.id):
        writer.writerow([engine, workers, num, "mean", f"{seconds:.6f}", f"{answers:g}"])
