from __future__ import annotations

import sys

from sqlalchemy import func, select

from src.config import BenchSettings, EngineName
from src.harness import bench, write_csv
from src.models import ActorRecord, BenchRecord, PoolRecord, make_session

# python -m example_scripts.bench_report [sqlite url]
url = sys.argv[1] if len(sys.argv) > 1 else "sqlite:///bench.db"
session = make_session(url)

settings = BenchSettings(
    nums=[16, 64],
    engines=[EngineName.BASELINE, EngineName.ACTOR, EngineName.POOL],
    workers=[1, 2, 4],
    repeats=3,
    timeout=120,
)
sweep = bench(settings, session)
write_csv(session, sweep, sys.stdout)

# slowest pool cells first
stmt = (
    select(PoolRecord.workers, PoolRecord.num, func.avg(PoolRecord.seconds).label("mean"))
    .where(PoolRecord.sweep_id == sweep.id)
    .group_by(PoolRecord.workers, PoolRecord.num)
    .order_by(func.avg(PoolRecord.seconds).desc())
)
for workers, num, mean in session.execute(stmt):
    print(f"pool workers={workers} num={num}: {mean:.3f}s")

bad = session.scalars(select(BenchRecord).where(BenchRecord.sweep_id == sweep.id, ~BenchRecord.answers_ok)).all()
print(f"{len(bad)} runs with a wrong answer count")

actor_runs = session.scalar(select(func.count()).select_from(ActorRecord).where(ActorRecord.sweep_id == sweep.id))
print(f"{actor_runs} actor runs")
