from __future__ import annotations

import io

import pytest  # type: ignore
from sqlalchemy import func, select
from sqlalchemy.exc import IntegrityError

from src.harness import CSV_COLUMNS, write_csv
from src.models import ActorRecord, BaselineRecord, BenchRecord, BenchSweep, PoolRecord


class TestBenchSweep:
    def test_create_and_read_sweep(self, session, sweep_factory):
        """
        Test creating and reading a sweep.
        """
        sweep = sweep_factory(repeats=3)
        retrieved = session.get(BenchSweep, sweep.id)

        assert retrieved.repeats == 3
        assert retrieved.disj_conc is False
        assert retrieved.started is not None

    def test_delete_sweep_cascade_records(self, session, sweep_factory, cell_factory):
        """
        Test deleting a sweep including all of its records
        """
        sweep = sweep_factory()
        cell_factory(sweep, engine="actor")
        session.delete(sweep)
        session.commit()

        assert session.scalar(select(BenchSweep)) is None
        assert session.scalar(select(BenchRecord)) is None

    def test_records_ordered_by_insertion(self, session, sweep_factory, record_factory):
        sweep = sweep_factory()
        record_factory(sweep, engine="pool", workers=4, run=0)
        record_factory(sweep, engine="baseline", run=0)
        session.expire_all()

        retrieved = session.get(BenchSweep, sweep.id)
        assert [r.engine for r in retrieved.records] == ["pool", "baseline"]


class TestBenchRecord:
    @pytest.mark.parametrize(
        "engine_name, record_type",
        [("baseline", BaselineRecord), ("actor", ActorRecord), ("pool", PoolRecord)],
    )
    def test_polymorphic_load(self, session, sweep_factory, record_factory, engine_name, record_type):
        """
        Test that records come back as the subclass of their engine.
        """
        sweep = sweep_factory()
        record_factory(sweep, engine=engine_name)
        session.expunge_all()

        retrieved = session.scalar(select(BenchRecord))
        assert type(retrieved) is record_type
        assert retrieved.engine == engine_name

    def test_query_by_subclass(self, session, sweep_factory, record_factory):
        sweep = sweep_factory()
        record_factory(sweep, engine="pool", workers=2)
        record_factory(sweep, engine="actor")

        assert session.scalar(select(func.count()).select_from(PoolRecord)) == 1
        assert session.scalar(select(PoolRecord)).workers == 2

    def test_answers_ok(self, session, sweep_factory, record_factory):
        sweep = sweep_factory()
        good = record_factory(sweep, num=16, answers=17)
        record_factory(sweep, num=16, run=1, answers=3)

        assert good.answers_ok
        assert session.scalars(select(BenchRecord).where(BenchRecord.answers_ok)).all() == [good]

    def test_cell_means(self, session, sweep_factory, cell_factory):
        sweep = sweep_factory(repeats=3)
        cell_factory(sweep, engine="pool", workers=2, num=16, seconds=(1.0, 2.0, 3.0))
        cell_factory(sweep, engine="baseline", num=16, seconds=(0.5, 0.5, 0.5))

        rows = BenchRecord.cell_means(session, sweep.id)
        assert [(r[0], r[1], r[2]) for r in rows] == [("baseline", 1, 16), ("pool", 2, 16)]
        assert rows[0][3] == pytest.approx(0.5)
        assert rows[1][3] == pytest.approx(2.0)
        assert rows[1][4] == pytest.approx(17)


class TestCsv:
    def test_rows_and_means(self, session, sweep_factory, cell_factory):
        sweep = sweep_factory(repeats=2)
        cell_factory(sweep, engine="actor", num=4, seconds=(0.25, 0.75))
        out = io.StringIO()

        write_csv(session, sweep, out)

        lines = out.getvalue().splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert lines[1] == "actor,1,4,0,0.250000,5"
        assert lines[3] == "actor,1,4,mean,0.500000,5"


class TestIsolation:
    @pytest.mark.parametrize("attempt", [0, 1])
    def test_commits_are_rolled_back_between_tests(self, session, sweep_factory, attempt):
        """
        Test that a commit inside one test is gone in the next; whichever
        attempt runs second would count two sweeps otherwise.
        """
        sweep_factory()
        assert session.scalar(select(func.count()).select_from(BenchSweep)) == 1

    def test_failed_commit_keeps_earlier_commits(self, session, sweep_factory, record_factory):
        sweep = sweep_factory()
        record_factory(sweep, run=0)
        with pytest.raises(IntegrityError):
            record_factory(sweep, run=0)
        session.rollback()
        assert session.scalar(select(func.count()).select_from(BenchRecord)) == 1
        assert session.scalar(select(func.count()).select_from(BenchSweep)) == 1
