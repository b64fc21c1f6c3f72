from __future__ import annotations

from datetime import datetime

from sqlalchemy import ForeignKey, UniqueConstraint, create_engine, func, select
from sqlalchemy.ext.hybrid import hybrid_property
from sqlalchemy.orm import DeclarativeBase, Mapped, Session, mapped_column, relationship, sessionmaker


class Base(DeclarativeBase):
    pass


class BenchSweep(Base):
    __tablename__ = "bench_sweep"

    id: Mapped[int] = mapped_column(primary_key=True)
    started: Mapped[datetime] = mapped_column(default=datetime.now)
    repeats: Mapped[int]
    disj_conc: Mapped[bool] = mapped_column(default=False)

    records: Mapped[list[BenchRecord]] = relationship(
        cascade="all, delete-orphan",
        back_populates="sweep",
        # the CSV always needs every row of a sweep
        lazy="selectin",
        order_by="BenchRecord.id",
    )

    def __repr__(self) -> str:
        return (
            f"{self.__class__.__name__}(id={self.id!r}, "
            f"repeats={self.repeats!r}, "
            f"records={len(self.records)!r})"
        )


class BenchRecord(Base):
    # ! one row per timed query; the engine name doubles as discriminator
    __tablename__ = "bench_record"
    __table_args__ = (
        UniqueConstraint("sweep_id", "engine", "workers", "num", "run", name="uq_bench_record_cell_run"),
    )

    id: Mapped[int] = mapped_column(primary_key=True)
    sweep_id: Mapped[int] = mapped_column(ForeignKey(BenchSweep.id), nullable=False)
    engine: Mapped[str] = mapped_column(nullable=False)
    workers: Mapped[int] = mapped_column(default=1)
    num: Mapped[int]
    run: Mapped[int]
    seconds: Mapped[float]
    answers: Mapped[int]

    __mapper_args__ = {
        "polymorphic_on": engine,
    }

    sweep: Mapped[BenchSweep] = relationship(back_populates="records")

    @hybrid_property
    def answers_ok(self):
        # sums-to-n has one answer per split of num
        return self.answers == self.num + 1

    @classmethod
    def cell_means(cls, session: Session, sweep_id: int):
        """Rows of (engine, workers, num, mean seconds, mean answers), one per cell."""
        stmt = (
            select(
                cls.engine,
                cls.workers,
                cls.num,
                func.avg(cls.seconds),
                func.avg(cls.answers),
            )
            .where(cls.sweep_id == sweep_id)
            .group_by(cls.engine, cls.workers, cls.num)
            .order_by(cls.engine, cls.workers, cls.num)
        )
        return session.execute(stmt).all()

    def __repr__(self) -> str:
        return (
            f"{self.__class__.__name__}(engine={self.engine!r}, "
            f"workers={self.workers!r}, num={self.num!r}, run={self.run!r}, "
            f"seconds={self.seconds!r}, answers={self.answers!r})"
        )


class BaselineRecord(BenchRecord):
    __mapper_args__ = {
        "polymorphic_identity": "baseline",
        "polymorphic_load": "inline",
    }


class ActorRecord(BenchRecord):
    __mapper_args__ = {
        "polymorphic_identity": "actor",
        "polymorphic_load": "inline",
    }


class PoolRecord(BenchRecord):
    __mapper_args__ = {
        "polymorphic_identity": "pool",
        "polymorphic_load": "inline",
    }


RECORD_TYPES: dict[str, type[BenchRecord]] = {
    "baseline": BaselineRecord,
    "actor": ActorRecord,
    "pool": PoolRecord,
}


def make_session(url: str = "sqlite:///:memory:", echo: bool = False) -> Session:
    engine = create_engine(url, echo=echo)
    Base.metadata.create_all(engine)
    return sessionmaker(bind=engine)()
