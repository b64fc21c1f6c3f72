from functools import partial

import pytest  # type: ignore
from sqlalchemy import create_engine, event
from sqlalchemy.orm import sessionmaker

from src.config import EngineName, EngineSettings
from src.models import Base
from src.testdata import create_cell, create_record, create_sweep, run_checked


@pytest.fixture(scope="session")
def engine():
    """
    Creates an in-memory SQLite engine and sets up the schema.
    The same engine is used for the duration of the test session.
    """
    engine = create_engine("sqlite:///:memory:")

    def _on_connect(dbapi_con, con_record):
        """Make SQLite respect FK constraints and let SQLAlchemy emit BEGIN itself."""
        # pysqlite's own transaction handling breaks SAVEPOINT
        dbapi_con.isolation_level = None
        dbapi_con.execute("pragma foreign_keys=ON")

    def _on_begin(conn):
        conn.exec_driver_sql("BEGIN")

    event.listen(engine, "connect", _on_connect)
    event.listen(engine, "begin", _on_begin)

    Base.metadata.create_all(engine)

    yield engine
    Base.metadata.drop_all(engine)


@pytest.fixture(scope="function")
def session(engine):
    """
    Creates a new database session for a test inside a transaction.
    The transaction is rolled back at the end of the test to ensure isolation.
    """
    connection = engine.connect()
    transaction = connection.begin()

    Session = sessionmaker(bind=connection, join_transaction_mode="create_savepoint")
    session = Session()

    yield session

    session.close()
    if transaction.is_active:
        transaction.rollback()
    connection.close()


###############################################################################
# Factory Fixtures for Models
###############################################################################


@pytest.fixture
def sweep_factory(session):
    """Factory fixture to create and persist a BenchSweep."""
    return partial(create_sweep, session)


@pytest.fixture
def record_factory(session):
    """Factory fixture to create and persist a BenchRecord of any engine."""
    return partial(create_record, session)


@pytest.fixture
def cell_factory(session):
    """Factory fixture to create all runs of one benchmark cell."""
    return partial(create_cell, session)


###############################################################################
# Engines
###############################################################################

ALL_ENGINES = {
    "baseline": EngineSettings(engine=EngineName.BASELINE),
    "actor": EngineSettings(engine=EngineName.ACTOR),
    "pool-1": EngineSettings(engine=EngineName.POOL, workers=1),
    "pool-4": EngineSettings(engine=EngineName.POOL, workers=4),
}
CONCURRENT_ENGINES = {k: v for k, v in ALL_ENGINES.items() if k != "baseline"}


@pytest.fixture(params=list(ALL_ENGINES), ids=list(ALL_ENGINES))
def settings(request):
    return ALL_ENGINES[request.param]


@pytest.fixture(params=list(CONCURRENT_ENGINES), ids=list(CONCURRENT_ENGINES))
def concurrent_settings(request):
    return CONCURRENT_ENGINES[request.param]


@pytest.fixture
def run(settings):
    """Runs a goal on the parametrized engine with protocol and quiescence checks."""
    return partial(run_checked, settings)


@pytest.fixture
def run_concurrent(concurrent_settings):
    return partial(run_checked, concurrent_settings)
