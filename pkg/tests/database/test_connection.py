import pytest
from sqlalchemy import func, select

from chirpedensemble.database.connection import create_tables, get_engine, session_scope
from chirpedensemble.database.models import SweepRecordRow
from chirpedensemble.schemas.record_schemas import SweepRecord
from chirpedensemble.services.persistence_service import store_records


@pytest.fixture
def database_url(tmp_path) -> str:
    url = f"sqlite:///{tmp_path / 'records.db'}"
    create_tables(url)
    return url


def _count(url: str) -> int:
    with session_scope(url) as session:
        return session.scalar(select(func.count()).select_from(SweepRecordRow))


def _row(run_id: str) -> SweepRecordRow:
    return SweepRecordRow(
        run_id=run_id,
        kind="sweep",
        alpha=[-0.1],
        delta_choice=0.0,
        eps1=0.1,
        eps2=0.1,
        fidelity=1.0,
        distance=0.0,
        norm_drift=0.0,
    )


def test_engine_is_cached_per_url(database_url):
    assert get_engine(database_url) is get_engine(database_url)


def test_session_scope_commits(database_url):
    with session_scope(database_url) as session:
        session.add(_row("sweep-0000"))
    assert _count(database_url) == 1
    with session_scope(database_url) as session:
        stored = session.scalars(select(SweepRecordRow)).one()
    assert stored.created_at is not None
    assert not stored.degraded


def test_session_scope_rolls_back(database_url):
    with pytest.raises(RuntimeError):
        with session_scope(database_url) as session:
            session.add(_row("sweep-0000"))
            session.flush()
            raise RuntimeError("abort")
    assert _count(database_url) == 0


def test_store_records(database_url):
    records = [
        SweepRecord(
            run_id=f"scaling-{i:04d}",
            kind="scaling",
            alpha=[-0.1],
            delta_choice=[[0.0, 0.5], [0.5, 0.0]],
            eps1=0.1,
            eps2=0.01,
            fidelity=0.25,
            distance=1.0,
            norm_drift=1e-12,
            degraded=i == 1,
        )
        for i in range(2)
    ]
    assert store_records(records, database_url) == 2
    with session_scope(database_url) as session:
        rows = session.scalars(select(SweepRecordRow).order_by(SweepRecordRow.run_id)).all()
    assert [r.degraded for r in rows] == [False, True]
    assert rows[0].delta_choice == [[0.0, 0.5], [0.5, 0.0]]
