import logging
from contextlib import contextmanager
from typing import Dict, Iterator, Optional

from sqlalchemy import create_engine
from sqlalchemy.engine import Engine
from sqlalchemy.orm import Session, declarative_base, sessionmaker

from chirpedensemble.config import settings

logger = logging.getLogger(__name__)

# Base class for our ORM models
Base = declarative_base()

_engines: Dict[str, Engine] = {}


def get_engine(database_url: Optional[str] = None) -> Engine:
    """One engine per URL, created lazily so importing the package never touches the disk."""
    url = database_url or settings.DATABASE_URL
    if url not in _engines:
        logger.info(f"Creating database engine for {url}")
        _engines[url] = create_engine(url, future=True)
    return _engines[url]


def session_factory(database_url: Optional[str] = None) -> sessionmaker:
    return sessionmaker(bind=get_engine(database_url), expire_on_commit=False, future=True)


@contextmanager
def session_scope(database_url: Optional[str] = None) -> Iterator[Session]:
    """Session that commits on success and rolls back on any exception."""
    session = session_factory(database_url)()
    try:
        yield session
        session.commit()
    except Exception:
        session.rollback()
        raise
    finally:
        session.close()


def create_tables(database_url: Optional[str] = None) -> None:
    """Creates every mapped table that does not exist yet."""
    # Models register themselves on Base when imported
    from chirpedensemble.database import models  # noqa: F401

    Base.metadata.create_all(get_engine(database_url))
