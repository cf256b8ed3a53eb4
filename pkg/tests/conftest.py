from __future__ import annotations

import contextlib
from pathlib import Path

import pytest

from joinplan.catalog import load_catalog

DATA = Path(__file__).resolve().parents[1] / "src" / "joinplan" / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


@pytest.fixture(scope="session")
def job_catalog_path() -> Path:
    return DATA / "imdb_job_catalog.json"


@pytest.fixture(scope="session")
def job_catalog(job_catalog_path):
    return load_catalog(job_catalog_path)


@pytest.fixture(scope="session")
def query_18a_path() -> Path:
    return DATA / "queries" / "18a.sql"


@pytest.fixture(scope="session")
def sql_18a(query_18a_path) -> str:
    return query_18a_path.read_text().strip().rstrip(";")


@pytest.fixture
def announce(capsys):
    """One visible PASS/FAIL line per acceptance criterion."""

    @contextlib.contextmanager
    def _announce(name: str):
        try:
            yield
        except BaseException:
            with capsys.disabled():
                print(f"[acceptance] {name}: FAIL")
            raise
        with capsys.disabled():
            print(f"[acceptance] {name}: PASS")

    return _announce
