from __future__ import annotations

from pathlib import Path

import pytest

from rdb2owl.relmodel import load_database

DATA = Path(__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden"
BASE = "http://example.edu/db/"


@pytest.fixture
def university():
    return load_database(DATA / "university.json")


@pytest.fixture
def example2():
    return load_database(DATA / "example2_student.json")


@pytest.fixture
def data_dir() -> Path:
    return DATA


@pytest.fixture
def golden_dir() -> Path:
    return GOLDEN
