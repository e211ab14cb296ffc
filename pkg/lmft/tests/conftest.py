from pathlib import Path

import pytest

from lmft.data import load_corpus

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def fixture20_path() -> Path:
    return DATA_DIR / "fixture20.jsonl"


@pytest.fixture(scope="session")
def fixture20(fixture20_path):
    return load_corpus(fixture20_path)


@pytest.fixture(scope="session")
def conformance_path() -> Path:
    return DATA_DIR / "metric_conformance.json"
