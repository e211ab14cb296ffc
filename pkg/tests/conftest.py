import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).parent
sys.path.insert(0, str(TESTS_DIR))

from surveytax.corpus import Taxonomy, load_records  # noqa: E402

import corpusgen  # noqa: E402


@pytest.fixture(scope="session")
def fixture10_path() -> Path:
    return TESTS_DIR / "data" / "fixture10.jsonl"


@pytest.fixture(scope="session")
def default_taxonomy() -> Taxonomy:
    return Taxonomy.default()


@pytest.fixture(scope="session")
def fixture10(fixture10_path, default_taxonomy):
    return load_records(fixture10_path, default_taxonomy)


@pytest.fixture(scope="session")
def separable():
    return corpusgen.separable_corpus()


@pytest.fixture(scope="session")
def benchmark():
    return corpusgen.benchmark_corpus()
