import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).parent
REPO_ROOT = TESTS_DIR.parent
FIXTURES = REPO_ROOT / "fixtures"

sys.path.insert(0, str(TESTS_DIR))


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def kitchen_text() -> str:
    return (FIXTURES / "kitchen.ctx").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def kitchen_ontology(kitchen_text):
    from ctxware.ontology import parse_ontology

    return parse_ontology(kitchen_text)


@pytest.fixture(scope="session")
def kitchen_core_ontology():
    from ctxware.ontology import load_ontology

    return load_ontology(FIXTURES / "kitchen_core.ctx")
