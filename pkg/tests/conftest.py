from __future__ import annotations

import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from walkd.table_store import infer_fields, load_csv

REPO = Path(__file__).resolve().parent.parent
FIXTURES = REPO / "fixtures"


@pytest.fixture(scope="session")
def superstore():
    with open(FIXTURES / "superstore.csv", "rb") as fh:
        return load_csv(fh.read(), name="superstore")


@pytest.fixture(scope="session")
def superstore_fields(superstore):
    return infer_fields(superstore)


@pytest.fixture(scope="session")
def fixture_spec():
    def load(name: str) -> str:
        return (FIXTURES / "specs" / f"{name}.json").read_text(encoding="utf-8")

    return load


@pytest.fixture(scope="session")
def golden():
    def load(name: str) -> str:
        return (FIXTURES / "golden" / name).read_text(encoding="utf-8")

    return load


@pytest.fixture(scope="session")
def vega_validator():
    import jsonschema

    from walkd.render import vega_lite_schema

    return jsonschema.Draft7Validator(vega_lite_schema())


def load_fixture_rows(name: str) -> list[dict]:
    return json.loads((FIXTURES / name).read_text(encoding="utf-8"))
