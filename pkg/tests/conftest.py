from __future__ import annotations

import os
from pathlib import Path

import pytest

from ardm.ingest import parse_dataset
from ardm.schema import init_schema, register_dataset
from ardm.standards import register_builtins
from ardm.store import open_store

FIXTURES = Path(__file__).parent / "fixtures"


def pilot_dir() -> Path:
    """Real CDISC pilot CSVs when ARDM_PILOT_DIR is set, else the synthetic fixture."""
    return Path(os.environ.get("ARDM_PILOT_DIR", FIXTURES))


@pytest.fixture
def store(tmp_path):
    with open_store(tmp_path / "ardm.db", create=True) as s:
        init_schema(s)
        register_builtins(s)
        yield s


@pytest.fixture
def pilot_ids(store):
    ids = {}
    for name, domain in [("adsl.csv", "ADSL"), ("adtte.csv", "ADTTE"), ("adae.csv", "ADAE")]:
        path = pilot_dir() / name
        if path.exists():
            ids[domain] = register_dataset(store, parse_dataset(path, domain)).dataset_id
    return ids


def csv_bytes(*lines: str) -> bytes:
    return ("\n".join(lines) + "\n").encode()


def pytest_terminal_summary(terminalreporter):
    from tests.test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[key][1])
