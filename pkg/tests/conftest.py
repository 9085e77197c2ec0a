import json
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"

# (criterion, passed, detail) rows filled in by test_acceptance.py
ACCEPTANCE_LOG = []


@pytest.fixture(scope="session")
def oracle():
    return json.loads((DATA / "oracle.json").read_text())


@pytest.fixture(scope="session")
def k_oracle(oracle):
    return {float(k): float(v) for k, v in oracle["schmidt_number_exact"].items()}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LOG:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_LOG:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
