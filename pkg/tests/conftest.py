from __future__ import annotations

import sys
from pathlib import Path

import pytest

TESTS = Path(__file__).resolve().parent
sys.path.insert(0, str(TESTS))

FIXTURES = TESTS / "fixtures"
DATA = TESTS / "data"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def acceptance_log() -> dict[int, str]:
    return ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
