import numpy as np
import pytest

from nlch.grid import GridSpec

# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES = {}


def record_acceptance(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES[(number, 0)] = f"ACCEPTANCE {number:2d} {'PASS' if passed else 'FAIL'}  {detail}"


def record_note(number: int, passed: bool, detail: str) -> None:
    """Supplementary run reported under a criterion; not a criterion verdict."""
    key = (number, 1 + sum(1 for k in ACCEPTANCE_LINES if k[0] == number and k[1] > 0))
    ACCEPTANCE_LINES[key] = f"   note {number:2d} {'ok  ' if passed else 'bad '}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def grid16():
    return GridSpec.square(16)
