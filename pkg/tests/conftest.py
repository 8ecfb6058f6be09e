import numpy as np
import pytest

from coxtest.core import concat_events

_CRITERIA = []


@pytest.fixture
def f1():
    """Three paths on [0, 1]: {0.2, 0.3}, {0.5}, {}."""
    return concat_events([[0.2, 0.3], [0.5], []], 1.0)


@pytest.fixture
def criterion(request):
    """Record a named acceptance criterion; the terminal summary prints one line each."""
    def record(name, passed, detail=""):
        _CRITERIA.append((name, bool(passed), detail))
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _CRITERIA:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")

