import pytest

from cpreturns.symbolic import MeasureSpec, ShiftSystem

MARKOV = [[0.9, 0.1], [0.2, 0.8]]


@pytest.fixture
def full2():
    return ShiftSystem.full(2)


@pytest.fixture
def fair():
    return MeasureSpec.bernoulli([0.5, 0.5])


@pytest.fixture
def bern3():
    return MeasureSpec.bernoulli([0.3, 0.7])


@pytest.fixture
def markov():
    return MeasureSpec.markov(MARKOV)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
