import math

import pytest

from ladder_synth.coupling import CouplingModel
from ladder_synth.state import make_state

ACCEPTANCE_LINES = []


def report(criterion, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def model():
    return CouplingModel.from_ratio(0.60, (3, 1), (0, 1))


@pytest.fixture(scope="session")
def psi03():
    return make_state(3, [("down", 0, 1), ("down", 3, 1)])


@pytest.fixture(scope="session")
def psi_t():
    return make_state(2, [("down", 0, 0.64), ("up", 2, 0.77)])


@pytest.fixture
def sqrt_half():
    return 1 / math.sqrt(2)
