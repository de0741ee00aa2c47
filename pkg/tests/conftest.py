import pytest

from polariton_gate import SpinConfig

UU, DD, UD, DU = SpinConfig.UP_UP, SpinConfig.DOWN_DOWN, SpinConfig.UP_DOWN, SpinConfig.DOWN_UP


def make_detunings(uu, dd, ud):
    return {UU: uu, DD: dd, UD: ud, DU: ud}


@pytest.fixture
def reference_detunings():
    """Detunings of the reference operating point (meV)."""
    return make_detunings(1.0, 1.002, 1.001)


@pytest.fixture
def split_detunings():
    """Widely split detunings so pair phases are O(1) at modest drive."""
    return make_detunings(0.5, 1.5, 1.0)


#: One line per acceptance criterion, filled in by test_acceptance.py.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
