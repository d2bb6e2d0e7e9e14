"""Shared fixtures: the supported spaces and a calibrated inversion constant."""

import pytest

from drspace.geometry import SpaceParams
from drspace.transforms import calibrate_inversion

SPACES = [(2, 1), (2, 0), (4, 0)]


@pytest.fixture(scope="session")
def heis():
    """The (2, 1) Heisenberg-type space."""
    return SpaceParams(2, 1)


@pytest.fixture(scope="session")
def hyp2():
    """The k = 0, m = 2 real hyperbolic space."""
    return SpaceParams(2, 0)


@pytest.fixture(scope="session", params=SPACES, ids=lambda mk: f"m{mk[0]}k{mk[1]}")
def space(request):
    return SpaceParams(*request.param)


@pytest.fixture(scope="session")
def calibrated(heis, hyp2):
    """Inversion constants registered for (2, 1) and (2, 0)."""
    return {(2, 1): calibrate_inversion(heis), (2, 0): calibrate_inversion(hyp2)}


# One line per acceptance criterion, printed after the run.
_ACCEPTANCE = {}


@pytest.fixture(scope="session")
def acceptance_log():
    """Record ``(number, passed, detail)``; the terminal summary prints the table."""
    def record(number, passed, detail):
        _ACCEPTANCE[number] = (bool(passed), detail)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
