import sys

import pytest

from wresidue.boundary import phi_total
from wresidue.cosphere import interior_density
from wresidue.geometry import BoundaryContext, InteriorContext


@pytest.fixture(scope="session")
def ictx():
    return InteriorContext()


@pytest.fixture(scope="session")
def bctx():
    return BoundaryContext()


@pytest.fixture(scope="session")
def interior(ictx):
    return {k: interior_density(k, ictx) for k in "AB"}


@pytest.fixture(scope="session")
def phi():
    return {k: phi_total(k) for k in "AB"}


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
