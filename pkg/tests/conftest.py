import math

import numpy as np
import pytest

from qcurvelab import PrescribedCurvature, RadialGrid, picard_solve
from qcurvelab.potential import RadialDensity

# filled by test_acceptance.report(), printed at the end of the session
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])


def poly_bump(a, b):
    """(1 - z^2)^4 on (a, b), z the affine map onto (-1, 1); C^3 and compact."""
    mid, half = 0.5 * (a + b), 0.5 * (b - a)

    def f(s):
        s = np.asarray(s, dtype=float)
        z = (s - mid) / half
        return np.where(np.abs(z) < 1, (1 - z * z) ** 4, 0.0)

    return f


def spherical_density(s):
    return 4.0 / (1.0 + np.asarray(s, dtype=float) ** 2) ** 2


def gaussian(s):
    return np.exp(-np.asarray(s, dtype=float) ** 2)


def planar(f):
    return lambda y1, y2: f(np.hypot(y1, y2))


@pytest.fixture(scope="session")
def grid2():
    return RadialGrid.log_spaced(2)


@pytest.fixture(scope="session")
def grid4():
    return RadialGrid.log_spaced(4)


@pytest.fixture(scope="session")
def sphere2(grid2):
    return picard_solve(PrescribedCurvature.constant(), math.log(2), grid2)


@pytest.fixture(scope="session")
def sphere4(grid4):
    return picard_solve(PrescribedCurvature.constant(6.0), math.log(2), grid4)


@pytest.fixture(scope="session")
def density(grid2):
    def make(f):
        return RadialDensity.from_function(grid2, f)

    return make
