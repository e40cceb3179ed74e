import math

import numpy as np
import pytest

from qcurvelab import ConformalSolution, PrescribedCurvature, picard_solve
from qcurvelab.errors import FitWindowTooSmall
from qcurvelab.geometry import (
    completeness_verdict,
    distance_exponent,
    geodesic_distance,
    total_distance,
    total_volume,
    volume_entropy,
    volume_growth,
)
from qcurvelab.grid import RadialGrid


@pytest.fixture(scope="module")
def flat(grid2):
    return ConformalSolution.from_values(grid2, np.zeros(grid2.nodes.size), 0.0,
                                         PrescribedCurvature.constant(0.0))


@pytest.fixture(scope="module")
def l3_solutions(grid2):
    f = PrescribedCurvature.powerlaw(3.0)
    return [picard_solve(f, c, grid2) for c in (-4.0, -1.0, 0.0, 0.5, 1.25, 2.0)]


def test_spherical_volume_and_distance(sphere2):
    assert volume_growth(sphere2, 1.0) == pytest.approx(2 * math.pi, abs=1e-8)
    assert total_volume(sphere2) == pytest.approx(4 * math.pi, abs=1e-8)
    assert geodesic_distance(sphere2, 1.0) == pytest.approx(math.pi / 2, abs=1e-8)
    assert total_distance(sphere2) == pytest.approx(math.pi, abs=1e-8)


def test_spherical_entropy_and_exponent(sphere2):
    assert abs(volume_entropy(sphere2).slope) < 0.02
    fit = distance_exponent(sphere2)
    assert abs(fit.slope) < 0.02 and fit.flag == "bounded"
    assert completeness_verdict(sphere2).verdict == "incomplete"


def test_flat(flat):
    assert volume_growth(flat, 2.0) == pytest.approx(4 * math.pi, rel=1e-12)
    assert geodesic_distance(flat, 5.0) == pytest.approx(5.0, rel=1e-12)
    assert volume_entropy(flat).slope == pytest.approx(1.0, abs=1e-10)
    assert distance_exponent(flat).slope == pytest.approx(1.0, abs=1e-10)
    assert completeness_verdict(flat).verdict == "complete"


def test_monotone(l3_solutions):
    R = np.geomspace(1e-3, 1e8, 200)
    for sol in l3_solutions:
        assert np.all(np.diff(volume_growth(sol, R)) >= 0)
        assert np.all(np.diff(geodesic_distance(sol, R)) > 0)


def test_identities_hold(l3_solutions):
    for sol in l3_solutions:
        rep = completeness_verdict(sol)
        assert rep.tau_consistency < 0.05
        assert rep.tau_fit.slope >= -0.02
        if sol.beta < 0.95:
            assert rep.distance_consistency < 0.05
            assert rep.verdict == "complete"
        elif sol.beta > 1.05:
            assert rep.verdict == "incomplete"
        # verdict consistency against the distance fit
        if abs(sol.beta - 1) > 0.05:
            complete = rep.verdict == "complete"
            assert complete == (rep.distance_exponent_fit.slope > 0.02 or rep.tail_divergent)


def test_half_beta_entropy(grid2):
    # pick C0 with beta close to 0.5 by bisection on the monotone sweep
    f = PrescribedCurvature.powerlaw(3.0)
    lo, hi = -1.0, 0.5
    for _ in range(12):
        mid = 0.5 * (lo + hi)
        sol = picard_solve(f, mid, grid2)
        lo, hi = (mid, hi) if sol.beta < 0.5 else (lo, mid)
    assert sol.beta == pytest.approx(0.5, abs=0.02)
    assert volume_entropy(sol).slope == pytest.approx(0.5, abs=0.05)
    assert distance_exponent(sol).slope == pytest.approx(0.5, abs=0.05)


def test_borderline_undetermined(grid2):
    sol = picard_solve(PrescribedCurvature.powerlaw(1.0), -4.0, grid2)
    assert abs(sol.beta - 1) < 0.02
    assert completeness_verdict(sol).verdict == "undetermined"


def test_fit_window_too_small():
    g = RadialGrid.log_spaced(2, r_min=1e-2, r_max=100.0, M=16)
    sol = ConformalSolution.from_values(g, np.zeros(g.nodes.size), 0.0, PrescribedCurvature.constant(0.0))
    with pytest.raises(FitWindowTooSmall):
        volume_entropy(sol)
