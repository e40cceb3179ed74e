import math

import numpy as np
import pytest

from qcurvelab import ConformalSolution, PrescribedCurvature, picard_solve
from qcurvelab.errors import HypothesisViolated
from qcurvelab.grid import RadialGrid
from qcurvelab.pohozaev import (
    check_inequality,
    lhs_integral,
    lhs_limit,
    lower_bound_check,
    pohozaev_prefactor,
    sign_condition_check,
)

L3 = PrescribedCurvature.powerlaw(3.0)


@pytest.fixture(scope="module")
def l3_sol(grid2):
    return picard_solve(L3, 0.0, grid2)


def test_prefactor():
    assert pohozaev_prefactor(2) == pytest.approx(1.0)
    assert pohozaev_prefactor(4) == pytest.approx(1 / 8)


def test_spherical_equality(sphere2):
    rep = check_inequality(sphere2)
    assert np.all(rep.lhs_samples == 0.0)
    assert abs(rep.rhs) < 1e-8
    assert abs(rep.margin) < 1e-8
    assert rep.ok


def test_zero_density(grid2):
    sol = ConformalSolution.from_values(grid2, np.zeros(grid2.nodes.size), 0.0,
                                        PrescribedCurvature.powerlaw(3.0, c=0.0))
    rep = check_inequality(sol)
    assert rep.rhs == 0.0 and lhs_limit(sol) == 0.0


def test_lhs_at_origin_and_additive(l3_sol):
    assert lhs_integral(l3_sol, L3, 0.0) == 0.0
    a, b, c = lhs_integral(l3_sol, L3, np.array([0.5, 3.0, 40.0]))
    # annulus integral computed independently on the same grid
    g = l3_sol.grid
    w = L3.radial_derivative_times_r(g.nodes) * np.exp(2 * l3_sol.u)
    ann = g.integral_to(w, 40.0)[0] - g.integral_to(w, 3.0)[0]
    assert c - b == pytest.approx(ann, rel=1e-12)
    assert a > b > c  # integrand is negative


def test_lhs_against_finer_grid(l3_sol):
    fine = RadialGrid.log_spaced(2, M=8192)
    sol_f = picard_solve(L3, 0.0, fine)
    coarse, refined = lhs_limit(l3_sol), lhs_limit(sol_f)
    assert coarse < 0
    assert coarse == pytest.approx(refined, rel=1e-6)


@pytest.mark.parametrize("C0", [-3.0, -1.0, 0.5, 2.0])
def test_powerlaw_margin_and_equality(grid2, C0):
    sol = picard_solve(L3, C0, grid2)
    rep = check_inequality(sol)
    assert rep.margin <= 0.01 * (1 + abs(rep.rhs))
    assert abs(rep.lhs_limit - rep.rhs) < 0.02 * (1 + abs(rep.rhs))
    assert np.all(np.diff(rep.radii) > 0)
    assert np.all(np.diff(rep.boundary_terms) < 0)
    assert rep.boundary_terms[-1] < 1e-6 * rep.mass


def test_n4_margin(grid4):
    sol = picard_solve(PrescribedCurvature.powerlaw(5.0), 0.0, grid4)
    rep = check_inequality(sol)
    assert rep.ok
    assert abs(rep.lhs_limit - rep.rhs) < 0.02 * (1 + abs(rep.rhs))


def test_sign_change_rejected(l3_sol):
    class Flip:
        tag = "custom"

        def __call__(self, r):
            return np.cos(np.log1p(r))

        def radial_derivative_times_r(self, r):
            return -r / (1 + r) * np.sin(np.log1p(r))

    with pytest.raises(HypothesisViolated):
        check_inequality(l3_sol, Flip())


def test_sign_condition():
    sc = sign_condition_check(PrescribedCurvature.powerlaw(1.0), 2)
    assert sc.passed and sc.inf_value == pytest.approx(-1.0)
    sc = sign_condition_check(PrescribedCurvature.constant(), 2)
    assert sc.passed and sc.inf_value == 0.0
    sc = sign_condition_check(L3, 2)
    assert not sc.passed and sc.inf_value == pytest.approx(-3.0)
    with pytest.raises(ValueError):
        sign_condition_check(PrescribedCurvature.neg_powerlaw(2.0), 2)


@pytest.mark.parametrize("l", [0.5, 1.0, 2.0, 2.5, 4.0])
def test_sign_condition_threshold(l):
    for n in (2, 4):
        assert sign_condition_check(PrescribedCurvature.powerlaw(l), n).passed == (l <= n / 2)


def test_lower_bound():
    lb = lower_bound_check(PrescribedCurvature.powerlaw(1.0), -1.0)
    assert lb.passed and lb.c0 == pytest.approx(1 / math.sqrt(2))
    lb = lower_bound_check(PrescribedCurvature.constant(3.0), 0.0)
    assert lb.passed and lb.c0 == 3.0
    with pytest.raises(HypothesisViolated):
        lower_bound_check(L3, -1.0)
