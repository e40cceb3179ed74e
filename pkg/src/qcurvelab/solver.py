"""Radial normal solutions of (-Delta)^{n/2} u = f e^{nu}.

Solutions are built by damped Picard iteration on the integral equation
u = L(f e^{nu}) + C0, so every converged solution is normal by
construction.  For n = 2 the radial ODE u'' + u'/r = -f e^{2u} gives an
independent cross-check (``ode_shoot_2d``).
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    BlowUp,
    DivergenceDetected,
    MaxIterExceeded,
    NonIntegrableDensity,
    NonIntegrablePotential,
)
from .potential import RadialDensity, TAIL_MASS_LIMIT, alpha_of, log_potential_nodes

log = logging.getLogger(__name__)

OUTCOMES = ("Solved", "DivergenceDetected", "NonIntegrableDensity", "MaxIterExceeded")
BORDERLINE = 0.02


@dataclass(frozen=True)
class SolverOptions:
    damping: float = 0.5
    tol: float = 1e-10
    max_iter: int = 500
    beta_cap: float = 5.0
    u_cap: float = 1e3
    min_damping: float = 1.0 / 64

    def __post_init__(self):
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")


@dataclass(frozen=True, eq=False)
class ConformalSolution:
    """Grid samples of a radial normal solution and its cached density."""

    grid: object
    u: np.ndarray
    C0: float
    curvature: object
    density: RadialDensity
    beta: float
    residual: float
    iterations: int = 0
    tail_fraction: float = 0.0
    notes: dict = field(default_factory=dict, compare=False)

    @property
    def n(self):
        return self.grid.n

    @property
    def borderline(self):
        """True when |beta - 1| < 0.02; such solutions are kept out of dichotomy checks."""
        return abs(self.beta - 1.0) < BORDERLINE

    @classmethod
    def from_values(cls, grid, u, C0, curvature):
        """Wrap given samples (e.g. a closed-form solution); beta and residual are computed."""
        u = np.asarray(u, dtype=float)
        dens = RadialDensity.from_values(grid, curvature(grid.nodes) * np.exp(grid.n * u))
        if not dens.integrable:
            raise NonIntegrableDensity("density of the supplied u is not integrable")
        residual = float(np.max(np.abs(u - log_potential_nodes(dens) - C0)))
        return cls(grid, u, float(C0), curvature, dens, alpha_of(dens), residual,
                   0, dens.tail_fraction())


def _density(f_vals, u, n):
    with np.errstate(over="ignore", invalid="ignore"):
        return f_vals * np.exp(n * u)


def picard_solve(f, C0, grid, opts=None, initial=None):
    """Solve u = L(f e^{nu}) + C0 on ``grid`` by damped fixed-point iteration.

    ``initial`` defaults to u = C0.  The damping is halved whenever the
    residual grows on two consecutive steps.
    """
    opts = opts or SolverOptions()
    n = grid.n
    r = grid.nodes
    f_vals = f(r)
    C0 = float(C0)
    if initial is None:
        u = np.full(r.shape, C0)
    else:
        u = np.array(initial(r) if callable(initial) else initial, dtype=float)
        u[0] = C0
    theta = opts.damping
    prev = np.inf
    rises = 0
    bad_tail = 0

    for it in range(opts.max_iter):
        dens = RadialDensity.from_values(grid, _density(f_vals, u, n))
        if dens.integrable:
            bad_tail = 0
            beta = alpha_of(dens)
            # the starting guess is not an iterate of the map; cap from step 1 on
            if it > 0 and abs(beta) > opts.beta_cap:
                raise DivergenceDetected(f"beta estimate {beta:.3g} exceeds cap at iteration {it}")
        else:
            bad_tail += 1
            if bad_tail >= 2:
                raise NonIntegrableDensity(
                    f"|f|e^(nu) decays like r^-p with p = {dens.tail_exponent:.4g} <= {n} "
                    f"on consecutive iterates (iteration {it})"
                )
        if not np.all(np.isfinite(u)) or u.max() > opts.u_cap:
            raise DivergenceDetected(f"sup u exceeds {opts.u_cap:g} at iteration {it}")

        with np.errstate(invalid="ignore", over="ignore"):
            Tu = log_potential_nodes(dens, strict=False) + C0
        if not np.all(np.isfinite(Tu)):
            raise DivergenceDetected(f"potential became non-finite at iteration {it}")
        res = float(np.max(np.abs(Tu - u)))
        if res < opts.tol and dens.integrable:
            frac = dens.tail_fraction()
            if frac >= TAIL_MASS_LIMIT:
                raise NonIntegrableDensity(f"tail carries {frac:.2e} of the mass")
            log.debug("converged in %d iterations, beta=%.12g", it, beta)
            return ConformalSolution(grid, u, C0, f, dens, beta, res, it, frac,
                                     {"damping": theta})
        rises = rises + 1 if res > prev else 0
        if rises >= 2 and theta > opts.min_damping:
            theta *= 0.5
            rises = 0
        prev = res
        u = u + theta * (Tu - u)
        u[0] = C0

    raise MaxIterExceeded(f"no convergence in {opts.max_iter} iterations (residual {prev:.3g})")


def beta_of(sol):
    """(beta, tail fraction) of a solution's density."""
    try:
        beta = alpha_of(sol.density)
    except NonIntegrablePotential as exc:
        raise NonIntegrableDensity(str(exc)) from exc
    return beta, sol.density.tail_fraction()


def ode_shoot_2d(f, u0, r_end, grid=None, rtol=1e-12, atol=1e-13, bound=1e3):
    """Integrate u'' + u'/r = -f e^{2u}, u(0) = u0, u'(0) = 0 out to r_end.

    Works in t = log r, where the equation reads u_tt = -r^2 f e^{2u}, and
    starts from the series u0 - f(0) e^{2 u0} r^2 / 4 at r = 1e-7.  Returns
    (r, u) at the grid nodes r <= r_end (with r = 0 first), or at r_end alone
    when no grid is given.
    """
    r_start = 1e-7
    if r_end <= r_start:
        raise ValueError("r_end too small")
    a = float(f(0.0)) * np.exp(2 * u0)
    y0 = [u0 - a * r_start**2 / 4, -a * r_start**2 / 2]

    def rhs(t, y):
        s = np.exp(t)
        return [y[1], -s * s * float(f(s)) * np.exp(2 * y[0])]

    def escape(t, y):
        return bound - max(abs(y[0]), abs(y[1]))

    escape.terminal = True

    if grid is None:
        r_out = np.array([0.0, r_end])
    else:
        r_out = grid.nodes[grid.nodes <= r_end * (1 + 1e-12)]
    t_eval = np.log(r_out[1:])
    t_eval = t_eval[t_eval >= np.log(r_start)]
    sol = solve_ivp(rhs, (np.log(r_start), np.log(r_end)), y0, method="DOP853",
                    t_eval=t_eval, rtol=rtol, atol=atol, events=escape)
    if sol.status == 1:
        raise BlowUp(f"|u| or |r u'| reached {bound:g} at r = {np.exp(sol.t_events[0][0]):.4g}")
    if sol.status != 0:
        raise BlowUp(sol.message)
    u = np.empty(r_out.shape)
    u[0] = u0
    inner = r_out[1:] < r_start
    u[1:][inner] = u0 - a * r_out[1:][inner] ** 2 / 4
    u[1:][~inner] = sol.y[0]
    return r_out, u


@dataclass(frozen=True, eq=False)
class SweepRecord:
    C0: float
    outcome: str
    beta: float | None = None
    solution: ConformalSolution | None = None
    message: str = ""


_ERRORS = {
    DivergenceDetected: "DivergenceDetected",
    NonIntegrableDensity: "NonIntegrableDensity",
    MaxIterExceeded: "MaxIterExceeded",
}


def solve_record(f, C0, grid, opts=None):
    """picard_solve with failures folded into a SweepRecord."""
    try:
        sol = picard_solve(f, C0, grid, opts)
    except tuple(_ERRORS) as exc:
        return SweepRecord(float(C0), _ERRORS[type(exc)], None, None, str(exc))
    return SweepRecord(float(C0), "Solved", sol.beta, sol)


def _solve_star(args):
    return solve_record(*args)


def sweep_C0(f, C0_values, grid, opts=None, workers=1):
    """One record per C0, in input order."""
    values = [float(c) for c in C0_values]
    if not values:
        raise ValueError("C0_values must be nonempty")
    jobs = [(f, c, grid, opts) for c in values]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_solve_star, jobs))
    return [_solve_star(j) for j in jobs]
