"""Pohozaev-type balance for radial solutions and the curvature hypothesis checks."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import HypothesisViolated
from .grid import fit_power_tail, tail_integral
from .potential import sphere_volume

MARGIN_REL = 0.01


def pohozaev_prefactor(n):
    """4 |S^{n-1}| / (n! |S^n|): 1 for n = 2, 1/8 for n = 4."""
    return 4.0 * sphere_volume(n - 1) / (math.factorial(n) * sphere_volume(n))


def _integrand(sol, f):
    return f.radial_derivative_times_r(sol.grid.nodes) * np.exp(sol.n * sol.u)


def lhs_integral(sol, f=None, R=None):
    """Normalised int_{B_R} x . grad f e^{nu} dx; R defaults to R_max (scalar or array)."""
    f = sol.curvature if f is None else f
    g = sol.grid
    R = g.r_max if R is None else R
    R_arr = np.atleast_1d(np.asarray(R, dtype=float))
    vals = pohozaev_prefactor(sol.n) * g.integral_to(_integrand(sol, f), R_arr)
    return vals if np.ndim(R) else float(vals[0])


def lhs_limit(sol, f=None):
    """lhs at R = infinity, adding the fitted power tail beyond R_max."""
    f = sol.curvature if f is None else f
    g = sol.grid
    w = _integrand(sol, f)
    p, v_R = fit_power_tail(g, w)
    return pohozaev_prefactor(sol.n) * (g.integrate(w) + tail_integral(p, v_R, g.r_max, sol.n - 1))


@dataclass(frozen=True)
class PohozaevReport:
    radii: np.ndarray
    lhs_samples: np.ndarray
    boundary_terms: np.ndarray
    rhs: float
    margin: float
    lhs_limit: float
    mass: float
    hypothesis_ok: bool

    @property
    def tolerance(self):
        return MARGIN_REL * (1.0 + abs(self.rhs))

    @property
    def ok(self):
        return self.margin <= self.tolerance

    def as_dict(self):
        return {
            "rhs": self.rhs,
            "margin": self.margin,
            "lhs_limit": self.lhs_limit,
            "tolerance": self.tolerance,
            "ok": self.ok,
            "hypothesis_ok": self.hypothesis_ok,
            "n_radii": int(self.radii.size),
        }


def _local_minima(b):
    """Indices i with b[i] <= both neighbours; the last node counts if b[-1] <= b[-2]."""
    inner = np.nonzero((b[1:-1] <= b[:-2]) & (b[1:-1] <= b[2:]))[0] + 1
    tail = [b.size - 1] if b[-1] <= b[-2] else []
    return np.concatenate((inner, tail)).astype(int)


def check_inequality(sol, f=None):
    """Compare the Pohozaev integral with beta(beta - 2) along a radius sequence.

    R_i are the local minima of the boundary term R |f| e^{nu} |dB_R|,
    thinned so the boundary terms strictly decrease.  The margin is the
    largest lhs - rhs over the R_i in [R_max^(1/2), R_max].
    """
    f = sol.curvature if f is None else f
    g = sol.grid
    r = g.nodes
    lo = math.sqrt(g.r_max)
    fv = np.asarray(f(r[g.window(lo, g.r_max)]))
    if np.any(fv > 0) and np.any(fv < 0):
        raise HypothesisViolated("f changes sign on the tail of the grid")

    n = sol.n
    dens = np.abs(f(r)) * np.exp(n * sol.u)
    boundary = sphere_volume(n - 1) * r**n * dens
    lhs_all = pohozaev_prefactor(n) * g.cumulative(_integrand(sol, f))

    cand = _local_minima(boundary)
    cand = cand[r[cand] >= 1.0] if np.any(r[cand] >= 1.0) else cand
    keep = []
    best = np.inf
    for i in cand:
        if boundary[i] < best:
            keep.append(i)
            best = boundary[i]
    idx = np.array(keep, dtype=int)

    beta = float(sol.beta)
    rhs = beta * (beta - 2.0)
    tail_sel = idx[r[idx] >= lo * (1 - 1e-12)]
    if tail_sel.size == 0:
        tail_sel = idx[-1:]
    margin = float(np.max(lhs_all[tail_sel] - rhs))
    mass = sphere_volume(n - 1) * g.integrate(dens)
    return PohozaevReport(r[idx], lhs_all[idx], boundary[idx], rhs, margin,
                          lhs_limit(sol, f), mass, True)


@dataclass(frozen=True)
class SignCondition:
    passed: bool
    inf_value: float
    threshold: float


def _default_radii():
    return np.concatenate(([0.0], np.geomspace(1e-4, 1e8, 4096)))


def sign_condition_check(f, n, radii=None):
    """inf of r f'/f over the radii and the family's limit, against -n/2."""
    if n not in (2, 4):
        raise ValueError("dimension must be even, in {2,4}")
    r = _default_radii() if radii is None else np.asarray(radii, dtype=float)
    if f.sign_class != "positive" or np.any(np.asarray(f(r)) <= 0):
        raise ValueError("sign condition needs a strictly positive f")
    inf = min(float(np.min(f.radial_log_derivative(r))), float(f.log_derivative_limit))
    return SignCondition(inf >= -n / 2.0, inf, -n / 2.0)


@dataclass(frozen=True)
class LowerBound:
    c0: float
    passed: bool
    s: float


def lower_bound_check(f, s, radii=None):
    """Constructive c0 with f(r) >= c0 r^s for r >= 1, given r f'/f >= s there."""
    r = np.geomspace(1.0, 1e8, 2000) if radii is None else np.asarray(radii, dtype=float)
    r = r[r >= 1.0]
    if f.sign_class != "positive" or np.any(np.asarray(f(r)) <= 0):
        raise ValueError("lower bound check needs a strictly positive f")
    inf = min(float(np.min(f.radial_log_derivative(r))), float(f.log_derivative_limit))
    if inf < s - 1e-12:
        raise HypothesisViolated(f"r f'/f reaches {inf:g} < s = {s:g} on r >= 1")
    t1 = 1.0
    c0 = t1 ** (-s) * float(f(t1))
    passed = bool(np.all(f(r) >= c0 * r**s * (1 - 1e-12)))
    return LowerBound(c0, passed, float(s))
