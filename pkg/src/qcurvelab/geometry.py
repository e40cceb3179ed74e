"""Volume growth, volume entropy, geodesic distance and completeness of e^{2u}|dx|^2."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FitWindowTooSmall
from .grid import fit_power_tail, tail_integral
from .potential import sphere_volume

EPS_BETA = 0.05
BORDERLINE = 0.02
MIN_FIT_POINTS = 8


@dataclass(frozen=True)
class SlopeFit:
    """Least-squares slope on a log-log window."""

    slope: float
    lo: float
    hi: float
    r_squared: float
    points: int
    flag: str = ""

    def __float__(self):
        return float(self.slope)


@dataclass(frozen=True)
class GeometryReport:
    beta: float
    tau_fit: SlopeFit
    distance_exponent_fit: SlopeFit
    d_total: float
    volume_total: float
    tail_divergent: bool
    verdict: str
    tau_consistency: float
    distance_consistency: float

    def as_dict(self):
        return {
            "beta": self.beta,
            "tau_fit": self.tau_fit.slope,
            "tau_r_squared": self.tau_fit.r_squared,
            "distance_exponent_fit": self.distance_exponent_fit.slope,
            "distance_flag": self.distance_exponent_fit.flag,
            "fit_window": [self.tau_fit.lo, self.tau_fit.hi],
            "d_total": self.d_total,
            "volume_total": self.volume_total,
            "tail_divergent": self.tail_divergent,
            "verdict": self.verdict,
            "tau_consistency": self.tau_consistency,
            "distance_consistency": self.distance_consistency,
        }


def _volume_density(sol):
    return np.exp(sol.n * sol.u)


def volume_growth(sol, radii):
    """V(R) = |B_R| in the metric e^{2u}|dx|^2, for each R in ``radii``."""
    radii = np.asarray(radii, dtype=float)
    if np.any(radii <= 0):
        raise ValueError("radii must be positive")
    n = sol.n
    vals = sphere_volume(n - 1) * sol.grid.integral_to(_volume_density(sol), radii.ravel())
    return vals.reshape(radii.shape) if radii.ndim else float(vals[0])


def total_volume(sol):
    """V(infinity) with the fitted tail of e^{nu}; inf when that tail diverges."""
    g = sol.grid
    w = _volume_density(sol)
    p, v_R = fit_power_tail(g, w)
    return sphere_volume(sol.n - 1) * (g.integrate(w) + tail_integral(p, v_R, g.r_max, sol.n - 1))


def _fit(x, y, lo, hi):
    if x.size < MIN_FIT_POINTS:
        raise FitWindowTooSmall(f"only {x.size} points in [{lo:.3g}, {hi:.3g}]")
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    ss = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - float(np.sum(resid**2) / ss) if ss > 0 else 1.0
    return float(slope), r2


def _window(sol):
    R = sol.grid.r_max
    lo = np.sqrt(R)
    return sol.grid.window(lo, R), lo, R


def volume_entropy(sol):
    """Slope of log V(R) against log |B_R| over [R_max^(1/2), R_max]."""
    idx, lo, hi = _window(sol)
    r = sol.grid.nodes[idx]
    V = sphere_volume(sol.n - 1) * sol.grid.cumulative(_volume_density(sol))[idx]
    # log|B_R| = n log R + const
    slope, r2 = _fit(sol.n * np.log(r), np.log(V), lo, hi)
    return SlopeFit(slope, lo, hi, r2, idx.size)


def geodesic_distance(sol, r):
    """d(r) = int_0^r e^{u(s)} ds, the distance from the origin to |x| = r."""
    r = np.asarray(r, dtype=float)
    vals = sol.grid.integral_to(np.exp(sol.u), r.ravel(), m=0)
    return vals.reshape(r.shape) if r.ndim else float(vals[0])


def _distance_tail(sol):
    g = sol.grid
    p, v_R = fit_power_tail(g, np.exp(sol.u))
    return tail_integral(p, v_R, g.r_max, 0)


def total_distance(sol):
    """d(infinity) with the fitted tail of e^u; inf when the metric is complete."""
    return float(sol.grid.integrate(np.exp(sol.u), m=0) + _distance_tail(sol))


def distance_exponent(sol):
    """Slope of log d(r) against log r over [R_max^(1/2), R_max].

    When the fitted tail of e^u is integrable the distance is bounded and the
    exponent is reported as 0 with flag 'bounded'.
    """
    idx, lo, hi = _window(sol)
    if np.isfinite(_distance_tail(sol)):
        return SlopeFit(0.0, lo, hi, 1.0, idx.size, "bounded")
    r = sol.grid.nodes[idx]
    d = sol.grid.cumulative(np.exp(sol.u), m=0)[idx]
    slope, r2 = _fit(np.log(r), np.log(d), lo, hi)
    return SlopeFit(slope, lo, hi, r2, idx.size)


def completeness_verdict(sol, eps=EPS_BETA):
    """Classify the metric as complete, incomplete or undetermined.

    |beta - 1| < 0.02 is undetermined outright.  Otherwise complete needs
    beta < 1 - eps and a divergent fitted tail of e^u; incomplete needs
    beta > 1 + eps or a finite extrapolated distance to infinity.
    """
    beta = float(sol.beta)
    tau = volume_entropy(sol)
    dexp = distance_exponent(sol)
    d_total = total_distance(sol)
    divergent = not np.isfinite(d_total)
    if abs(beta - 1.0) < BORDERLINE:
        verdict = "undetermined"
    elif beta < 1.0 - eps and divergent:
        verdict = "complete"
    elif beta > 1.0 + eps or not divergent:
        verdict = "incomplete"
    else:
        verdict = "undetermined"
    target = max(1.0 - beta, 0.0)
    return GeometryReport(
        beta,
        tau,
        dexp,
        d_total,
        total_volume(sol),
        divergent,
        verdict,
        abs(tau.slope - target),
        abs(dexp.slope - target),
    )
