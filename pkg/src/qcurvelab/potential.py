"""Logarithmic potential of radial densities on R^n, n in {2, 4}.

For a radial density phi the potential

    L(phi)(x) = 2 / ((n-1)! |S^n|) * int log(|y| / |x - y|) phi(y) dy

only needs the spherical mean of the kernel over |y| = s, which has a
closed form (``kernel_mean``).  It separates into products of functions
of r and of s, so L at every node is assembled from a handful of
cumulative integrals in O(M).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import gamma

from .errors import NonIntegrablePotential, UnreliableTail
from .grid import RadialGrid, fit_power_tail, tail_integral

TAIL_MASS_LIMIT = 1e-4


def sphere_volume(k):
    """|S^k|, the k-dimensional measure of the unit sphere in R^{k+1}."""
    if k < 1 or int(k) != k:
        raise ValueError(f"sphere dimension must be an integer >= 1, got {k}")
    return 2.0 * math.pi ** ((k + 1) / 2) / gamma((k + 1) / 2)


def normalization(n):
    """2 / ((n-1)! |S^n|): maps int phi to alpha."""
    return 2.0 / (math.factorial(n - 1) * sphere_volume(n))


def radial_prefactor(n):
    """normalization(n) * |S^{n-1}|; equals 1 for n = 2 and 1/4 for n = 4."""
    return normalization(n) * sphere_volume(n - 1)


def kernel_mean(n, r, s):
    """Mean of log(|y| / |x - y|) over the sphere |y| = s, at |x| = r.

    For n = 4 the extra -rho^2/4 (rho = min/max) comes from the Gegenbauer
    expansion of log|x - y|; it is checked against ``kernel_mean_quadrature``
    in the test suite.
    """
    if n not in (2, 4):
        raise ValueError(f"dimension must be even, in {{2,4}}; got {n}")
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise ValueError("kernel mean needs s > 0")
    if np.any(r < 0):
        raise ValueError("kernel mean needs r >= 0")
    hi = np.maximum(r, s)
    lo = np.minimum(r, s)
    out = np.log(s / hi)
    if n == 4:
        out = out - 0.25 * (lo / hi) ** 2
    return out if out.ndim else float(out)


def kernel_mean_quadrature(n, r, s):
    """Direct adaptive quadrature of the kernel over the sphere |y| = s.

    Independent of ``kernel_mean``: integrates log(s / |x - y|) against the
    normalised zonal measure of S^{n-1} (uniform in theta for n = 2,
    (2/pi) sin^2(theta) for n = 4), with the log singularity at theta = 0
    placed on an endpoint.
    """
    if r == 0:
        return 0.0

    def dist(t):
        return math.sqrt(max(r * r + s * s - 2.0 * r * s * math.cos(t), 0.0))

    if n == 2:
        val, _ = integrate.quad(
            lambda t: math.log(s) - math.log(dist(t)), 0.0, math.pi,
            epsabs=1e-12, epsrel=1e-12, limit=200,
        )
        return val / math.pi
    if n == 4:
        val, _ = integrate.quad(
            lambda t: (math.log(s) - math.log(dist(t))) * math.sin(t) ** 2, 0.0, math.pi,
            epsabs=1e-12, epsrel=1e-12, limit=200,
        )
        return 2.0 * val / math.pi
    raise ValueError(f"dimension must be even, in {{2,4}}; got {n}")


@dataclass(frozen=True, eq=False)
class RadialDensity:
    """Samples of a radial density on a grid plus a power-law tail beyond R_max.

    ``tail_exponent`` is p in phi(s) ~ tail_value * (s/R_max)^{-p}; ``None``
    when the samples vanish at R_max.
    """

    grid: RadialGrid
    values: np.ndarray
    tail_exponent: float | None = None
    tail_value: float = 0.0

    @classmethod
    def from_values(cls, grid, values):
        values = np.asarray(values, dtype=float)
        if values.shape != grid.nodes.shape:
            raise ValueError("values must match the grid nodes")
        p, c = fit_power_tail(grid, values)
        return cls(grid, values, p, c)

    @classmethod
    def from_function(cls, grid, func):
        return cls.from_values(grid, func(grid.nodes))

    @property
    def n(self):
        return self.grid.n

    @property
    def finite(self):
        return bool(np.all(np.isfinite(self.values)))

    @property
    def integrable(self):
        """True when s^{n-1} |phi| has a convergent tail."""
        if not self.finite:
            return False
        p = self.tail_exponent
        return p is None or p > self.n + 1e-9

    def tail_mass(self, m=None):
        """int_{R_max}^inf s^m |phi| ds from the fitted tail (m defaults to n - 1)."""
        m = self.n - 1 if m is None else m
        return abs(tail_integral(self.tail_exponent, abs(self.tail_value), self.grid.r_max, m))

    def abs_mass(self):
        """int_0^inf s^{n-1} |phi| ds including the tail."""
        return self.grid.integrate(np.abs(self.values)) + self.tail_mass()

    def tail_fraction(self):
        total = self.abs_mass()
        return 0.0 if total == 0 else self.tail_mass() / total

    def check(self):
        """Raise unless the mass is finite and the tail share is small."""
        if not self.integrable:
            raise NonIntegrablePotential(
                f"density decay rate {self.tail_exponent} gives a divergent mass"
            )
        frac = self.tail_fraction()
        if frac >= TAIL_MASS_LIMIT:
            raise UnreliableTail(f"tail carries {frac:.2e} of the mass")
        return self

    def __call__(self, s):
        """Evaluate phi at arbitrary radii, using the tail law beyond R_max."""
        s = np.asarray(s, dtype=float)
        R = self.grid.r_max
        inside = s <= R
        out = np.empty(s.shape)
        out[inside] = self.grid.interpolate(self.values, s[inside])
        if self.tail_exponent is None:
            out[~inside] = 0.0
        else:
            out[~inside] = self.tail_value * (s[~inside] / R) ** (-self.tail_exponent)
        return out if out.ndim else float(out)


def _moments(phi):
    g = phi.grid
    v = phi.values
    n = g.n
    A = g.cumulative(v, n - 1, log=True)
    B = g.cumulative(v, n - 1)
    if n == 2:
        return A, B, None, None
    D = g.cumulative(v, n + 1)
    E = g.reverse_cumulative(v, 1)
    return A, B, D, E


def _kernel_tail(phi, strict):
    """int_{R_max}^inf s phi ds, needed by the n = 4 kernel beyond every node."""
    if phi.n == 2:
        return 0.0
    val = tail_integral(phi.tail_exponent, phi.tail_value, phi.grid.r_max, 1)
    if not np.isfinite(val):
        if strict:
            raise NonIntegrablePotential("density tail diverges under the n = 4 kernel")
        return 0.0
    return val


def log_potential_nodes(phi, strict=True):
    """L(phi) at every grid node.

    With ``strict=False`` a divergent kernel tail is dropped instead of
    raising; the solver relies on this for transient iterates.
    """
    g = phi.grid
    r = g.nodes
    A, B, D, E = _moments(phi)
    logr = np.log(np.where(r > 0, r, 1.0))
    out = A - logr * B
    if g.n == 4:
        tail = _kernel_tail(phi, strict)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = out - np.where(r > 0, D / (4.0 * r**2), 0.0) - 0.25 * r**2 * (E + tail)
    out = radial_prefactor(g.n) * out
    out[0] = 0.0
    return out


def log_potential(phi, r):
    """L(phi)(x) at |x| = r for 0 <= r <= R_max (scalar or array)."""
    g = phi.grid
    n = g.n
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    v = phi.values
    A = g.integral_to(v, r_arr, n - 1, log=True)
    B = g.integral_to(v, r_arr, n - 1)
    safe = np.where(r_arr > 0, r_arr, 1.0)
    out = A - np.log(safe) * B
    if n == 4:
        tail = _kernel_tail(phi, strict=True)
        D = g.integral_to(v, r_arr, n + 1)
        E = g.integral_from(v, r_arr, 1)
        out = out - D / (4.0 * safe**2) - 0.25 * r_arr**2 * (E + tail)
    out = np.where(r_arr > 0, radial_prefactor(n) * out, 0.0)
    return out if np.ndim(r) else float(out[0])


def alpha_of(phi):
    """alpha = 2/((n-1)!|S^n|) int phi, with the fitted tail added."""
    if not phi.integrable:
        raise NonIntegrablePotential(
            f"density decay rate {phi.tail_exponent} gives a divergent mass"
        )
    g = phi.grid
    tail = tail_integral(phi.tail_exponent, phi.tail_value, g.r_max, g.n - 1)
    return radial_prefactor(g.n) * (g.integrate(phi.values) + tail)


# -- brute-force planar oracle ---------------------------------------------------


def _gauss_panels(edges, order):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1, None], edges[1:, None]
    pts = 0.5 * (a + b) + 0.5 * (b - a) * x
    wts = 0.5 * (b - a) * w
    return pts.ravel(), wts.ravel()


def _graded(a, b, levels, toward):
    """Breakpoints on [a, b] refined geometrically toward one endpoint."""
    frac = 2.0 ** -np.arange(levels, 0, -1)
    if toward == "a":
        return np.concatenate(([a], a + (b - a) * frac, [b]))
    return np.concatenate(([a], b - (b - a) * frac[::-1], [b]))


def _as_planar(phi):
    if isinstance(phi, RadialDensity):
        return lambda y1, y2: phi(np.hypot(y1, y2))
    return phi


def brute_force_log_potential(phi, x, resolution=16, s_max=None, breakpoints=()):
    """Planar (n = 2) oracle: direct quadrature of the kernel over R^2.

    ``phi`` is a RadialDensity or a callable phi(y1, y2) on arrays (then
    ``s_max`` bounds its support).  No radial reduction is used.  The plane
    is split into

    * the disk B_{r/2}(x), in polar coordinates about x, where the kernel's
      log singularity becomes the harmless rho log rho;
    * the annulus r/2 <= |y| <= 3r/2 minus that disk, parametrised by
      s = r + (r/2) sin(sigma), which turns the square-root edges of the
      excluded arc into smooth functions of sigma;
    * full circles |y| < r/2 and |y| > 3r/2, periodic in the angle.

    ``resolution`` is the Gauss order per panel; the angular point counts
    scale with it.
    """
    n_pts = int(resolution)
    if n_pts < 4:
        raise ValueError("resolution must be at least 4")
    x = np.asarray(x, dtype=float)
    r = float(np.hypot(*x))
    if isinstance(phi, RadialDensity):
        if phi.n != 2:
            raise ValueError("brute-force oracle is planar (n = 2) only")
        s_max = phi.grid.r_max if s_max is None else s_max
    elif s_max is None:
        raise ValueError("s_max is required for callable densities")
    f = _as_planar(phi)
    if r == 0.0:
        return 0.0
    theta_x = math.atan2(x[1], x[0])
    rho0 = 0.5 * r
    n_ang = 8 * n_pts
    levels = 3 * n_pts

    def kernel(y1, y2):
        return np.log(np.hypot(y1, y2)) - np.log(np.hypot(y1 - x[0], y2 - x[1]))

    # disk about x
    rho, wr = _gauss_panels(_graded(0.0, rho0, levels, "a"), n_pts)
    psi = np.linspace(0.0, 2 * np.pi, 2 * n_ang, endpoint=False)
    P, S = np.meshgrid(rho, psi, indexing="ij")
    y1 = x[0] + P * np.cos(S)
    y2 = x[1] + P * np.sin(S)
    integrand = (np.log(np.hypot(y1, y2)) - np.log(P)) * f(y1, y2) * P
    disk = np.sum(wr[:, None] * integrand) * (2 * np.pi / psi.size)

    # annulus minus disk
    sig, wsig = _gauss_panels(np.linspace(-np.pi / 2, np.pi / 2, 9), n_pts)
    s = r + rho0 * np.sin(sig)
    ds = rho0 * np.cos(sig) * wsig
    cos_c = np.clip((s**2 + r**2 - rho0**2) / (2 * s * r), -1.0, 1.0)
    theta_c = np.arccos(cos_c)
    u, wu = _gauss_panels(np.linspace(0.0, 1.0, 9), n_pts)
    span = 2 * np.pi - 2 * theta_c
    T = theta_x + theta_c[:, None] + span[:, None] * u[None, :]
    Sg = s[:, None]
    y1 = Sg * np.cos(T)
    y2 = Sg * np.sin(T)
    vals = kernel(y1, y2) * f(y1, y2) * Sg
    annulus = np.sum(ds[:, None] * span[:, None] * wu[None, :] * vals)

    # full circles inside and outside
    inner = np.concatenate((_graded(0.0, 0.1 * r, levels, "a"),
                            np.geomspace(0.1 * r, r - rho0, 12)[1:]))
    outer = [r + rho0]
    while outer[-1] * 1.25 < s_max:
        outer.append(outer[-1] * 1.25)
    outer.append(s_max)
    circles = 0.0
    theta = theta_x + np.linspace(0.0, 2 * np.pi, 2 * n_ang, endpoint=False)
    for edges in (inner, np.asarray(outer)):
        extra = [b for b in breakpoints if edges[0] < b < edges[-1]]
        edges = np.unique(np.concatenate((edges, extra)))
        sr, ws = _gauss_panels(edges, n_pts)
        Sg, Tg = np.meshgrid(sr, theta, indexing="ij")
        y1 = Sg * np.cos(Tg)
        y2 = Sg * np.sin(Tg)
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = kernel(y1, y2) * f(y1, y2) * Sg
        circles += np.sum(ws[:, None] * vals) * (2 * np.pi / theta.size)

    return float((disk + annulus + circles) * normalization(2))


def ball_average(phi, x, fraction=0.5, order=48):
    """Mean of L(phi) over the ball B_{fraction |x|}(x), n = 2.

    L is evaluated radially through ``log_potential`` at the nodes of a
    polar rule centred on x.
    """
    if phi.n != 2:
        raise ValueError("ball average is implemented for n = 2")
    x = np.asarray(x, dtype=float)
    radius = fraction * float(np.hypot(*x))
    rho, wr = _gauss_panels(np.linspace(0.0, radius, 5), order)
    psi = np.linspace(0.0, 2 * np.pi, 4 * order, endpoint=False)
    P, S = np.meshgrid(rho, psi, indexing="ij")
    dist = np.hypot(x[0] + P * np.cos(S), x[1] + P * np.sin(S))
    L = log_potential(phi, dist.ravel()).reshape(dist.shape)
    total = np.sum(wr[:, None] * L * P) * (2 * np.pi / psi.size)
    return float(total / (math.pi * radius**2))


def ball_integral_abs(phi, R):
    """int_{B_R(0)} |L(phi)| dx via the radial grid."""
    g = phi.grid
    L = np.abs(log_potential_nodes(phi))
    return sphere_volume(g.n - 1) * float(g.integral_to(L, R)[0])
