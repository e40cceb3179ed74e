"""Radial grids on [0, R_max] and the quadrature built on them.

Nodes are r_0 = 0 followed by a geometric progression r_1 < ... < r_M.
Integrals of the form

    int_a^b s^m (log s)^k g(s) ds,   k in {0, 1}

are evaluated by product integration: on every cell [r_i, r_{i+1}] the
sampled g is replaced by its local quintic Lagrange interpolant in s (six
nearest nodes) and the product with the weight s^m (log s)^k is integrated
with an 8-point Gauss-Legendre rule.  Quintics times s^m are integrated
exactly for m <= 10, so the
nodal weights reproduce the moments of 1 and s to rounding error.  The
first cell [0, r_1] uses linear interpolation and closed-form moments,
which keeps the log s singularity at the origin out of the Gauss rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)
_STENCIL = 6


def _lagrange_basis(xs, s):
    """Lagrange basis.  xs: (C, K) stencils, s: (C, G) points -> (C, G, K)."""
    K = xs.shape[1]
    out = np.ones(s.shape + (K,))
    for j in range(K):
        for k in range(K):
            if k != j:
                out[..., j] *= (s - xs[:, k, None]) / (xs[:, j, None] - xs[:, k, None])
    return out


def _moment(p, k, a, b):
    """int_a^b s^p (log s)^k ds for p >= 0, 0 <= a <= b."""

    def prim(x):
        x = np.asarray(x, dtype=float)
        if k == 0:
            return x ** (p + 1) / (p + 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = x ** (p + 1) * (np.log(x) / (p + 1) - 1.0 / (p + 1) ** 2)
        return np.where(x > 0, val, 0.0)

    return prim(b) - prim(a)


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Discretisation of [0, R_max] for radial functions on R^n."""

    n: int
    nodes: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.n not in (2, 4):
            raise ValueError(f"dimension must be even, in {{2,4}}; got {self.n}")
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < _STENCIL + 2:
            raise ValueError(f"need at least {_STENCIL + 2} nodes")
        if nodes[0] != 0.0:
            raise ValueError("first node must be r_0 = 0")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def log_spaced(cls, n, r_min=1e-4, r_max=1e8, M=4096):
        """r_0 = 0 plus M geometrically spaced nodes from r_min to r_max."""
        if not 0 < r_min < r_max:
            raise ValueError("need 0 < r_min < r_max")
        if M < _STENCIL + 1:
            raise ValueError(f"M must be at least {_STENCIL + 1}")
        return cls(n, np.concatenate(([0.0], np.geomspace(r_min, r_max, M))))

    @property
    def M(self):
        return self.nodes.size - 1

    @property
    def r_max(self):
        return float(self.nodes[-1])

    @property
    def weights(self):
        """Nodal weights for int_0^{R_max} g(s) s^{n-1} ds."""
        key = ("nodal", self.n - 1)
        if key not in self._cache:
            idx, W = self._cell_weights(self.n - 1, False)
            w = np.zeros(self.nodes.size)
            np.add.at(w, idx, W)
            self._cache[key] = w
        return self._cache[key]

    def window(self, lo, hi):
        """Indices of nodes with lo <= r <= hi."""
        r = self.nodes
        return np.nonzero((r >= lo * (1 - 1e-12)) & (r <= hi * (1 + 1e-12)))[0]

    # -- product integration -------------------------------------------------

    def _stencils(self, cells):
        half = _STENCIL // 2
        j0 = np.clip(cells - half + 1, 1, self.M - _STENCIL + 1)
        return j0[:, None] + np.arange(_STENCIL)

    def _interval_weights(self, cells, a, b, m, log):
        """Weights (C, K) and stencil indices (C, K) for int_a^b inside each cell."""
        cells = np.asarray(cells, dtype=int)
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        k = 1 if log else 0
        idx = self._stencils(cells)
        W = np.zeros(idx.shape)

        inner = cells >= 1
        if np.any(inner):
            ai, bi = a[inner], b[inner]
            s = 0.5 * (ai + bi)[:, None] + 0.5 * (bi - ai)[:, None] * _GL_X
            w = 0.5 * (bi - ai)[:, None] * _GL_W * s**m
            if log:
                w = w * np.log(s)
            basis = _lagrange_basis(self.nodes[idx[inner]], s)
            W[inner] = np.einsum("cg,cgj->cj", w, basis)

        first = ~inner
        if np.any(first):
            r1 = self.nodes[1]
            a0, b0 = a[first], b[first]
            mom_m = _moment(m, k, a0, b0)
            mom_m1 = _moment(m + 1, k, a0, b0)
            idx[first] = np.arange(_STENCIL)
            W[first, 0] = mom_m - mom_m1 / r1
            W[first, 1] = mom_m1 / r1
            W[first, 2:] = 0.0
        return idx, W

    def _cell_weights(self, m, log):
        key = ("cell", m, log)
        if key not in self._cache:
            cells = np.arange(self.M)
            self._cache[key] = self._interval_weights(
                cells, self.nodes[:-1], self.nodes[1:], m, log
            )
        return self._cache[key]

    def cell_integrals(self, g, m=None, log=False):
        """int over each cell of s^m (log s)^k g(s); m defaults to n - 1."""
        m = self.n - 1 if m is None else m
        idx, W = self._cell_weights(m, log)
        return np.einsum("cj,cj->c", W, np.asarray(g, dtype=float)[idx])

    def cumulative(self, g, m=None, log=False):
        """Array of int_0^{r_k} s^m (log s)^k g(s) ds for every node k."""
        c = self.cell_integrals(g, m, log)
        return np.concatenate(([0.0], np.cumsum(c)))

    def reverse_cumulative(self, g, m=None, log=False):
        """Array of int_{r_k}^{R_max} s^m (log s)^k g(s) ds, summed from the outside in."""
        c = self.cell_integrals(g, m, log)
        return np.concatenate((np.cumsum(c[::-1])[::-1], [0.0]))

    def integrate(self, g, m=None, log=False):
        return float(np.sum(self.cell_integrals(g, m, log)))

    def _locate(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        if np.any(r < 0) or np.any(r > self.r_max * (1 + 1e-12)):
            raise ValueError("radius outside [0, R_max]")
        cells = np.clip(np.searchsorted(self.nodes, r, side="right") - 1, 0, self.M - 1)
        return r, cells

    def integral_to(self, g, r, m=None, log=False):
        """int_0^r for arbitrary radii r <= R_max (vectorised)."""
        m = self.n - 1 if m is None else m
        r, cells = self._locate(r)
        g = np.asarray(g, dtype=float)
        cum = self.cumulative(g, m, log)
        idx, W = self._interval_weights(cells, self.nodes[cells], r, m, log)
        return cum[cells] + np.einsum("cj,cj->c", W, g[idx])

    def integral_from(self, g, r, m=None, log=False):
        """int_r^{R_max} for arbitrary radii r <= R_max (vectorised)."""
        m = self.n - 1 if m is None else m
        r, cells = self._locate(r)
        g = np.asarray(g, dtype=float)
        rev = self.reverse_cumulative(g, m, log)
        idx, W = self._interval_weights(cells, r, self.nodes[cells + 1], m, log)
        return rev[cells + 1] + np.einsum("cj,cj->c", W, g[idx])

    def interpolate(self, g, s):
        """Evaluate the piecewise interpolant used by the quadrature at radii s."""
        s = np.asarray(s, dtype=float)
        flat, cells = self._locate(s.ravel())
        g = np.asarray(g, dtype=float)
        idx = self._stencils(cells)
        out = np.empty(flat.shape)
        inner = cells >= 1
        basis = _lagrange_basis(self.nodes[idx[inner]], flat[inner, None])[:, 0, :]
        out[inner] = np.einsum("cj,cj->c", basis, g[idx[inner]])
        r1 = self.nodes[1]
        t = flat[~inner] / r1
        out[~inner] = (1 - t) * g[0] + t * g[1]
        return out.reshape(s.shape)


def fit_power_tail(grid, values, decades=1.0):
    """Fit |v(s)| ~ |v(R)| (s/R)^{-p} on the last ``decades`` decades of the grid.

    Returns ``(p, v_R)`` with v_R the sample at R = R_max, so the tail law is
    anchored at the last node (no R^p factor that could overflow).
    ``(None, 0.0)`` means the tail is negligible (exactly zero at R_max), and
    ``p = -inf`` flags non-finite samples.
    """
    v = np.asarray(values, dtype=float)
    R = grid.r_max
    sel = grid.window(R * 10.0**-decades, R)
    tail = v[sel]
    if not np.all(np.isfinite(tail)):
        return -np.inf, np.nan
    if tail[-1] == 0.0 or not np.any(tail):
        return None, 0.0
    nz = tail != 0.0
    s = grid.nodes[sel][nz]
    if nz.sum() < 3:
        return None, 0.0
    slope = np.polyfit(np.log(s), np.log(np.abs(tail[nz])), 1)[0]
    return -float(slope), float(tail[-1])


def tail_integral(p, v_R, R, m):
    """int_R^inf s^m v_R (s/R)^{-p} ds; inf (signed) when it diverges."""
    if p is None or v_R == 0.0:
        return 0.0
    if not np.isfinite(p) or p <= m + 1 + 1e-9:
        return np.copysign(np.inf, v_R) if np.isfinite(v_R) else np.inf
    return v_R * R ** (m + 1) / (p - m - 1)
