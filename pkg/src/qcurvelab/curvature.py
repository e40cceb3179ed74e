"""Closed-form radial curvature families f(r).

Every family is a function of r^2, so f'(0) = 0, and carries its exact
radial log-derivative r f'(r) / f(r) (which equals x . grad f / f).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TAGS = ("constant", "constant_bump", "powerlaw", "neg_powerlaw", "neg_growth")


def _bump(r):
    """exp(1 - 1/(1 - r^2)) on r < 1, zero outside; equals 1 at the origin."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    m = r < 1.0
    out[m] = np.exp(1.0 - 1.0 / (1.0 - r[m] ** 2))
    return out


def _bump_log_slope(r):
    """r b'(r) / b(r) = -2 r^2 / (1 - r^2)^2 inside the support."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    m = r < 1.0
    out[m] = -2.0 * r[m] ** 2 / (1.0 - r[m] ** 2) ** 2
    return out


@dataclass(frozen=True)
class PrescribedCurvature:
    """A radial prescribed curvature f.

    tag            f(r)
    constant       c
    constant_bump  c + bump * b(r), b a smooth bump supported in [0, 1)
    powerlaw       c (1 + r^2)^(-exponent/2)
    neg_powerlaw   -c (1 + r^2)^(-exponent/2)
    neg_growth     -c (1 + r^2)^(exponent/2)
    """

    tag: str
    c: float = 1.0
    exponent: float = 0.0
    bump: float = 0.0

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError(f"unknown family tag {self.tag!r}")
        if self.c < 0:
            raise ValueError("c must be nonnegative")
        if self.tag in ("powerlaw", "neg_powerlaw", "neg_growth") and self.exponent <= 0:
            raise ValueError("exponent must be positive")
        if self.tag == "constant_bump" and self.bump < 0:
            raise ValueError("bump amplitude must be nonnegative")

    # convenience constructors
    @classmethod
    def constant(cls, c=1.0):
        return cls("constant", c)

    @classmethod
    def powerlaw(cls, l, c=1.0):
        return cls("powerlaw", c, l)

    @classmethod
    def neg_powerlaw(cls, p, c=1.0):
        return cls("neg_powerlaw", c, p)

    @classmethod
    def neg_growth(cls, s, c=1.0):
        return cls("neg_growth", c, s)

    @classmethod
    def constant_bump(cls, c=1.0, amplitude=1.0):
        return cls("constant_bump", c, 0.0, amplitude)

    def __call__(self, r):
        return self.evaluate(r)

    def evaluate(self, r):
        r = np.asarray(r, dtype=float)
        q = 1.0 + r**2
        t = self.tag
        if t == "constant":
            out = np.full_like(r, self.c)
        elif t == "constant_bump":
            out = self.c + self.bump * _bump(r)
        elif t == "powerlaw":
            out = self.c * q ** (-0.5 * self.exponent)
        elif t == "neg_powerlaw":
            out = -self.c * q ** (-0.5 * self.exponent)
        else:
            out = -self.c * q ** (0.5 * self.exponent)
        return out if out.ndim else float(out)

    def radial_log_derivative(self, r):
        """r f'(r) / f(r), exact.  Independent of c for the power families."""
        r = np.asarray(r, dtype=float)
        frac = r**2 / (1.0 + r**2)
        t = self.tag
        if t == "constant":
            out = np.zeros_like(r)
        elif t == "constant_bump":
            b = self.bump * _bump(r)
            out = b * _bump_log_slope(r) / (self.c + b)
        elif t in ("powerlaw", "neg_powerlaw"):
            out = -self.exponent * frac
        else:
            out = self.exponent * frac
        return out if out.ndim else float(out)

    def radial_derivative_times_r(self, r):
        """r f'(r), the radial form of x . grad f."""
        r = np.asarray(r, dtype=float)
        if self.tag == "constant_bump":
            out = self.bump * _bump(r) * _bump_log_slope(r)
        else:
            out = self.evaluate(r) * self.radial_log_derivative(r)
        return out if np.ndim(out) else float(out)

    @property
    def log_derivative_limit(self):
        """lim_{r -> inf} r f'/f (the bump has compact support)."""
        return self.decay_exponent

    @property
    def sign_class(self):
        """Sign of f near infinity: 'positive', 'negative' or 'zero' (c = 0)."""
        if self.c == 0:
            return "zero"
        return "negative" if self.tag.startswith("neg_") else "positive"

    @property
    def decay_exponent(self):
        """Exponent e with |f| ~ r^e at infinity."""
        return {
            "constant": 0.0,
            "constant_bump": 0.0,
            "powerlaw": -self.exponent,
            "neg_powerlaw": -self.exponent,
            "neg_growth": self.exponent,
        }[self.tag]

    def describe(self):
        d = {"tag": self.tag, "c": self.c, "exponent": self.exponent}
        if self.tag == "constant_bump":
            d["bump"] = self.bump
        return d

    def label(self):
        t = self.tag
        if t == "constant":
            return f"f = {self.c:g}"
        if t == "constant_bump":
            return f"f = {self.c:g} + {self.bump:g} bump"
        sign = "-" if t.startswith("neg_") else ""
        power = self.exponent if t == "neg_growth" else -self.exponent
        return f"f = {sign}{self.c:g}(1+r^2)^({power:g}/2)"

