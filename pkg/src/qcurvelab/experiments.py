"""Scripted experiments: a curvature family, a C0 sweep and a predicted outcome.

Each experiment id names a qualitative prediction (finite volume, beta above
one, no integrable solution, an attained beta range, a complete metric).
``run_experiment`` solves every C0, attaches geometry and Pohozaev
diagnostics, and grades each record against the prediction.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .curvature import PrescribedCurvature
from .geometry import EPS_BETA, completeness_verdict, geodesic_distance
from .grid import RadialGrid
from .plotting import line_panel
from .pohozaev import check_inequality
from .solver import SolverOptions, sweep_C0

EXPERIMENT_IDS = (
    "SPHERE_SANITY",
    "THM_F_GEQ_1",
    "THM_SIGN_COND",
    "THM_NEG_DECAY",
    "THM_NEG_GROWTH",
    "MCOWEN_EXIST",
    "COMPLETE_EXIST",
)
DEFAULT_C0 = tuple(float(c) for c in np.linspace(-4.0, 2.0, 9))
SLACK = 0.02

CONSISTENT = "consistent-with-theorem"
VIOLATION = "VIOLATION"
INCONCLUSIVE = "inconclusive"


def _default_family(exp_id, n, bump):
    if exp_id == "SPHERE_SANITY":
        return PrescribedCurvature.constant(math.factorial(n - 1))
    if exp_id == "THM_F_GEQ_1":
        return PrescribedCurvature.constant_bump(1.0, 1.0) if bump else PrescribedCurvature.constant(1.0)
    if exp_id == "THM_SIGN_COND":
        return PrescribedCurvature.powerlaw(n / 2)
    if exp_id == "THM_NEG_DECAY":
        return PrescribedCurvature.neg_powerlaw(n)
    if exp_id == "THM_NEG_GROWTH":
        return PrescribedCurvature.neg_growth(1.0)
    return PrescribedCurvature.powerlaw(3.0)


def admissibility_problems(exp_id, n, f):
    """Reasons why family ``f`` cannot be used for ``exp_id`` (empty when fine)."""
    if exp_id not in EXPERIMENT_IDS:
        return [f"unknown experiment id {exp_id!r}"]
    t = f.tag
    bad = []
    if exp_id == "SPHERE_SANITY" and (t != "constant" or f.c != math.factorial(n - 1)):
        bad.append(f"SPHERE_SANITY needs f constant = {math.factorial(n - 1)}")
    elif exp_id == "THM_F_GEQ_1" and (t not in ("constant", "constant_bump") or f.c < 1):
        bad.append("THM_F_GEQ_1 needs a constant or constant_bump family with c >= 1")
    elif exp_id == "THM_SIGN_COND" and (t != "powerlaw" or f.exponent > n / 2):
        bad.append(f"THM_SIGN_COND needs powerlaw with exponent <= {n / 2:g}")
    elif exp_id == "THM_NEG_DECAY" and (t != "neg_powerlaw" or f.exponent > n):
        bad.append(f"THM_NEG_DECAY needs neg_powerlaw with exponent <= {n}")
    elif exp_id == "THM_NEG_GROWTH" and t != "neg_growth":
        bad.append("THM_NEG_GROWTH needs neg_growth")
    elif exp_id == "MCOWEN_EXIST" and (t != "powerlaw" or n != 2):
        bad.append("MCOWEN_EXIST needs powerlaw with n = 2")
    elif exp_id == "COMPLETE_EXIST" and (t != "powerlaw" or f.exponent <= 1):
        bad.append("COMPLETE_EXIST needs powerlaw with exponent > 1")
    if f.c == 0:
        bad.append("c must be positive for experiments")
    return bad


@dataclass(frozen=True)
class ExperimentSpec:
    id: str
    n: int = 2
    family: PrescribedCurvature | None = None
    c0_grid: tuple = DEFAULT_C0
    grid_M: int = 4096
    r_max: float = 1e8
    solver: SolverOptions = field(default_factory=SolverOptions)
    bump: bool = False

    def __post_init__(self):
        if self.n not in (2, 4):
            raise ValueError("dimension must be even, in {2,4}")
        if self.family is None:
            object.__setattr__(self, "family", _default_family(self.id, self.n, self.bump))
        if self.id == "SPHERE_SANITY" and self.c0_grid == DEFAULT_C0:
            object.__setattr__(self, "c0_grid", (math.log(2.0),))
        object.__setattr__(self, "c0_grid", tuple(float(c) for c in self.c0_grid))
        problems = admissibility_problems(self.id, self.n, self.family)
        if problems:
            raise ValueError("; ".join(problems))

    def make_grid(self):
        return RadialGrid.log_spaced(self.n, r_max=self.r_max, M=self.grid_M)

    def describe(self):
        return {
            "id": self.id,
            "n": self.n,
            "family": self.family.describe(),
            "c0_grid": list(self.c0_grid),
            "grid": {"M": self.grid_M, "r_max": self.r_max},
            "solver": {
                "damping": self.solver.damping,
                "tol": self.solver.tol,
                "max_iter": self.solver.max_iter,
                "beta_cap": self.solver.beta_cap,
            },
        }


@dataclass(frozen=True, eq=False)
class RecordResult:
    C0: float
    outcome: str
    beta: float | None
    geometry: object = None
    pohozaev: object = None
    grade: str = "n/a"  # match, violation, excluded, inconclusive
    solution: object = None
    message: str = ""

    @property
    def borderline(self):
        return self.beta is not None and abs(self.beta - 1.0) <= EPS_BETA


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    spec: ExperimentSpec
    records: list
    verdict: str
    summary: dict

    def provenance(self):
        import scipy

        return {
            "spec": self.spec.describe(),
            "versions": {
                "qcurvelab": __version__,
                "numpy": np.__version__,
                "scipy": scipy.__version__,
            },
        }


# -- grading -----------------------------------------------------------------


def _grade(spec, rec):
    """Grade one record against the experiment's prediction."""
    eid = spec.id
    if eid in ("THM_NEG_DECAY", "THM_NEG_GROWTH"):
        if rec.outcome == "NonIntegrableDensity":
            return "match"
        return "violation" if rec.outcome == "Solved" and not rec.borderline else "inconclusive"
    if rec.outcome != "Solved":
        return "inconclusive"
    beta, geo, poh = rec.beta, rec.geometry, rec.pohozaev
    if poh is not None and not poh.ok:
        return "violation"
    if eid == "SPHERE_SANITY":
        good = abs(beta - 2.0) < 1e-3 and abs(geo.d_total - math.pi) < 1e-3
        return "match" if good else "violation"
    if rec.borderline:
        return "excluded"
    if eid == "THM_F_GEQ_1":
        return "match" if geo.verdict == "incomplete" and geo.tau_fit.slope < 0.05 else "violation"
    if eid == "THM_SIGN_COND":
        return "match" if beta > 1.0 + EPS_BETA and geo.verdict == "incomplete" else "violation"
    if eid == "MCOWEN_EXIST":
        lo = max(0.0, 2.0 - spec.family.exponent)
        return "match" if lo - SLACK < beta < 2.0 + SLACK else "violation"
    # COMPLETE_EXIST: below the threshold the metric must be complete
    if beta < 1.0 - EPS_BETA:
        ok = geo.verdict == "complete" and geo.distance_consistency < 0.05
        return "match" if ok else "violation"
    return "match" if geo.verdict != "complete" else "violation"


def _overall(spec, records):
    grades = [r.grade for r in records]
    solved = [r for r in records if r.outcome == "Solved"]
    betas = [float(r.beta) for r in solved]
    summary = {
        "records": len(records),
        "solved": len(solved),
        "grades": {g: grades.count(g) for g in sorted(set(grades))},
        "beta_min": min(betas) if betas else None,
        "beta_max": max(betas) if betas else None,
    }
    if "violation" in grades:
        return VIOLATION, summary
    if not records:
        return INCONCLUSIVE, summary
    eid = spec.id
    if eid == "MCOWEN_EXIST":
        lo = max(0.0, 2.0 - spec.family.exponent)
        span = float(max(betas) - min(betas)) if betas else 0.0
        summary["interval"] = [lo, 2.0]
        summary["span"] = span
        ok = bool(betas) and span >= 0.5 * (2.0 - lo)
        return (CONSISTENT if ok else INCONCLUSIVE), summary
    if eid == "COMPLETE_EXIST":
        n_complete = sum(1 for r in solved if r.geometry.verdict == "complete" and r.grade == "match")
        summary["complete"] = n_complete
        return (CONSISTENT if n_complete else INCONCLUSIVE), summary
    if eid in ("THM_NEG_DECAY", "THM_NEG_GROWTH"):
        return (CONSISTENT if all(g == "match" for g in grades) else INCONCLUSIVE), summary
    return (CONSISTENT if "match" in grades else INCONCLUSIVE), summary


def run_experiment(spec, workers=1):
    grid = spec.make_grid()
    raw = sweep_C0(spec.family, spec.c0_grid, grid, spec.solver, workers=workers)
    records = []
    for r in raw:
        geo = poh = None
        if r.outcome == "Solved":
            geo = completeness_verdict(r.solution)
            poh = check_inequality(r.solution)
        rec = RecordResult(r.C0, r.outcome, r.beta, geo, poh, "n/a", r.solution, r.message)
        records.append(RecordResult(rec.C0, rec.outcome, rec.beta, geo, poh,
                                    _grade(spec, rec), rec.solution, rec.message))
    verdict, summary = _overall(spec, records)
    return ExperimentResult(spec, records, verdict, summary)


# -- report ------------------------------------------------------------------

TABLE_COLUMNS = (
    "C0",
    "outcome",
    "beta",
    "borderline",
    "verdict",
    "tau_fit",
    "distance_exponent",
    "d_total",
    "volume_total",
    "pohozaev_rhs",
    "pohozaev_margin",
    "grade",
)


def fmt(x):
    """17 significant digits for floats, '' for missing values."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def table_rows(result):
    for r in result.records:
        geo, poh = r.geometry, r.pohozaev
        yield [
            r.C0,
            r.outcome,
            r.beta,
            r.borderline if r.beta is not None else None,
            geo.verdict if geo else None,
            geo.tau_fit.slope if geo else None,
            geo.distance_exponent_fit.slope if geo else None,
            geo.d_total if geo else None,
            geo.volume_total if geo else None,
            poh.rhs if poh else None,
            poh.margin if poh else None,
            r.grade,
        ]


def render_table(result):
    """CSV text, one row per C0 (header only for an empty sweep)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE_COLUMNS)
    for row in table_rows(result):
        w.writerow([fmt(x) for x in row])
    return buf.getvalue()


def plot_solutions(labelled, out_dir, title=None):
    """u.svg, volume.svg and distance.svg for (label, solution) pairs; returns the paths."""
    out_dir = Path(out_dir)
    if not labelled:
        return []
    curves_u, curves_v, curves_d = [], [], []
    for label, sol in labelled:
        rr = sol.grid.nodes[1:]
        curves_u.append((rr, sol.u[1:], label))
        curves_v.append((rr, volume_curve(sol)[1:], label))
        curves_d.append((rr, geodesic_distance(sol, rr), label))
    return [
        line_panel(curves_u, out_dir / "u.svg", "r", "u(r)", title=title),
        line_panel(curves_v, out_dir / "volume.svg", "R", "V(R)", logy=True, title=title),
        line_panel(curves_d, out_dir / "distance.svg", "r", "d(r)", logy=True, title=title),
    ]


def render_plots(result, out_dir):
    """Plots of u, V(R) and d(r) for every solved record."""
    solved = [(f"C0={r.C0:.3g}", r.solution) for r in result.records if r.outcome == "Solved"]
    return plot_solutions(solved, out_dir, result.spec.family.label())


def volume_curve(sol):
    from .potential import sphere_volume

    return sphere_volume(sol.n - 1) * sol.grid.cumulative(np.exp(sol.n * sol.u))


def render_report(result, out_dir, plots=True):
    """Write records.csv (and SVG plots) into out_dir; returns the written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    table = out_dir / "records.csv"
    table.write_text(render_table(result))
    paths = [table]
    if plots:
        paths += render_plots(result, out_dir)
    return paths
