"""Command-line entry point.

    qcurvelab <command> --config run.json --out DIR [--plots] [--seed-grid M=4096,Rmax=1e8]

Exit codes: 0 success (theory-predicted solver failures included),
2 configuration error, 3 I/O error, 4 numerical error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .curvature import PrescribedCurvature
from .errors import ConfigError, NonIntegrableDensity, QCurveError
from .experiments import (
    EXPERIMENT_IDS,
    ExperimentSpec,
    fmt,
    plot_solutions,
    render_report,
    run_experiment,
    volume_curve,
)
from .geometry import completeness_verdict
from .grid import RadialGrid
from .pohozaev import check_inequality, sign_condition_check
from .potential import radial_prefactor
from .solver import SolverOptions, picard_solve, sweep_C0

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4
COMMANDS = ("solve", "diagnose", "pohozaev", "sweep", "experiment")
TOP_KEYS = {"command", "n", "family", "c0", "c0_grid", "grid", "solver", "out", "experiment"}
FAMILY_KEYS = {"tag", "c", "exponent", "bump"}
GRID_KEYS = {"M", "r_max"}
SOLVER_KEYS = {"damping", "tol", "max_iter", "beta_cap"}
SOLUTION_COLUMNS = ("r", "u", "f", "density", "cumulative_beta", "d", "V")


@dataclass(frozen=True)
class RunConfig:
    command: str
    n: int = 2
    family: PrescribedCurvature | None = None
    c0: float | None = None
    c0_grid: tuple | None = None
    M: int = 4096
    r_max: float = 1e8
    solver: SolverOptions = field(default_factory=SolverOptions)
    out: str | None = None
    experiment: str | None = None

    def grid(self):
        return RadialGrid.log_spaced(self.n, r_max=self.r_max, M=self.M)

    def echo(self):
        d = {
            "command": self.command,
            "n": self.n,
            "grid": {"M": self.M, "r_max": self.r_max},
            "solver": {
                "damping": self.solver.damping,
                "tol": self.solver.tol,
                "max_iter": self.solver.max_iter,
                "beta_cap": self.solver.beta_cap,
            },
        }
        if self.family is not None:
            d["family"] = self.family.describe()
        if self.c0 is not None:
            d["c0"] = self.c0
        if self.c0_grid is not None:
            d["c0_grid"] = list(self.c0_grid)
        if self.experiment is not None:
            d["experiment"] = self.experiment
        return d


# -- config parsing ----------------------------------------------------------


def _is_number(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _unknown(d, allowed, where, problems):
    for k in sorted(set(d) - allowed):
        problems.append(f"{where}: unknown key {k!r}")


def _section(raw, key, allowed, problems):
    sec = raw.get(key, {})
    if not isinstance(sec, dict):
        problems.append(f"{key}: must be an object")
        return {}
    _unknown(sec, allowed, key, problems)
    return sec


def parse_config(text, command=None):
    """Parse and validate a JSON run configuration.

    Raises ConfigError listing every problem found; JSON syntax errors carry
    the line and column.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    problems = []
    _unknown(raw, TOP_KEYS, "config", problems)

    cmd = raw.get("command", command)
    if command is not None and cmd != command:
        problems.append(f"command: config says {cmd!r} but {command!r} was requested")
    if cmd not in COMMANDS:
        problems.append(f"command: must be one of {', '.join(COMMANDS)}")

    n = raw.get("n", 2)
    if n not in (2, 4) or isinstance(n, bool):
        problems.append("n: dimension must be even, in {2,4}")
        n = 2

    family = None
    fam = _section(raw, "family", FAMILY_KEYS, problems)
    if "family" in raw and isinstance(raw["family"], dict):
        if "tag" not in fam:
            problems.append("family.tag: required")
        else:
            bad = [k for k in ("c", "exponent", "bump") if k in fam and not _is_number(fam[k])]
            for k in bad:
                problems.append(f"family.{k}: must be a number")
            if not bad:
                try:
                    family = PrescribedCurvature(
                        str(fam["tag"]),
                        float(fam.get("c", 1.0)),
                        float(fam.get("exponent", 0.0)),
                        float(fam.get("bump", 0.0)),
                    )
                except ValueError as exc:
                    problems.append(f"family: {exc}")
    elif cmd in COMMANDS and cmd != "experiment":
        problems.append("family: required")

    c0 = raw.get("c0")
    c0_grid = raw.get("c0_grid")
    if c0 is not None and not _is_number(c0):
        problems.append("c0: must be a finite number")
    if c0_grid is not None:
        if not isinstance(c0_grid, list) or not c0_grid or not all(_is_number(c) for c in c0_grid):
            problems.append("c0_grid: must be a nonempty list of finite numbers")
        else:
            c0_grid = tuple(float(c) for c in c0_grid)
    if c0 is not None and c0_grid is not None:
        problems.append("c0, c0_grid: give one or the other")
    if cmd in ("solve", "diagnose", "pohozaev") and c0 is None:
        problems.append(f"c0: required for {cmd}")
    if cmd == "sweep" and c0_grid is None:
        problems.append("c0_grid: required for sweep")

    grid = _section(raw, "grid", GRID_KEYS, problems)
    M = grid.get("M", 4096)
    r_max = grid.get("r_max", 1e8)
    if not isinstance(M, int) or isinstance(M, bool) or M < 16:
        problems.append("grid.M: must be an integer >= 16")
        M = 4096
    if not _is_number(r_max) or r_max <= 1.0:
        problems.append("grid.r_max: must be a number > 1")
        r_max = 1e8

    sv = _section(raw, "solver", SOLVER_KEYS, problems)
    opts = SolverOptions()
    try:
        for k in sv:
            if not _is_number(sv[k]):
                raise ValueError(f"{k} must be a number")
        if "max_iter" in sv and not isinstance(sv["max_iter"], int):
            raise ValueError("max_iter must be an integer")
        if "beta_cap" in sv and sv["beta_cap"] <= 0:
            raise ValueError("beta_cap must be positive")
        opts = SolverOptions(**{k: sv[k] for k in sv})
    except ValueError as exc:
        problems.append(f"solver: {exc}")

    out = raw.get("out")
    if out is not None and not isinstance(out, str):
        problems.append("out: must be a string")

    exp = raw.get("experiment")
    if cmd == "experiment":
        if exp not in EXPERIMENT_IDS:
            problems.append(f"experiment: must be one of {', '.join(EXPERIMENT_IDS)}")
    elif exp is not None:
        problems.append("experiment: only valid with the experiment command")

    if problems:
        raise ConfigError(problems)
    cfg = RunConfig(cmd, n, family, None if c0 is None else float(c0), c0_grid, M,
                    float(r_max), opts, out, exp)
    if cmd == "experiment":
        try:
            experiment_spec(cfg)
        except ValueError as exc:
            raise ConfigError(f"experiment: {exc}") from None
    return cfg


def experiment_spec(cfg):
    kw = {"n": cfg.n, "family": cfg.family, "grid_M": cfg.M, "r_max": cfg.r_max,
          "solver": cfg.solver}
    if cfg.c0_grid is not None:
        kw["c0_grid"] = cfg.c0_grid
    elif cfg.c0 is not None:
        kw["c0_grid"] = (cfg.c0,)
    return ExperimentSpec(cfg.experiment, **kw)


def parse_seed_grid(text):
    """'M=4096,Rmax=1e8' -> {'M': 4096, 'r_max': 1e8}."""
    out = {}
    for part in text.split(","):
        key, sep, val = part.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"--seed-grid: expected key=value, got {part!r}")
        try:
            if key == "M":
                out["M"] = int(val)
            elif key in ("Rmax", "r_max"):
                out["r_max"] = float(val)
            else:
                raise ConfigError(f"--seed-grid: unknown key {key!r}")
        except ValueError:
            raise ConfigError(f"--seed-grid: bad value for {key}") from None
    return out


# -- outputs -----------------------------------------------------------------


def _clean(x):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_clean(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    return x


def solution_table(sol):
    g = sol.grid
    r = g.nodes
    fvals = np.asarray(sol.curvature(r), dtype=float)
    dens = sol.density.values
    cols = [
        r,
        sol.u,
        fvals,
        dens,
        radial_prefactor(sol.n) * g.cumulative(dens),
        g.cumulative(np.exp(sol.u), m=0),
        volume_curve(sol),
    ]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SOLUTION_COLUMNS)
    for row in zip(*cols):
        w.writerow([fmt(float(x)) for x in row])
    return buf.getvalue()


def sweep_table(records):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("C0", "outcome", "beta", "tail_fraction"))
    for rec in records:
        frac = rec.solution.tail_fraction if rec.solution is not None else None
        w.writerow([fmt(rec.C0), rec.outcome, fmt(rec.beta), fmt(frac)])
    return buf.getvalue()


def sha256_file(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out_dir, body, files, wall_clock):
    """manifest.json with file digests; the wall clock is left out of 'digest'."""
    out_dir = Path(out_dir)
    body = dict(body)
    body["files"] = [
        {"name": Path(p).name, "sha256": sha256_file(p), "bytes": Path(p).stat().st_size}
        for p in sorted(files, key=lambda p: Path(p).name)
    ]
    body = _clean(body)
    canonical = json.dumps(body, sort_keys=True, separators=(",", ":"))
    body["digest"] = hashlib.sha256(canonical.encode()).hexdigest()
    body["wall_clock_seconds"] = round(wall_clock, 3)
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(body, sort_keys=True, indent=2) + "\n")
    return body


def obstruction_predicted(f, n):
    """Families for which no integrable normal solution exists (negative tails)."""
    if f.tag == "neg_powerlaw":
        return f.c > 0 and f.exponent <= n
    return f.tag == "neg_growth" and f.c > 0


def _solution_summary(sol):
    return {
        "C0": sol.C0,
        "beta": sol.beta,
        "residual": sol.residual,
        "iterations": sol.iterations,
        "tail_fraction": sol.tail_fraction,
        "borderline": sol.borderline,
    }


def execute(cfg, out_dir, plots=False):
    """Run ``cfg`` and write its outputs; returns (manifest dict, exit code)."""
    t0 = time.perf_counter()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    body = {"tool": "qcurvelab", "version": __version__, "command": cfg.command,
            "config": cfg.echo(), "status": "success"}
    files = []
    code = EXIT_OK

    if cfg.command == "experiment":
        spec = experiment_spec(cfg)
        result = run_experiment(spec)
        files += render_report(result, out_dir, plots=plots)
        body["results"] = {
            "verdict": result.verdict,
            "summary": result.summary,
            "provenance": result.provenance(),
            "records": [
                {
                    "C0": r.C0,
                    "outcome": r.outcome,
                    "beta": r.beta,
                    "grade": r.grade,
                    "geometry": r.geometry.as_dict() if r.geometry else None,
                    "pohozaev": r.pohozaev.as_dict() if r.pohozaev else None,
                    "message": r.message,
                }
                for r in result.records
            ],
        }
    elif cfg.command == "sweep":
        records = sweep_C0(cfg.family, cfg.c0_grid, cfg.grid(), cfg.solver)
        path = out_dir / "sweep.csv"
        path.write_text(sweep_table(records))
        files.append(path)
        body["results"] = {"records": [
            {"C0": r.C0, "outcome": r.outcome, "beta": r.beta, "message": r.message}
            for r in records
        ]}
        if plots:
            solved = [(f"C0={r.C0:.3g}", r.solution) for r in records if r.outcome == "Solved"]
            files += plot_solutions(solved, out_dir, cfg.family.label())
    else:
        try:
            sol = picard_solve(cfg.family, cfg.c0, cfg.grid(), cfg.solver)
        except QCurveError as exc:
            predicted = isinstance(exc, NonIntegrableDensity) and obstruction_predicted(cfg.family, cfg.n)
            body["status"] = "failed"
            body["error"] = {"type": type(exc).__name__, "message": str(exc),
                             "predicted": predicted}
            code = EXIT_OK if predicted else EXIT_NUMERIC
            sol = None
        if sol is not None:
            path = out_dir / "solution.csv"
            path.write_text(solution_table(sol))
            files.append(path)
            results = {"solution": _solution_summary(sol)}
            if cfg.command == "diagnose":
                results["geometry"] = completeness_verdict(sol).as_dict()
            elif cfg.command == "pohozaev":
                results["pohozaev"] = check_inequality(sol).as_dict()
                if cfg.family.sign_class == "positive":
                    sc = sign_condition_check(cfg.family, cfg.n)
                    results["sign_condition"] = {"passed": sc.passed, "inf": sc.inf_value,
                                                 "threshold": sc.threshold}
            body["results"] = results
            if plots:
                files += plot_solutions([(f"C0={sol.C0:.3g}", sol)], out_dir, cfg.family.label())

    manifest = write_manifest(out_dir, body, files, time.perf_counter() - t0)
    return manifest, code


# -- entry point ---------------------------------------------------------------


def _fail(kind, problems, code):
    print(json.dumps({"status": "error", "kind": kind, "problems": list(problems)}), file=sys.stderr)
    return code


def build_parser():
    p = argparse.ArgumentParser(prog="qcurvelab", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", help="output directory (overrides the config's 'out')")
    p.add_argument("--plots", action="store_true", help="also write SVG figures")
    p.add_argument("--seed-grid", help="grid override, e.g. M=4096,Rmax=1e8")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        return _fail("io", [f"cannot read config: {exc}"], EXIT_IO)
    try:
        cfg = parse_config(text, command=args.command)
        if args.seed_grid:
            over = parse_seed_grid(args.seed_grid)
            raw = json.loads(text)
            raw.setdefault("grid", {}).update(over)
            cfg = parse_config(json.dumps(raw), command=args.command)
    except ConfigError as exc:
        return _fail("config", exc.problems, EXIT_CONFIG)
    out = args.out or cfg.out
    if not out:
        return _fail("config", ["out: no output directory given"], EXIT_CONFIG)
    try:
        manifest, code = execute(cfg, out, plots=args.plots)
    except OSError as exc:
        return _fail("io", [str(exc)], EXIT_IO)
    except (QCurveError, FloatingPointError, ArithmeticError) as exc:
        return _fail("numerical", [f"{type(exc).__name__}: {exc}"], EXIT_NUMERIC)
    print(json.dumps({"status": manifest["status"], "out": str(out),
                      "digest": manifest["digest"]}))
    return code


if __name__ == "__main__":
    sys.exit(main())
