"""Command-line parameter sweeps with deterministic CSV output.

Either an INI config, command-line flags, or both (flags win)::

    nanojunction sweep.ini
    nanojunction --method rcme,arcme --regime 2 --sweep V --from 0 --to 2 \\
                 --points 21 --rc-levels 12 --out sweep.csv

The INI sections are ``[sweep]`` (method, regime, sweep, from, to, points,
log, out, workers), ``[rc]`` (levels, auto, start, step, tol, cap) and
``[model]`` (overrides for any model parameter field).

Every (method, grid point) pair becomes one CSV row; rows for points whose
solve fails keep their input columns, leave the outputs empty and are logged
to stderr without aborting the sweep.  A JSON manifest with the resolved
parameters, library versions and wall-clock timings is written next to the
CSV.  Exit status: 0 completed (even with some failed points), 1 nothing
succeeded or output could not be written, 2 bad usage or config.
"""
from __future__ import annotations

import argparse
import configparser
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np
import scipy

from . import __version__
from .model import ModelParams, regime_params
from .rc import converge_current
from .thermo import TransportReport, transport_report

COLUMNS = ("method", "regime", "lambda", "V", "beta_L", "beta_R", "beta_ph", "M",
           "c1", "c2", "upsilon", "P", "IE_L", "IE_R", "IE_ph", "Q_in", "eta",
           "eta_carnot", "converged", "residual")
METHODS = ("wcme", "rcme", "arcme")
SWEPT = ("lambda", "V", "beta_hot", "M")
MODEL_FIELDS = tuple(f.name for f in fields(ModelParams))


@dataclass
class RcSettings:
    """Fock-truncation policy for the reaction-coordinate methods."""

    levels: int = 10
    auto: bool = False
    start: int = 10
    step: int = 4
    tol: float = 1e-6
    cap: int = 60


@dataclass
class SweepSpec:
    """A fully resolved sweep: methods x grid in one swept variable."""

    methods: tuple
    regime: int
    swept: str
    start: float
    stop: float
    points: int
    log: bool = False
    out: str = "sweep.csv"
    workers: int = 1
    rc: RcSettings = field(default_factory=RcSettings)
    model: dict = field(default_factory=dict)

    def validate(self):
        if not self.methods:
            raise ValueError("no methods selected")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r} (choose from {METHODS})")
        if self.regime not in (1, 2):
            raise ValueError("regime must be 1 or 2")
        if self.swept not in SWEPT:
            raise ValueError(f"sweep variable must be one of {SWEPT}")
        if self.points < 1:
            raise ValueError("points must be at least 1")
        if self.log and (self.start <= 0 or self.stop <= 0):
            raise ValueError("log grids need positive endpoints")
        if self.swept == "M" and "wcme" in self.methods:
            raise ValueError("wcme has no Fock truncation to sweep")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        for k in self.model:
            if k not in MODEL_FIELDS:
                raise ValueError(f"unknown model parameter {k!r}")

    def grid(self) -> np.ndarray:
        if self.log:
            return np.logspace(np.log10(self.start), np.log10(self.stop), self.points)
        return np.linspace(self.start, self.stop, self.points)


def point_params(spec: SweepSpec, x: float) -> ModelParams:
    """Model parameters at one grid value of the swept variable."""
    base = regime_params(spec.regime, **spec.model)
    if spec.swept == "lambda":
        return replace(base, lam=x)
    if spec.swept == "V":
        return base.with_bias(x)
    if spec.swept == "beta_hot":
        return replace(base, beta_L=x) if spec.regime == 1 else replace(base, beta_ph=x)
    return base  # swept == "M": the truncation changes, not the parameters


def _fmt(x) -> str:
    return "" if x is None else format(float(x), ".17g")


def report_row(rep: TransportReport) -> list:
    p = rep.params
    return [rep.method, str(rep.regime), _fmt(p.lam), _fmt(p.V), _fmt(p.beta_L),
            _fmt(p.beta_R), _fmt(p.beta_ph),
            "" if rep.M is None else str(rep.M),
            _fmt(rep.c1), _fmt(rep.c2), _fmt(rep.upsilon), _fmt(rep.P),
            _fmt(rep.IE_L), _fmt(rep.IE_R), _fmt(rep.IE_ph), _fmt(rep.Q_in),
            _fmt(rep.eta), _fmt(rep.eta_carnot),
            "true" if rep.converged else "false", _fmt(rep.residual)]


def _failure_row(spec: SweepSpec, method: str, p, M) -> list:
    if p is None:      # the grid value itself was rejected
        inputs = [""] * 5
    else:
        inputs = [_fmt(p.lam), _fmt(p.V), _fmt(p.beta_L), _fmt(p.beta_R),
                  _fmt(p.beta_ph)]
    row = [method, str(spec.regime)] + inputs + ["" if M is None else str(M)]
    row += [""] * 10
    row += ["false", ""]
    return row


def _solve_point(task) -> tuple:
    """Worker for one (method, grid value) pair; never raises."""
    spec, method, x = task
    p = None
    M = None
    converged = True
    try:
        p = point_params(spec, x)
        if method != "wcme":
            if spec.swept == "M":
                M = int(round(x))
            elif spec.rc.auto:
                cert = converge_current(p, method=method, start=spec.rc.start,
                                        step=spec.rc.step, tol=spec.rc.tol,
                                        cap=spec.rc.cap)
                M, converged = cert.M, cert.converged
            else:
                M = spec.rc.levels
        rep = transport_report(p, method, spec.regime, M=M, converged=converged)
        return report_row(rep), None
    except Exception as exc:  # logged per point; the sweep must go on
        msg = f"{method} at {spec.swept}={x:.8g}: {type(exc).__name__}: {exc}"
        return _failure_row(spec, method, p, M), msg


def run_sweep(spec: SweepSpec):
    """All rows in deterministic order plus the per-point failure messages."""
    tasks = [(spec, method, float(x)) for method in spec.methods for x in spec.grid()]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(_solve_point, tasks))
    else:
        results = [_solve_point(t) for t in tasks]
    rows = [r for r, _ in results]
    failures = [m for _, m in results if m is not None]
    return rows, failures


def write_csv(path: str, rows) -> None:
    lines = [",".join(COLUMNS)]
    lines += [",".join(r) for r in rows]
    with open(path, "w", newline="") as f:
        f.write("\n".join(lines) + "\n")


def write_manifest(path: str, spec: SweepSpec, elapsed: float, failed: int) -> None:
    manifest = {
        "parameters": asdict(spec),
        "versions": {
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "nanojunction": __version__,
        },
        "timings": {
            "total_seconds": elapsed,
            "points": len(spec.methods) * spec.points,
            "failed_points": failed,
        },
    }
    with open(path, "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")


_REQUIRED = ("methods", "regime", "swept", "start", "stop", "points")


def _spec_from_sources(args) -> SweepSpec:
    """Merge INI config (if any) under the command-line flags."""
    values: dict = {}
    rc = RcSettings()
    model: dict = {}
    if args.config is not None:
        cfg = configparser.ConfigParser()
        cfg.optionxform = str      # model keys like beta_R are case-sensitive
        with open(args.config) as f:
            cfg.read_file(f)
        if cfg.has_section("sweep"):
            s = cfg["sweep"]
            if "method" in s:
                values["methods"] = tuple(m.strip() for m in s["method"].split(",") if m.strip())
            for key, conv in (("regime", s.getint), ("points", s.getint),
                              ("workers", s.getint)):
                if key in s:
                    values[key] = conv(key)
            for key, dest in (("sweep", "swept"), ("out", "out")):
                if key in s:
                    values[dest] = s[key]
            for key, dest in (("from", "start"), ("to", "stop")):
                if key in s:
                    values[dest] = s.getfloat(key)
            if "log" in s:
                values["log"] = s.getboolean("log")
        if cfg.has_section("rc"):
            r = cfg["rc"]
            rc = RcSettings(levels=r.getint("levels", rc.levels),
                            auto=r.getboolean("auto", rc.auto),
                            start=r.getint("start", rc.start),
                            step=r.getint("step", rc.step),
                            tol=r.getfloat("tol", rc.tol),
                            cap=r.getint("cap", rc.cap))
        if cfg.has_section("model"):
            model = {k: cfg["model"].getfloat(k) for k in cfg["model"]}
    if args.method is not None:
        values["methods"] = tuple(m.strip() for m in args.method.split(",") if m.strip())
    for attr, dest in (("regime", "regime"), ("swept", "swept"), ("from_", "start"),
                       ("to", "stop"), ("points", "points"), ("out", "out"),
                       ("workers", "workers")):
        v = getattr(args, attr)
        if v is not None:
            values[dest] = v
    if args.log:
        values["log"] = True
    if args.rc_levels is not None:
        rc = replace(rc, levels=args.rc_levels)
    if args.rc_auto:
        rc = replace(rc, auto=True)
    missing = [k for k in _REQUIRED if k not in values]
    if missing:
        raise ValueError(f"missing required settings: {', '.join(missing)}")
    spec = SweepSpec(rc=rc, model=model, **values)
    spec.validate()
    return spec


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="nanojunction",
        description="Steady-state transport sweeps for the two-site junction.")
    ap.add_argument("config", nargs="?", default=None,
                    help="INI file with [sweep], [rc], [model] sections")
    ap.add_argument("--method", help="comma-separated subset of wcme,rcme,arcme")
    ap.add_argument("--regime", type=int, help="1 (hot left lead) or 2 (hot phonons)")
    ap.add_argument("--sweep", dest="swept", choices=SWEPT, help="swept variable")
    ap.add_argument("--from", dest="from_", type=float, help="first grid value")
    ap.add_argument("--to", type=float, help="last grid value (inclusive)")
    ap.add_argument("--points", type=int, help="number of grid points")
    ap.add_argument("--log", action="store_true", default=None,
                    help="logarithmic grid instead of linear")
    ap.add_argument("--rc-levels", type=int, help="fixed Fock truncation M")
    ap.add_argument("--rc-auto", action="store_true", default=None,
                    help="choose M per point by the convergence ladder")
    ap.add_argument("--out", help="CSV output path (default sweep.csv)")
    ap.add_argument("--workers", type=int, help="parallel worker processes")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = _spec_from_sources(args)
    except (ValueError, KeyError, OSError, configparser.Error) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    t0 = time.perf_counter()
    rows, failures = run_sweep(spec)
    elapsed = time.perf_counter() - t0
    for msg in failures:
        print(f"point failed: {msg}", file=sys.stderr)
    try:
        write_csv(spec.out, rows)
        write_manifest(spec.out + ".manifest.json", spec, elapsed, len(failures))
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return 1
    if len(failures) == len(rows):
        print("error: every point failed", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
