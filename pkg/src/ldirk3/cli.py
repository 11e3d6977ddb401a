"""Command-line front end: ``ldirk3 {run,convergence,sweep,bench,cases}``."""
from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

import numpy as np

from .harness import (INTEGRATOR_CHOICES, LIMITER_CHOICES, builtin_cases, convergence_table,
                      diagonal_slice, error_norms, exact_solution, get_case, overshoot_metric, run)
from .limiter import ReferenceVariable
from .nlsolve import SolveSettings, SolverError

log = logging.getLogger("ldirk3")

OUTPUT_ENV = "LDIRK3_OUTPUT_DIR"
EXIT_OK, EXIT_USAGE, EXIT_NONCONVERGED = 0, 1, 2


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    case: str
    integrator: str = "ldirk3"
    limiter: str = "new"
    ref: Optional[str] = None
    n: Optional[int] = None
    cfl: Optional[float] = None
    t_final: Optional[float] = None
    out: Optional[str] = None
    format: str = "csv"
    verbose: int = 0
    rtol: float = 1e-4

    def validate(self):
        names = [c.name for c in builtin_cases()]
        if self.case not in names:
            raise UsageError(f"unknown case {self.case!r}; choose from {', '.join(names)}")
        if self.integrator not in INTEGRATOR_CHOICES:
            raise UsageError(f"unknown integrator {self.integrator!r}")
        if self.limiter not in LIMITER_CHOICES:
            raise UsageError(f"unknown limiter {self.limiter!r}")
        if self.limiter == "legacy" and self.integrator != "ldirk3":
            raise UsageError("the legacy limiter applies to the ldirk3 integrator only")
        if self.format not in ("csv", "field-dump"):
            raise UsageError(f"unknown format {self.format!r}")
        case = get_case(self.case)
        if self.ref is not None:
            try:
                ref = ReferenceVariable.parse(self.ref)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
            system = getattr(case.model, "is_system", False)
            if ref.kind in ("density", "pressure", "velocity") and not system:
                raise UsageError(f"{ref.kind} reference needs an Euler case")
            if ref.kind == "conservative" and ref.index >= case.model.m:
                raise UsageError(f"component {ref.index} out of range")
        for name in ("n", "cfl", "t_final"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise UsageError(f"--{name.replace('_', '-')} must be positive")
        return self

    @property
    def output_dir(self) -> Path:
        return Path(self.out or os.environ.get(OUTPUT_ENV, "ldirk3-out"))


_CONVERT = {"n": int, "cfl": float, "t_final": float, "verbose": int, "rtol": float}


def read_config_file(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment; dashes in keys map to underscores."""
    known = {f.name for f in fields(RunConfig)}
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key = key.strip().replace("-", "_")
            if key not in known:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            value = value.strip()
            try:
                out[key] = _CONVERT.get(key, str)(value)
            except ValueError:
                raise UsageError(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
    return out


def parse_config(args: argparse.Namespace) -> RunConfig:
    """Merge a config file (if any) with flags; flags win."""
    values = read_config_file(args.config) if getattr(args, "config", None) else {}
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    if "case" not in values:
        raise UsageError("a case name is required (--case or 'case' in the config file)")
    return RunConfig(**values).validate()


# ---------------------------------------------------------------------------
# output


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def write_csv(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def _component_names(case):
    m = case.model.m
    if m == 1:
        return ["u"]
    if m == 3:
        return ["rho", "rho_u", "e"]
    return ["rho", "rho_u", "rho_v", "e"]


def _bounds(case, cfg, res):
    """Reference range for the overshoot metric: initial data for linear
    advection, else the initial range of the reference component."""
    comp = case.ref.extract(case.model, case.initial_field(cfg.n))
    return float(comp.min()), float(comp.max())


def emit_results(res, cfg: RunConfig) -> dict:
    """Write the solution file(s) and ``report.csv``; return the report row."""
    case = res.case
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    names = _component_names(case)
    stem = f"{case.name}_{res.integrator}"
    ex = None
    if case.exact is not None:
        ex = exact_solution(case, res.t, cfg.n)
    if cfg.format == "field-dump":
        payload = {"u": res.u, "t": res.t}
        if case.dimension == 1:
            payload["x"] = res.grid.x
        else:
            payload["x"], payload["y"] = res.grid.xaxis.x, res.grid.yaxis.x
        if ex is not None:
            payload["exact"] = ex
        np.savez(out / f"{stem}.npz", **payload)
    elif case.dimension == 1:
        header = ["x"] + names + (["exact", "error"] if ex is not None else [])
        rows = []
        for j, x in enumerate(res.grid.x):
            row = [x] + [res.u[k, j] for k in range(res.u.shape[0])]
            if ex is not None:
                row += [ex[0, j], res.u[0, j] - ex[0, j]]
            rows.append(row)
        write_csv(out / f"{stem}.csv", header, rows)
    else:
        X, Y = res.grid.mesh()
        rows = [[X.flat[i], Y.flat[i]] + [res.u[k].flat[i] for k in range(res.u.shape[0])]
                for i in range(X.size)]
        write_csv(out / f"{stem}.csv", ["x", "y"] + names, rows)
        s, vals = diagonal_slice(res.u[0], res.grid)
        write_csv(out / f"{stem}_diagonal.csv", ["s", "value"], zip(s, vals))

    lo, hi = _bounds(case, cfg, res)
    ref_field = case.ref.extract(case.model, res.u)
    report = {
        "case": case.name, "integrator": res.integrator, "limiter": res.limiter,
        "n": res.grid.n if case.dimension == 1 else res.grid.shape[0],
        "t": res.t, "steps": res.steps, "wall_time": res.elapsed,
        "tv_initial": res.tv_history[0], "tv_final": res.tv_history[-1],
        "overshoot": overshoot_metric(ref_field, lo, hi),
        "stages": res.stages, "newton_iterations": res.newton_iterations,
        "max_newton_iterations": res.max_newton_iterations,
        "nonconverged_stages": res.nonconverged, "fallback_steps": res.fallbacks,
        "linf": "", "l1": "", "l2": "",
        "warning": res.message or ("nonconverged stages" if res.nonconverged else ""),
    }
    if ex is not None:
        norms = error_norms(res.u[0], ex[0])
        report.update(norms.as_dict())
    write_csv(out / "report.csv", list(report), [list(report.values())])
    return report


# ---------------------------------------------------------------------------
# commands


def _settings(cfg):
    return SolveSettings(rtol=cfg.rtol, verbose=cfg.verbose > 1)


def _run_one(cfg: RunConfig):
    case = get_case(cfg.case)
    ref = ReferenceVariable.parse(cfg.ref) if cfg.ref else None
    res = run(case, n=cfg.n, integrator=cfg.integrator, limiter=cfg.limiter, ref=ref,
              cfl=cfg.cfl, t_final=cfg.t_final, settings=_settings(cfg))
    report = emit_results(res, cfg)
    return res, report


def cmd_run(args) -> int:
    cfg = parse_config(args)
    res, report = _run_one(cfg)
    print(f"{cfg.case} {res.integrator}: t={res.t:.6g} steps={res.steps} "
          f"wall={res.elapsed:.2f}s tv={report['tv_final']:.6g} "
          f"overshoot={report['overshoot']:.3e} -> {cfg.output_dir}")
    if res.failed:
        print(f"warning: {res.message}", file=sys.stderr)
        return EXIT_NONCONVERGED
    if res.nonconverged:
        print(f"warning: {res.nonconverged} of {res.stages} stage solves did not converge",
              file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def cmd_convergence(args) -> int:
    cfg = parse_config(args)
    case = get_case(cfg.case)
    ref = ReferenceVariable.parse(cfg.ref) if cfg.ref else None
    ns = [int(v) for v in args.ns.split(",")]
    try:
        table = convergence_table(case, ns, integrator=cfg.integrator, limiter=cfg.limiter,
                                  ref=ref, cfl=cfg.cfl, t_final=cfg.t_final,
                                  settings=_settings(cfg))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(table.format())
    rows = []
    for r in table.rows:
        o = r.orders or {}
        rows.append([r.n, r.linf, r.l1, r.l2] + [o.get(k, math.nan) for k in ("linf", "l1", "l2")])
    write_csv(cfg.output_dir / f"convergence_{case.name}_{cfg.integrator}.csv",
              ["n", "linf", "l1", "l2", "rate_linf", "rate_l1", "rate_l2"], rows)
    return EXIT_OK


def _sweep_job(cfg):
    res, report = _run_one(cfg)
    return report, bool(res.failed or res.nonconverged)


def cmd_sweep(args) -> int:
    base = parse_config(args)
    cfgs = []
    for integ in args.integrators.split(","):
        for lim in args.limiters.split(","):
            if lim == "legacy" and integ != "ldirk3":
                continue
            sub = Path(base.output_dir) / f"{integ}-{lim}"
            cfgs.append(RunConfig(**{**base.__dict__, "integrator": integ, "limiter": lim,
                                     "out": str(sub)}).validate())
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_sweep_job, cfgs))
    else:
        results = [_sweep_job(c) for c in cfgs]
    reports = [r for r, _ in results]
    write_csv(base.output_dir / "sweep.csv", list(reports[0]), [list(r.values()) for r in reports])
    for r in reports:
        print(f"{r['integrator']:>13} {r['limiter']:>6} tv={r['tv_final']:.6g} "
              f"overshoot={r['overshoot']:.3e} wall={r['wall_time']:.2f}s")
    return EXIT_NONCONVERGED if any(bad for _, bad in results) else EXIT_OK


def cmd_bench(args) -> int:
    from . import bench
    for line in bench.run_benchmark(n=args.n, repeat=args.repeat):
        print(line)
    return EXIT_OK


def cmd_cases(args) -> int:
    for c in builtin_cases():
        print(f"{c.name:16s} {c.dimension}D N={c.n:<4d} CFL={c.cfl:<5g} t={c.t_final:<8.4g} "
              f"{c.description}")
    return EXIT_OK


def _add_run_flags(p):
    p.add_argument("--case")
    p.add_argument("--integrator", choices=INTEGRATOR_CHOICES)
    p.add_argument("--limiter", choices=LIMITER_CHOICES)
    p.add_argument("--ref", help="density, pressure or conservative:k")
    p.add_argument("--n", type=int)
    p.add_argument("--cfl", type=float)
    p.add_argument("--t-final", dest="t_final", type=float)
    p.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV} or ./ldirk3-out)")
    p.add_argument("--format", choices=("csv", "field-dump"))
    p.add_argument("--rtol", type=float, help="stage solver residual reduction target")
    p.add_argument("--config", help="flat key = value file; flags override it")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ldirk3", description="Limited DIRK3 solvers for conservation laws")
    p.add_argument("-v", "--verbose", action="count", default=None)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="run one case and write CSV output")
    _add_run_flags(r)
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("convergence", help="refinement study against the exact solution")
    _add_run_flags(c)
    c.add_argument("--ns", default="100,200,400,800", help="comma-separated resolutions")
    c.set_defaults(func=cmd_convergence)

    s = sub.add_parser("sweep", help="run one case over several integrators and limiters")
    _add_run_flags(s)
    s.add_argument("--integrators", default="dirk3,ldirk3")
    s.add_argument("--limiters", default="new")
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_sweep)

    b = sub.add_parser("bench", help="time compiled and pure-Python kernels")
    b.add_argument("--n", type=int, default=400)
    b.add_argument("--repeat", type=int, default=20)
    b.set_defaults(func=cmd_bench)

    k = sub.add_parser("cases", help="list builtin cases")
    k.set_defaults(func=cmd_cases)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"ldirk3: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    level = logging.WARNING
    if args.verbose:
        level = logging.INFO if args.verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"ldirk3: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as exc:
        print(f"ldirk3: solver failure: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except OSError as exc:
        print(f"ldirk3: cannot write output: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
