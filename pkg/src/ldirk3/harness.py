"""Benchmark cases, time loop, error norms, convergence tables and diagnostics."""
from __future__ import annotations

import dataclasses
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .integrate import TimeStepper, op_cfl_dt
from .limiter import DENSITY, ReferenceVariable, total_variation
from .mesh import Extrapolate, Grid2D, Periodic, build_grid_1d, build_grid_2d, is_periodic
from .nlsolve import SolveSettings, SolverError
from .physics import (BUCKLEY_LEVERETT, BUCKLEY_LEVERETT_2D, BURGERS, LINEAR_ADVECTION,
                      DiffusionSpec, Euler1D, Euler2D, InvalidStateError)
from .spatial import Semidiscrete

log = logging.getLogger(__name__)

INTEGRATOR_CHOICES = ("ssprk3", "ie", "dirk3", "ldirk3", "bdf2", "global-tvd", "muscl-ssprk3")
LIMITER_CHOICES = ("new", "legacy", "off")


@dataclass(frozen=True)
class CaseSpec:
    """A fully specified experiment.

    ``initial(grid)`` returns the interior field ``(m, n)`` or ``(m, nx, ny)``;
    ``exact(grid, t)``, when present, the closed-form solution.
    """

    name: str
    dimension: int
    model: object
    initial: Callable
    domain: tuple
    bc: object
    n: int
    cfl: float
    t_final: float
    integrator: str = "ldirk3"
    limiter: str = "new"
    ref: ReferenceVariable = ReferenceVariable()
    periodic: bool = False
    diffusion: Optional[DiffusionSpec] = None
    exact: Optional[Callable] = None
    reference_cfl: float = 0.6
    description: str = ""

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ValueError("dimension must be 1 or 2")
        if self.cfl <= 0 or self.t_final <= 0:
            raise ValueError("cfl and t_final must be positive")
        if self.integrator not in INTEGRATOR_CHOICES:
            raise ValueError(f"unknown integrator {self.integrator!r}")
        if self.limiter not in LIMITER_CHOICES:
            raise ValueError(f"unknown limiter {self.limiter!r}")

    def replace(self, **changes) -> "CaseSpec":
        return dataclasses.replace(self, **changes)

    def grid(self, n: Optional[int] = None):
        n = self.n if n is None else n
        if self.dimension == 1:
            return build_grid_1d(*self.domain, n, self.periodic)
        return build_grid_2d(self.domain[0], self.domain[1], n, self.periodic)

    def operator(self, n: Optional[int] = None, recon: str = "weno5") -> Semidiscrete:
        return Semidiscrete(self.model, self.grid(n), self.bc, recon, self.diffusion)

    def initial_field(self, n: Optional[int] = None) -> np.ndarray:
        return np.asarray(self.initial(self.grid(n)), dtype=float)


# ---------------------------------------------------------------------------
# initial data


def _sin4(grid):
    return (np.sin(grid.x / 2.0) ** 4)[None]


def _sin4_exact(grid, t):
    return (np.sin((grid.x - t) / 2.0) ** 4)[None]


def _multiwave_profile(x):
    x = np.mod(x, 2.0 * np.pi)
    u = np.zeros_like(x)
    hump = x <= np.pi / 2.0
    u[hump] = np.sin(2.0 * x[hump]) ** 4
    u[(x >= 2.5) & (x <= 3.5)] = 1.0
    hat = (x >= 4.5) & (x <= 5.5)
    u[hat] = 1.0 - 2.0 * np.abs(x[hat] - 5.0)
    return u


def _multiwave(grid):
    return _multiwave_profile(grid.x)[None]


def _multiwave_exact(grid, t):
    return _multiwave_profile(grid.x - t)[None]


def _burgers_ic(grid):
    x = grid.x
    return np.where((x >= np.pi / 2.0) & (x <= np.pi), 2.0, 0.0)[None]


def _riemann(model, left, right, x0):
    def ic(grid):
        x = grid.x
        prim = []
        for a, b in zip(left, right):
            bv = b(x) if callable(b) else b * np.ones_like(x)
            prim.append(np.where(x < x0, a, bv))
        return model.to_conservative(*prim)
    return ic


def _viscous_burgers_ic(grid):
    x = grid.x
    u = np.zeros_like(x)
    u[(x >= -0.9) & (x <= -0.1)] = 2.0
    u[(x >= 0.1) & (x <= 0.9)] = -2.0
    return u[None]


def _viscous_bl_ic(grid):
    x = grid.x
    s = 1.0 / np.sqrt(2.0)
    u = np.zeros_like(x)
    u[np.abs(x + s) < 0.4] = 0.9
    u[np.abs(x - s) < 0.4] = -0.9
    return u[None]


def _bl2d_ic(grid):
    X, Y = grid.mesh()
    return np.where(X ** 2 + Y ** 2 < 0.5, 0.9, 0.0)[None]


VORTEX_STRENGTH = 5.0


def vortex_state(X, Y, gamma=1.4, strength=VORTEX_STRENGTH, center=(5.0, 5.0)):
    """Isentropic vortex on the mean flow rho = p = u = v = 1 (conservative variables)."""
    xb = X - center[0]
    yb = Y - center[1]
    r2 = xb ** 2 + yb ** 2
    du = strength / (2.0 * np.pi) * np.exp(0.5 * (1.0 - r2))
    T = 1.0 - (gamma - 1.0) * strength ** 2 / (8.0 * gamma * np.pi ** 2) * np.exp(1.0 - r2)
    rho = T ** (1.0 / (gamma - 1.0))
    p = rho * T
    return Euler2D(gamma).to_conservative(rho, 1.0 - du * yb, 1.0 + du * xb, p)


def _vortex_exact(grid, t):
    X, Y = grid.mesh()
    # translate by (t, t) and wrap into the periodic box
    return vortex_state(np.mod(X - t, 10.0), np.mod(Y - t, 10.0))


def _vortex_ic(grid):
    return _vortex_exact(grid, 0.0)


# ---------------------------------------------------------------------------
# registry


def builtin_cases() -> list[CaseSpec]:
    e1 = Euler1D()
    two_pi = (0.0, 2.0 * np.pi)
    return [
        CaseSpec("sin4", 1, LINEAR_ADVECTION, _sin4, two_pi, Periodic(), 100, 0.5, 2.0 * np.pi,
                 periodic=True, exact=_sin4_exact,
                 description="smooth advection of sin^4(x/2), one period"),
        CaseSpec("multiwave", 1, LINEAR_ADVECTION, _multiwave, two_pi, Periodic(), 400, 2.0,
                 2.0 * np.pi, periodic=True, exact=_multiwave_exact,
                 description="sine hump, square pulse and hat advected one period"),
        CaseSpec("burgers", 1, BURGERS, _burgers_ic, two_pi, Periodic(), 100, 3.0, 2.0,
                 periodic=True, description="expansion and compression wave"),
        CaseSpec("sod", 1, e1, _riemann(e1, (1.0, 0.0, 1.0), (0.125, 0.0, 0.1), 0.5), (0.0, 1.0),
                 Extrapolate(), 400, 4.0, 0.2, ref=DENSITY, description="Sod shock tube"),
        CaseSpec("lax", 1, e1, _riemann(e1, (0.445, 0.698, 3.528), (0.5, 0.0, 0.571), 0.5),
                 (0.0, 1.0), Extrapolate(), 300, 3.5, 0.14, ref=DENSITY,
                 description="Lax shock tube"),
        CaseSpec("osher-shu", 1, e1,
                 _riemann(e1, (3.857143, 2.6293690, 10.33333),
                          (lambda x: 1.0 + 0.2 * np.sin(5.0 * x), 0.0, 1.0), -4.0),
                 (-5.0, 5.0), Extrapolate(), 400, 2.0, 1.8, ref=DENSITY,
                 description="shock interacting with a density wave"),
        CaseSpec("viscous-burgers", 1, BURGERS, _viscous_burgers_ic, (-1.5, 1.5), Extrapolate(),
                 400, 10.0, 0.5, diffusion=DiffusionSpec(0.1, 0.5, 0.05),
                 description="Burgers with switched degenerate diffusion"),
        CaseSpec("viscous-bl", 1, BUCKLEY_LEVERETT, _viscous_bl_ic, (-1.5, 1.5), Extrapolate(),
                 500, 10.0, 0.5, diffusion=DiffusionSpec(0.1, 0.2, 0.03),
                 description="Buckley-Leverett with switched degenerate diffusion"),
        CaseSpec("bl2d", 2, BUCKLEY_LEVERETT_2D, _bl2d_ic, ((-1.5, 1.5), (-1.5, 1.5)),
                 Extrapolate(), 100, 3.0, 0.4, reference_cfl=0.9,
                 description="2D Buckley-Leverett with gravity"),
        CaseSpec("vortex", 2, Euler2D(), _vortex_ic, ((0.0, 10.0), (0.0, 10.0)), Periodic(), 150,
                 4.0, 10.0, ref=DENSITY, periodic=True, exact=_vortex_exact, reference_cfl=0.9,
                 description="isentropic vortex advected one diagonal period"),
    ]


def get_case(name: str) -> CaseSpec:
    for case in builtin_cases():
        if case.name == name:
            return case
    names = ", ".join(c.name for c in builtin_cases())
    raise KeyError(f"unknown case {name!r}; available: {names}")


def exact_solution(case: CaseSpec, t: Optional[float] = None, n: Optional[int] = None):
    if case.exact is None:
        raise ValueError(f"case {case.name!r} has no closed-form solution; use reference_solution")
    t = case.t_final if t is None else t
    return np.asarray(case.exact(case.grid(n), t), dtype=float)


# ---------------------------------------------------------------------------
# time loop


@dataclass
class RunResult:
    case: CaseSpec
    integrator: str
    limiter: str
    grid: object
    u: np.ndarray
    t: float
    steps: int
    elapsed: float
    reports: list = field(default_factory=list)
    tv_history: list = field(default_factory=list)
    fallbacks: int = 0
    failed: bool = False
    message: str = ""

    @property
    def stages(self) -> int:
        return len(self.reports)

    @property
    def nonconverged(self) -> int:
        return sum(not r.converged for r in self.reports)

    @property
    def nonconverged_fraction(self) -> float:
        return self.nonconverged / self.stages if self.reports else 0.0

    @property
    def newton_iterations(self) -> int:
        return sum(r.iterations for r in self.reports)

    @property
    def max_newton_iterations(self) -> int:
        return max((r.iterations for r in self.reports), default=0)


def run(case: CaseSpec, *, n: Optional[int] = None, integrator: Optional[str] = None,
        limiter: Optional[str] = None, ref: Optional[ReferenceVariable] = None,
        cfl: Optional[float] = None, t_final: Optional[float] = None,
        settings: Optional[SolveSettings] = None, theta_override=None,
        max_steps: Optional[int] = None, u0: Optional[np.ndarray] = None) -> RunResult:
    """March ``case`` to ``t_final`` (or ``max_steps`` steps) with a CFL-based step.

    The step is recomputed from the current field and the last step is
    clipped to land on ``t_final``.  A stage solver failure stops the run
    and returns the last good field with ``failed=True``.
    """
    integrator = integrator or case.integrator
    limiter = limiter or case.limiter
    ref = ref or case.ref
    cfl = case.cfl if cfl is None else cfl
    t_end = case.t_final if t_final is None else t_final
    if integrator not in INTEGRATOR_CHOICES:
        raise ValueError(f"unknown integrator {integrator!r}")
    recon = "muscl" if integrator == "muscl-ssprk3" else "weno5"
    kind = "ssprk3" if integrator == "muscl-ssprk3" else integrator
    op = case.operator(n, recon)
    stepper = TimeStepper(op, kind, limiter, ref, settings, theta_override)
    u = case.initial_field(n) if u0 is None else np.array(u0, dtype=float)
    if getattr(op.model, "is_system", False):
        op.model.check(u)
    periodic = is_periodic(op.bc)
    tv = [total_variation(ref.extract(op.model, u), periodic)]
    t, steps, failed, message = 0.0, 0, False, ""
    start = time.perf_counter()
    while t < t_end * (1.0 - 1e-14):
        if max_steps is not None and steps >= max_steps:
            break
        dt = min(op_cfl_dt(op, u, cfl), t_end - t)
        try:
            new = stepper.step(u, dt)
        except (SolverError, InvalidStateError) as exc:
            failed, message = True, f"step {steps + 1} at t={t:.6g}: {exc}"
            log.warning("run %s/%s stopped: %s", case.name, integrator, message)
            break
        if not np.all(np.isfinite(new)):
            failed, message = True, f"non-finite field after step {steps + 1}"
            break
        u = new
        t += dt
        steps += 1
        tv.append(total_variation(ref.extract(op.model, u), periodic))
    elapsed = time.perf_counter() - start
    return RunResult(case, integrator, limiter, op.grid, u, t, steps, elapsed, stepper.reports,
                     tv, stepper.fallbacks, failed, message)


def reference_solution(case: CaseSpec, n: Optional[int] = None, refine: int = 1,
                       cfl: Optional[float] = None, recon: str = "weno5") -> np.ndarray:
    """Explicit SSPRK3 solution at a small CFL, sampled on the case mesh.

    ``refine > 1`` computes on a mesh ``refine`` times finer and injects
    the coincident nodes.
    """
    if refine < 1 or int(refine) != refine:
        raise ValueError("refine must be a positive integer")
    n = case.n if n is None else n
    periodic = case.periodic
    n_fine = n * refine if periodic else (n - 1) * refine + 1
    res = run(case, n=n_fine, integrator="muscl-ssprk3" if recon == "muscl" else "ssprk3",
              cfl=case.reference_cfl if cfl is None else cfl)
    if res.failed:
        raise SolverError(f"reference run failed: {res.message}")
    idx = (slice(None),) + (slice(None, None, refine),) * case.dimension
    return res.u[idx]


# ---------------------------------------------------------------------------
# diagnostics


@dataclass
class NormReport:
    """Error norms; ``orders`` holds observed rates against the previous resolution."""

    linf: float
    l1: float
    l2: float
    n: Optional[int] = None
    orders: Optional[dict] = None

    def as_dict(self):
        return {"linf": self.linf, "l1": self.l1, "l2": self.l2}


def error_norms(numeric, exact, grid=None, weighting: str = "mean") -> NormReport:
    """L-infinity, L1 and L2 norms of ``numeric - exact``.

    ``weighting="mean"`` normalizes by the domain measure
    (``L1 = sum|e| dx / |Omega|``); ``weighting="measure"`` uses the plain
    quadrature ``L1 = sum|e| dx`` (``dx dy`` in 2D) and needs ``grid``.
    """
    a = np.asarray(numeric, dtype=float)
    b = np.asarray(exact, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    e = np.abs(a - b)
    if e.size == 0:
        raise ValueError("empty fields")
    if weighting == "mean":
        w = 1.0 / e.size
    elif weighting == "measure":
        if grid is None:
            raise ValueError("measure weighting needs the grid")
        w = grid.dx * grid.dy if isinstance(grid, Grid2D) else grid.dx
    else:
        raise ValueError(f"unknown weighting {weighting!r}")
    return NormReport(float(e.max()), float(w * e.sum()), float(math.sqrt(w * np.sum(e * e))))


def observed_order(e_coarse: float, e_fine: float, ratio: float = 2.0) -> float:
    """``log(e_coarse/e_fine)/log(ratio)``; NaN when either error is zero."""
    if e_coarse <= 0.0 or e_fine <= 0.0:
        return float("nan")
    return math.log(e_coarse / e_fine) / math.log(ratio)


@dataclass
class ConvergenceTable:
    rows: list

    def orders(self, norm: str) -> list:
        return [r.orders[norm] for r in self.rows[1:]]

    def format(self) -> str:
        lines = [f"{'N':>6} {'Linf':>11} {'rate':>6} {'L1':>11} {'rate':>6} {'L2':>11} {'rate':>6}"]
        for r in self.rows:
            cells = [f"{r.n:>6d}"]
            for k in ("linf", "l1", "l2"):
                o = r.orders.get(k) if r.orders else None
                rate = "n/a" if o is None or not math.isfinite(o) else f"{o:.2f}"
                cells.append(f"{getattr(r, k):11.3e} {rate:>6}")
            lines.append(" ".join(cells))
        return "\n".join(lines)


def convergence_table(case: CaseSpec, ns, component: int = 0, weighting: str = "mean",
                      **run_kwargs) -> ConvergenceTable:
    """Errors against the exact solution for each ``N`` and pairwise observed orders."""
    ns = list(ns)
    if len(ns) < 2:
        raise ValueError("need at least two resolutions")
    rows, prev = [], None
    for n in ns:
        res = run(case, n=n, **run_kwargs)
        if res.failed:
            raise SolverError(f"N={n}: {res.message}")
        ex = exact_solution(case, res.t, n)
        rep = error_norms(res.u[component], ex[component], res.grid, weighting)
        rep.n = n
        rep.orders = {}
        if prev is not None:
            ratio = n / prev.n
            for k in ("linf", "l1", "l2"):
                rep.orders[k] = observed_order(getattr(prev, k), getattr(rep, k), ratio)
        rows.append(rep)
        prev = rep
    return ConvergenceTable(rows)


def overshoot_metric(u, lo: float, hi: float) -> float:
    """``max(0, max(u) - hi) + max(0, lo - min(u))``."""
    if lo > hi:
        raise ValueError("need lo <= hi")
    u = np.asarray(u, dtype=float)
    return max(0.0, float(u.max()) - hi) + max(0.0, lo - float(u.min()))


def diagonal_slice(u2d, grid: Grid2D):
    """Values along ``x = y`` with the arc length ``s`` from the lower-left corner."""
    nx, ny = grid.shape
    k = min(nx, ny)
    i = np.arange(k)
    s = np.hypot(grid.xaxis.x[:k] - grid.xaxis.x_min, grid.yaxis.x[:k] - grid.yaxis.x_min)
    return s, np.asarray(u2d)[i, i]
