"""Newton-type solver for implicit stage equations ``R(v) = 0``."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .physics import InvalidStateError

log = logging.getLogger(__name__)

SQRT_EPS = math.sqrt(np.finfo(float).eps)


class SolverError(RuntimeError):
    """Non-finite residual or no admissible iterate: the stage cannot continue."""


@dataclass
class SolveSettings:
    """Stopping rule and linearization choices for :func:`solve_stage`.

    ``jacobian`` is ``"banded"`` (colored finite-difference Jacobian, sparse
    direct solve), ``"krylov"`` (matrix-free restarted GMRES) or ``"auto"``
    (banded in 1D, Krylov in 2D).  ``initial_guess`` is read by the integrators:
    ``"predictor"`` also tries an explicit Euler step from the previous stage
    value and starts from whichever has the smaller residual; ``"previous"``
    uses that value only.  ``theta_coupling="monotone"`` lets the limiter
    values only decrease over the iterations of one stage solve;
    ``theta_freeze_after=k`` stops updating them after ``k`` refreshes so the
    remaining iterations solve a fixed-coefficient system.
    """

    rtol: float = 1e-4
    max_iter: int = 30
    jacobian: str = "auto"
    krylov_rtol: float = 1e-3
    krylov_restart: int = 30
    krylov_maxiter: int = 200
    max_halvings: int = 5
    initial_guess: str = "predictor"
    theta_coupling: str = "monotone"
    theta_freeze_after: Optional[int] = 10
    verbose: bool = False

    def __post_init__(self):
        if self.rtol <= 0 or self.krylov_rtol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.initial_guess not in ("previous", "predictor"):
            raise ValueError(f"unknown initial_guess {self.initial_guess!r}")
        if self.theta_coupling not in ("refresh", "monotone"):
            raise ValueError(f"unknown theta_coupling {self.theta_coupling!r}")
        if self.theta_freeze_after is not None and self.theta_freeze_after < 1:
            raise ValueError("theta_freeze_after must be at least 1")


@dataclass
class StageSolveReport:
    iterations: int = 0
    initial_residual: float = 0.0
    final_residual: float = 0.0
    converged: bool = False
    limiter_refreshes: int = 0
    linear_iterations: int = 0
    history: list = field(default_factory=list)

    @property
    def reduction(self) -> float:
        if self.initial_residual == 0.0:
            return 0.0
        return self.final_residual / self.initial_residual


@dataclass(frozen=True)
class Sparsity:
    """Dependency pattern of a residual on a ``(m, n)`` field.

    Row ``(a, i)`` depends only on nodes within ``halfwidth`` of ``i``
    (cyclically when ``periodic``) and on any component.
    """

    m: int
    n: int
    halfwidth: int = 3
    periodic: bool = False


def node_colors(n: int, halfwidth: int, periodic: bool) -> np.ndarray:
    """Colors such that same-colored nodes never share a residual row."""
    span = 2 * halfwidth
    if not periodic or n % (span + 1) == 0:
        return np.arange(n) % (span + 1)
    colors = np.full(n, -1)
    for j in range(n):
        used = set()
        for d in range(1, span + 1):
            for k in ((j - d) % n, (j + d) % n):
                if colors[k] >= 0:
                    used.add(colors[k])
        c = 0
        while c in used:
            c += 1
        colors[j] = c
    return colors


def fd_jacobian(residual: Callable, v: np.ndarray, r0: np.ndarray, sparsity: Sparsity):
    """Finite-difference Jacobian assembled by column coloring (CSC matrix).

    Unknowns are flattened component-major, matching ``v.reshape(-1)``.
    """
    m, n, hw = sparsity.m, sparsity.n, sparsity.halfwidth
    v = v.reshape(m, n)
    r0 = r0.reshape(m, n)
    colors = node_colors(n, hw, sparsity.periodic)
    offsets = np.arange(-hw, hw + 1)
    rows, cols, vals = [], [], []
    for c in range(colors.max() + 1):
        nodes = np.flatnonzero(colors == c)
        rnodes = nodes[:, None] + offsets[None, :]
        if sparsity.periodic:
            rnodes %= n
            keep = np.ones_like(rnodes, dtype=bool)
        else:
            keep = (rnodes >= 0) & (rnodes < n)
            rnodes = np.clip(rnodes, 0, n - 1)
        owner = np.broadcast_to(nodes[:, None], rnodes.shape)
        rn, on = rnodes[keep], owner[keep]
        for k in range(m):
            h = SQRT_EPS * np.maximum(1.0, np.abs(v[k, nodes]))
            vp = v.copy()
            vp[k, nodes] += h
            dr = residual(vp).reshape(m, n) - r0
            hcol = np.zeros(n)
            hcol[nodes] = h
            for a in range(m):
                rows.append(a * n + rn)
                cols.append(k * n + on)
                vals.append(dr[a, rn] / hcol[on])
    J = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(m * n, m * n)
    )
    return J.tocsc()


def _as_operator(op, size):
    if isinstance(op, np.ndarray) and op.ndim == 2:
        return op
    if sp.issparse(op) or isinstance(op, spla.LinearOperator):
        return op
    if callable(op):
        return spla.LinearOperator((size, size), matvec=op, dtype=float)
    raise TypeError(f"unsupported operator {type(op)!r}")


def _linear_solve(op, rhs, tol=1e-10, restart=30, maxiter=200, M=None):
    """Return ``(x, info, iterations)``; ``info != 0`` flags Krylov breakdown/stall."""
    b = np.asarray(rhs, dtype=float).reshape(-1)
    A = _as_operator(op, b.size)
    if isinstance(A, np.ndarray):
        return np.linalg.solve(A, b), 0, 0
    if sp.issparse(A):
        return spla.splu(sp.csc_matrix(A)).solve(b), 0, 0
    count = [0]

    def cb(_):
        count[0] += 1

    cycles = max(1, math.ceil(maxiter / restart))
    x, info = spla.gmres(A, b, rtol=tol, atol=0.0, restart=restart, maxiter=cycles, M=M,
                         callback=cb, callback_type="pr_norm")
    return x, info, count[0]


def linear_solve(op, rhs, tol: float = 1e-10, restart: int = 30, maxiter: int = 200):
    """Solve ``op @ x = rhs``.

    Dense and sparse matrices are factorized directly; callables and
    ``LinearOperator`` objects go through restarted GMRES to relative
    residual ``tol``.  A Krylov stall is logged and the best iterate returned.
    """
    x, info, _ = _linear_solve(op, rhs, tol, restart, maxiter)
    if info != 0:
        log.warning("linear solve did not reach tol=%g (info=%d)", tol, info)
    return x.reshape(np.shape(rhs))


def _norm(r):
    return float(np.linalg.norm(r.reshape(-1)))


def _checked(residual, v):
    r = residual(v)
    if not np.all(np.isfinite(r)):
        raise SolverError("non-finite residual")
    return r


def solve_stage(residual: Callable, guess, settings: Optional[SolveSettings] = None,
                theta_refresh: Optional[Callable] = None, sparsity: Optional[Sparsity] = None):
    """Solve ``residual(v) = 0`` by damped Newton iterations.

    Stops once ``||R||_2 <= rtol * ||R_0||_2`` or after ``max_iter``
    updates (then the best iterate is returned with ``converged=False``).
    ``theta_refresh(v)``, when given, is called with the current iterate at
    the start of every iteration, before the residual and Jacobian are
    formed; state it sets stays frozen during the linear solve.
    """
    settings = settings or SolveSettings()
    v = np.array(guess, dtype=float, copy=True)
    if not np.all(np.isfinite(v)):
        raise SolverError("non-finite initial guess")
    mode = settings.jacobian
    if mode == "auto":
        mode = "banded" if sparsity is not None else "krylov"
    if mode == "banded" and sparsity is None:
        raise ValueError("banded Jacobian needs a Sparsity pattern")

    report = StageSolveReport()

    def refresh(x):
        if theta_refresh is not None:
            theta_refresh(x)
            report.limiter_refreshes += 1

    refresh(v)
    r = _checked(residual, v)
    r0 = _norm(r)
    report.initial_residual = report.final_residual = r0
    report.history.append(r0)
    best_v, best_norm = v, r0
    if r0 == 0.0:
        report.converged = True
        return v, report
    target = settings.rtol * r0
    rnorm = r0

    for it in range(1, settings.max_iter + 1):
        if mode == "banded":
            J = fd_jacobian(residual, v, r, sparsity)
            dv, info, nlin = _linear_solve(J, -r)
        else:
            scale = max(1.0, float(np.sqrt(np.mean(v * v))))

            def jv(w, v=v, r=r):
                w = w.reshape(v.shape)
                wn = float(np.sqrt(np.mean(w * w)))
                if wn == 0.0:
                    return np.zeros(w.size)
                h = SQRT_EPS * scale / wn
                return ((residual(v + h * w) - r) / h).reshape(-1)

            dv, info, nlin = _linear_solve(jv, -r.reshape(-1), settings.krylov_rtol,
                                           settings.krylov_restart, settings.krylov_maxiter)
            if info != 0:
                log.debug("Krylov solve stalled (info=%d)", info)
        report.linear_iterations += nlin
        dv = dv.reshape(v.shape)

        step = 1.0
        trial = None
        for _ in range(settings.max_halvings + 1):
            cand = v + step * dv
            try:
                tn = _norm(_checked(residual, cand))
            except InvalidStateError:
                tn = math.inf
            if tn < rnorm:
                trial = cand
                break
            if math.isfinite(tn):
                trial = cand
            step *= 0.5
        if trial is None:
            raise SolverError("no admissible iterate along the Newton direction")
        v = trial
        report.iterations = it

        refresh(v)
        try:
            r = _checked(residual, v)
        except InvalidStateError as exc:
            raise SolverError(str(exc)) from exc
        rnorm = _norm(r)
        report.history.append(rnorm)
        if rnorm < best_norm:
            best_v, best_norm = v, rnorm
        if settings.verbose:
            log.info("newton it=%d |R|=%.3e (|R0|=%.3e)", it, rnorm, r0)
        if rnorm <= target:
            report.converged = True
            report.final_residual = rnorm
            return v, report

    report.final_residual = best_norm
    log.warning("stage solve hit %d iterations: |R|/|R0| = %.2e", settings.max_iter, best_norm / r0)
    return best_v, report
