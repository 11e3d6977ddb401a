"""Time integrators for the semidiscrete system ``du/dt = L(u)``.

Implicit stages are solved with :func:`ldirk3.nlsolve.solve_stage`.  The
global Lax-Friedrichs speeds and the limiter values are refreshed from the
current iterate at the start of every Newton iteration and held fixed while
the Jacobian is formed.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .limiter import (ReferenceVariable, global_sensor, legacy_theta, stage_ratio_theta,
                      stage_ratio_theta_2d, theta_interface, theta_interface_2d,
                      total_variation)
from .mesh import Grid2D, is_periodic
from .nlsolve import SolveSettings, Sparsity, StageSolveReport, solve_stage

log = logging.getLogger(__name__)


def _alpha_root() -> float:
    p = lambda x: x ** 3 - 3.0 * x ** 2 + 1.5 * x - 1.0 / 6.0  # noqa: E731
    x = brentq(p, 1.0 / 6.0, 0.5, xtol=1e-16, rtol=4 * np.finfo(float).eps)
    for _ in range(2):
        x -= p(x) / (3.0 * x ** 2 - 6.0 * x + 1.5)
    return x


ALPHA = _alpha_root()
TAU2 = (1.0 + ALPHA) / 2.0
B1 = -(6.0 * ALPHA ** 2 - 16.0 * ALPHA + 1.0) / 4.0
B2 = (6.0 * ALPHA ** 2 - 20.0 * ALPHA + 5.0) / 4.0


@dataclass(frozen=True)
class Dirk3Constants:
    alpha: float = ALPHA
    tau2: float = TAU2
    b1: float = B1
    b2: float = B2


def dirk3_tableau():
    """Butcher array ``(A, b, c)`` of the three-stage, third-order DIRK scheme."""
    A = np.array([
        [ALPHA, 0.0, 0.0],
        [TAU2 - ALPHA, ALPHA, 0.0],
        [B1, B2, ALPHA],
    ])
    b = A[2].copy()
    c = np.array([ALPHA, TAU2, 1.0])
    return A, b, c


def ie_chain_tableau():
    """The theta = 0 limit: three chained implicit Euler steps."""
    h = (1.0 - ALPHA) / 2.0
    A = np.array([[ALPHA, 0.0, 0.0], [ALPHA, h, 0.0], [ALPHA, h, h]])
    return A, A[2].copy(), np.array([ALPHA, TAU2, 1.0])


@dataclass
class LimitedCoeffs:
    a21: np.ndarray
    a22: np.ndarray
    a31: np.ndarray
    a32: np.ndarray
    a33: np.ndarray


def limited_coeffs(theta1, theta2) -> LimitedCoeffs:
    """Face coefficients blending the IE chain (theta=0) and DIRK3 (theta=1)."""
    t1 = np.asarray(theta1, dtype=float)
    t2 = np.asarray(theta2, dtype=float)
    if np.any((t1 < 0) | (t1 > 1)) or np.any((t2 < 0) | (t2 > 1)):
        raise ValueError("theta values must lie in [0, 1]")
    A, _, _ = dirk3_tableau()
    Z, _, _ = ie_chain_tableau()

    def blend(t, i, j):
        # convex form keeps both endpoint tableaux bit-exact
        return (1.0 - t) * Z[i, j] + t * A[i, j]

    return LimitedCoeffs(
        a21=blend(t1, 1, 0),
        a22=blend(t1, 1, 1),
        a31=blend(t2, 2, 0),
        a32=blend(t2, 2, 1),
        a33=blend(t2, 2, 2),
    )


def stability_function(z, A=None, b=None):
    """``R(z) = 1 + z b^T (I - z A)^{-1} 1`` for a Runge-Kutta tableau (default DIRK3)."""
    if A is None:
        A, b, _ = dirk3_tableau()
    s = len(b)
    z = complex(z)
    return complex(1.0 + z * (b @ np.linalg.solve(np.eye(s) - z * A, np.ones(s))))


# ---------------------------------------------------------------------------
# step-size selection


def cfl_dt(grid, u, model, cfl: float, diffusion=None) -> float:
    """Time step from ``dt * (sum_k a_k/dx_k + max(eps*nu)/dx^2) = CFL``."""
    if cfl <= 0:
        raise ValueError("CFL number must be positive")
    u = np.asarray(u, dtype=float)
    field = u if getattr(model, "is_system", False) or u.ndim == 1 else u[0]
    if isinstance(grid, Grid2D):
        denom = model.wave_speed(field, 0) / grid.dx + model.wave_speed(field, 1) / grid.dy
        dx = min(grid.dx, grid.dy)
    else:
        denom = model.wave_speed(field, 0) / grid.dx
        dx = grid.dx
    if diffusion is not None:
        denom += diffusion.eps * float(np.max(diffusion.nu(field))) / dx ** 2
    if not denom > 0:
        raise ValueError("zero wave speed and diffusivity: CFL step undefined")
    return cfl / denom


def op_cfl_dt(op, u, cfl: float) -> float:
    return cfl_dt(op.grid, u, op.model, cfl, op.diffusion)


# ---------------------------------------------------------------------------
# stage machinery


def _sparsity(op) -> Optional[Sparsity]:
    if op.ndim != 1:
        return None
    return Sparsity(op.m, op.grid.n, 3, is_periodic(op.bc))


def _record(reports, rep):
    if reports is not None:
        reports.append(rep)


def _pick_start(residual, guess, refresh):
    """The starting field with the smallest residual."""
    start, alternatives = guess
    if not alternatives:
        return start
    best, best_norm = start, None
    for cand in (start,) + tuple(alternatives):
        try:
            if refresh is not None:
                refresh(cand)
            r = residual(cand)
        except ValueError:
            continue
        norm = float(np.linalg.norm(r))
        if np.isfinite(norm) and (best_norm is None or norm < best_norm):
            best, best_norm = cand, norm
    return best


def _solve(op, residual, guess, settings, refresh, reports, limiter=None):
    start = _pick_start(residual, guess, refresh)
    if limiter is not None:
        limiter.reset()
    v, rep = solve_stage(residual, start, settings, refresh, _sparsity(op))
    _record(reports, rep)
    return v


def _guess(op, v, h, settings, L=None):
    """Starting fields for a stage that begins at ``v`` and advances by ``h``:
    ``v`` itself and, unless disabled, an explicit Euler predictor."""
    if settings is not None and settings.initial_guess == "previous":
        return v, ()
    pred = v + h * (op.rhs(v) if L is None else L)
    check = getattr(op.model, "check", None)
    if not np.all(np.isfinite(pred)):
        return v, ()
    if check is not None:
        try:
            check(pred)
        except ValueError:
            return v, ()
    return v, (pred,)


def _implicit_rhs_stage(op, base, coef, guess, settings, reports):
    """Solve ``v = base + coef * L(v)``."""
    frozen = {}

    def refresh(v):
        frozen["lam"] = op.speeds(v)

    def residual(v):
        return v - base - coef * op.rhs(v, frozen["lam"])

    return _solve(op, residual, guess, settings, refresh, reports)


def step_ie(u, op, dt, settings: Optional[SolveSettings] = None, reports=None):
    """One implicit Euler step ``u_next = u + dt L(u_next)``."""
    u = np.asarray(u, dtype=float)
    return _implicit_rhs_stage(op, u, dt, _guess(op, u, dt, settings), settings, reports)


def step_ie_chain(u, op, dt, settings=None, reports=None):
    """Three implicit Euler substeps of sizes (alpha, tau2-alpha, 1-tau2) * dt."""
    v = np.asarray(u, dtype=float)
    for h in (ALPHA, TAU2 - ALPHA, 1.0 - TAU2):
        v = step_ie(v, op, h * dt, settings, reports)
    return v


def step_dirk(u, op, dt, A, settings=None, reports=None):
    """Stiffly accurate DIRK step in stage-value form."""
    u = np.asarray(u, dtype=float)
    s = A.shape[0]
    c = A.sum(axis=1)
    Ls = []
    v = u
    for i in range(s):
        base = u.copy()
        for k in range(i):
            base = base + dt * A[i, k] * Ls[k]
        h = (c[i] - (c[i - 1] if i else 0.0)) * dt
        guess = _guess(op, v, h, settings, Ls[-1] if Ls else None)
        v = _implicit_rhs_stage(op, base, dt * A[i, i], guess, settings, reports)
        Ls.append(op.rhs(v))
    return v


def step_dirk3(u, op, dt, settings=None, reports=None):
    A, _, _ = dirk3_tableau()
    return step_dirk(u, op, dt, A, settings, reports)


def step_ssprk3(u, op, dt):
    u = np.asarray(u, dtype=float)
    u1 = u + dt * op.rhs(u)
    u2 = 0.75 * u + 0.25 * (u1 + dt * op.rhs(u1))
    return u / 3.0 + 2.0 / 3.0 * (u2 + dt * op.rhs(u2))


def step_bdf2(u_prev, u, op, dt, settings=None, reports=None, dt_prev=None):
    """Variable-step BDF2; with ``dt_prev == dt`` this is
    ``(3 u_next - 4 u + u_prev) / (2 dt) = L(u_next)``.  ``u_prev=None`` starts
    with one implicit Euler step."""
    u = np.asarray(u, dtype=float)
    if u_prev is None:
        return step_ie(u, op, dt, settings, reports)
    w = 1.0 if dt_prev is None else dt / dt_prev
    c0 = (1.0 + 2.0 * w) / (1.0 + w)
    base = ((1.0 + w) * u - w * w / (1.0 + w) * np.asarray(u_prev, dtype=float)) / c0
    return _implicit_rhs_stage(op, base, dt / c0, _guess(op, u, dt, settings), settings, reports)


# ---------------------------------------------------------------------------
# limited DIRK3


class _StageLimiter:
    """Computes nodal theta between a fixed stage field and the current iterate."""

    def __init__(self, op, mode, ref, u_k, h, override, coupling="refresh", freeze_after=None):
        if coupling not in ("refresh", "monotone"):
            raise ValueError(f"unknown theta coupling {coupling!r}")
        self.coupling = coupling
        self.freeze_after = freeze_after
        self.prev = None
        self.calls = 0
        self.op = op
        self.mode = mode
        self.ref = ref
        self.u_k = u_k
        self.h = h
        self.override = override
        self.periodic = is_periodic(op.bc)
        self.w_k = ref.extract(op.model, u_k)
        if mode == "legacy":
            if ref.kind != "conservative" and not (ref.kind == "density" and op.model.is_system):
                raise ValueError("legacy limiter needs a conservative reference variable")
            idx = 0 if ref.kind == "density" else ref.index
            self.idx = idx
            self.L_k = op.rhs(u_k)[idx]

    def nodal(self, v):
        shape = self.w_k.shape
        if self.override is not None:
            return np.full(shape, float(self.override))
        if self.mode == "off":
            return np.ones(shape)
        if self.mode == "legacy":
            L_v = self.op.rhs(v)[self.idx]
            return legacy_theta(self.u_k[self.idx], v[self.idx], self.L_k, L_v, self.h)
        w = self.ref.extract(self.op.model, v)
        if self.op.ndim == 1:
            return stage_ratio_theta(self.w_k, w, self.op.bc)
        return stage_ratio_theta_2d(self.w_k, w, self.op.bc)

    def reset(self):
        self.prev = None
        self.calls = 0

    def faces(self, v):
        self.calls += 1
        if self.freeze_after is not None and self.calls > self.freeze_after:
            theta = self.prev
        else:
            theta = self.nodal(v)
            if self.coupling == "monotone" and self.prev is not None:
                # within one stage solve theta may only decrease
                theta = np.minimum(theta, self.prev)
            self.prev = theta
        if self.op.ndim == 1:
            return [theta_interface(theta, self.op.bc)], theta
        return list(theta_interface_2d(theta, self.op.bc)), theta


def _flux_form_residual(op, u, dt, fixed, frozen, coef_names):
    """``v - u + dt * D(sum_k a_k F_k + a_last F(v))`` with per-face coefficients."""

    def residual(v):
        Fv = op.interface_fluxes(v, frozen["lam"])
        total = []
        for axis in range(op.ndim):
            acc = frozen[coef_names[-1]][axis] * Fv[axis]
            for name, F in zip(coef_names[:-1], fixed):
                acc = acc + frozen[name][axis] * F[axis]
            total.append(acc)
        return v - u - dt * op.divergence(total)

    return residual


def step_ldirk3(u, op, dt, limiter: str = "new", ref: Optional[ReferenceVariable] = None,
                settings=None, reports=None, theta_override=None, thetas=None,
                coupling: Optional[str] = None):
    """One L-DIRK3 step in flux form (1D or 2D, dimension by dimension).

    ``limiter`` is ``"new"`` (stage-ratio), ``"legacy"`` (time-derivative
    ratios) or ``"off"`` (theta = 1, i.e. DIRK3).  ``theta_override`` pins
    theta to a constant.  If ``thetas`` is a list, the final nodal theta of
    stages 2 and 3 are appended to it.
    """
    if limiter not in ("new", "legacy", "off"):
        raise ValueError(f"unknown limiter mode {limiter!r}")
    ref = ref or ReferenceVariable()
    cfg = settings or SolveSettings()
    if coupling is None:
        coupling = cfg.theta_coupling
    freeze = cfg.theta_freeze_after
    u = np.asarray(u, dtype=float)

    u1 = _implicit_rhs_stage(op, u, ALPHA * dt, _guess(op, u, ALPHA * dt, settings), settings,
                             reports)
    F1 = op.interface_fluxes(u1)

    # stage 2
    lim1 = _StageLimiter(op, limiter, ref, u1, (TAU2 - ALPHA) * dt, theta_override, coupling,
                         freeze)
    frozen = {}

    def refresh2(v):
        frozen["lam"] = op.speeds(v)
        faces, frozen["theta"] = lim1.faces(v)
        c = [limited_coeffs(t, t) for t in faces]
        frozen["a21"] = [ci.a21 for ci in c]
        frozen["a22"] = [ci.a22 for ci in c]

    res2 = _flux_form_residual(op, u, dt, [F1], frozen, ["a21", "a22"])
    u2 = _solve(op, res2, _guess(op, u1, (TAU2 - ALPHA) * dt, settings), settings, refresh2,
                reports, lim1)
    if thetas is not None:
        thetas.append(frozen["theta"])
    F2 = op.interface_fluxes(u2)

    # stage 3
    lim2 = _StageLimiter(op, limiter, ref, u2, (1.0 - TAU2) * dt, theta_override, coupling,
                         freeze)
    frozen3 = {}

    def refresh3(v):
        frozen3["lam"] = op.speeds(v)
        faces, frozen3["theta"] = lim2.faces(v)
        c = [limited_coeffs(t, t) for t in faces]
        frozen3["a31"] = [ci.a31 for ci in c]
        frozen3["a32"] = [ci.a32 for ci in c]
        frozen3["a33"] = [ci.a33 for ci in c]

    res3 = _flux_form_residual(op, u, dt, [F1, F2], frozen3, ["a31", "a32", "a33"])
    u3 = _solve(op, res3, _guess(op, u2, (1.0 - TAU2) * dt, settings), settings, refresh3,
                reports, lim2)
    if thetas is not None:
        thetas.append(frozen3["theta"])
    return u3


def step_ldirk3_1d(u, op, dt, limiter="new", ref=None, settings=None, reports=None,
                   theta_override=None):
    if op.ndim != 1:
        raise ValueError("step_ldirk3_1d needs a 1D operator")
    return step_ldirk3(u, op, dt, limiter, ref, settings, reports, theta_override)


def step_ldirk3_2d(u, op, dt, limiter="new", ref=None, settings=None, reports=None,
                   theta_override=None):
    if op.ndim != 2:
        raise ValueError("step_ldirk3_2d needs a 2D operator")
    return step_ldirk3(u, op, dt, limiter, ref, settings, reports, theta_override)


def step_global_tvd(u, op, dt, ref: Optional[ReferenceVariable] = None, settings=None,
                    reports=None, info=None):
    """Unlimited DIRK3 step, replaced by the IE chain when the TV of the
    reference variable does not decrease.  ``info["fallback"]`` records the choice."""
    ref = ref or ReferenceVariable()
    u = np.asarray(u, dtype=float)
    trial = step_dirk3(u, op, dt, settings, reports)
    periodic = is_periodic(op.bc)
    sigma = global_sensor(ref.extract(op.model, u), ref.extract(op.model, trial), periodic)
    if info is not None:
        info["fallback"] = bool(sigma)
    if sigma == 0:
        return trial
    return step_ie_chain(u, op, dt, settings, reports)


# ---------------------------------------------------------------------------
# stateful driver


INTEGRATORS = ("ssprk3", "ie", "dirk3", "ldirk3", "bdf2", "global-tvd")


class TimeStepper:
    """Applies one integrator repeatedly, keeping BDF2 history and solver reports."""

    def __init__(self, op, kind: str = "ldirk3", limiter: str = "new",
                 ref: Optional[ReferenceVariable] = None,
                 settings: Optional[SolveSettings] = None, theta_override=None):
        if kind not in INTEGRATORS:
            raise ValueError(f"unknown integrator {kind!r}; choose from {INTEGRATORS}")
        self.op = op
        self.kind = kind
        self.limiter = limiter
        self.ref = ref or ReferenceVariable()
        self.settings = settings or SolveSettings()
        self.theta_override = theta_override
        self.reports: list[StageSolveReport] = []
        self.fallbacks = 0
        self._prev = None
        self._dt_prev = None

    def step(self, u, dt):
        op, s, rep = self.op, self.settings, self.reports
        if self.kind == "ssprk3":
            return step_ssprk3(u, op, dt)
        if self.kind == "ie":
            return step_ie(u, op, dt, s, rep)
        if self.kind == "dirk3":
            return step_dirk3(u, op, dt, s, rep)
        if self.kind == "ldirk3":
            return step_ldirk3(u, op, dt, self.limiter, self.ref, s, rep, self.theta_override)
        if self.kind == "bdf2":
            new = step_bdf2(self._prev, u, op, dt, s, rep, self._dt_prev)
            self._prev, self._dt_prev = np.array(u, copy=True), dt
            return new
        info = {}
        new = step_global_tvd(u, op, dt, self.ref, s, rep, info)
        self.fallbacks += info["fallback"]
        return new
