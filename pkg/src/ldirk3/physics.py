"""Equation models: scalar laws, 1D/2D Euler gas dynamics, diffusion coefficients."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


class InvalidStateError(ValueError):
    """Raised for nonpositive density or pressure."""


# ---------------------------------------------------------------------------
# scalar conservation laws


@dataclass(frozen=True)
class ScalarLaw:
    """Scalar flux ``f`` with derivative ``df``; ``g``/``dg`` give the y-flux in 2D."""

    name: str
    f: Callable[[np.ndarray], np.ndarray]
    df: Callable[[np.ndarray], np.ndarray]
    g: Optional[Callable[[np.ndarray], np.ndarray]] = None
    dg: Optional[Callable[[np.ndarray], np.ndarray]] = None

    m = 1
    is_system = False

    def flux(self, u, axis: int = 0):
        if axis == 0:
            return self.f(u)
        if self.g is None:
            raise ValueError(f"{self.name} has no y-flux")
        return self.g(u)

    def dflux(self, u, axis: int = 0):
        return self.df(u) if axis == 0 else self.dg(u)

    def wave_speed(self, u, axis: int = 0) -> float:
        """Largest |f'(u)| over the given array (any shape)."""
        return float(np.max(np.abs(self.dflux(np.asarray(u), axis))))


def flux_eval(law: ScalarLaw, u, axis: int = 0):
    return law.flux(np.asarray(u, dtype=float), axis)


def _bl_f(u):
    return u * u / (u * u + (1.0 - u) ** 2)


def _bl_df(u):
    # denominator u^2 + (1-u)^2 >= 1/2, no guard needed
    d = u * u + (1.0 - u) ** 2
    return 2.0 * u * (1.0 - u) / (d * d)


def _bl_g(u):
    return _bl_f(u) * (1.0 - 5.0 * (1.0 - u) ** 2)


def _bl_dg(u):
    return _bl_df(u) * (1.0 - 5.0 * (1.0 - u) ** 2) + _bl_f(u) * 10.0 * (1.0 - u)


LINEAR_ADVECTION = ScalarLaw(
    "advection", lambda u: 1.0 * u, lambda u: np.ones_like(u),
    lambda u: 1.0 * u, lambda u: np.ones_like(u))
BURGERS = ScalarLaw("burgers", lambda u: 0.5 * u * u, lambda u: 1.0 * u)
BUCKLEY_LEVERETT = ScalarLaw("buckley-leverett", _bl_f, _bl_df)
BUCKLEY_LEVERETT_2D = ScalarLaw("buckley-leverett-2d", _bl_f, _bl_df, _bl_g, _bl_dg)


@dataclass(frozen=True)
class DiffusionSpec:
    """Diffusion term ``eps * d/dx(nu(u) du/dx)`` with a tanh-smoothed switch."""

    eps: float
    u_c: float
    eps1: float

    def nu(self, u):
        return 0.5 * (1.0 + np.tanh((np.abs(u) - self.u_c) / self.eps1))


def nu_smoothed(spec: DiffusionSpec, u):
    return spec.nu(np.asarray(u, dtype=float))


# ---------------------------------------------------------------------------
# Euler equations


@dataclass(frozen=True)
class Euler1D:
    """Ideal-gas Euler equations with conserved variables (rho, rho*u, e)."""

    gamma: float = 1.4
    name = "euler1d"
    m = 3
    dim = 1
    is_system = True

    def pressure(self, U):
        rho, mom, e = U[0], U[1], U[2]
        return (self.gamma - 1.0) * (e - 0.5 * mom * mom / rho)

    def check(self, U):
        U = np.asarray(U, dtype=float)
        p = self.pressure(U)
        if not (np.all(U[0] > 0) and np.all(p > 0)):
            raise InvalidStateError("nonpositive density or pressure")
        return U

    def to_conservative(self, rho, u, p):
        rho, u, p = (np.asarray(v, dtype=float) for v in (rho, u, p))
        if np.any(rho <= 0) or np.any(p <= 0):
            raise InvalidStateError("nonpositive density or pressure")
        e = p / (self.gamma - 1.0) + 0.5 * rho * u * u
        return np.array([rho, rho * u, e])

    def to_primitive(self, U):
        U = self.check(U)
        return U[0], U[1] / U[0], self.pressure(U)

    def flux(self, U, axis: int = 0):
        U = np.asarray(U, dtype=float)
        rho, mom, e = U[0], U[1], U[2]
        u = mom / rho
        p = self.pressure(U)
        return np.array([mom, mom * u + p, (e + p) * u])

    def sound_speed(self, U):
        return np.sqrt(self.gamma * self.pressure(U) / U[0])

    def eigenvalues(self, U, axis: int = 0):
        U = np.asarray(U, dtype=float)
        u = U[1] / U[0]
        c = self.sound_speed(U)
        return np.array([u - c, u, u + c])

    def family_speeds(self, U, axis: int = 0) -> np.ndarray:
        """Per-family global maxima of |lambda_i| over all nodes."""
        lam = np.abs(self.eigenvalues(U, axis))
        return lam.reshape(lam.shape[0], -1).max(axis=1)

    def wave_speed(self, U, axis: int = 0) -> float:
        U = np.asarray(U, dtype=float)
        return float(np.max(np.abs(U[1] / U[0]) + self.sound_speed(U)))

    def jacobian(self, U, axis: int = 0):
        """Analytic flux Jacobian dF/dU at a single state."""
        g = self.gamma
        rho, mom, e = (float(v) for v in U)
        u = mom / rho
        H = (e + self.pressure(np.array([rho, mom, e]))) / rho
        return np.array([
            [0.0, 1.0, 0.0],
            [0.5 * (g - 3.0) * u * u, (3.0 - g) * u, g - 1.0],
            [u * (0.5 * (g - 1.0) * u * u - H), H - (g - 1.0) * u * u, g * u],
        ])


@dataclass(frozen=True)
class Euler2D:
    """2D ideal-gas Euler equations with conserved variables (rho, rho*u, rho*v, e)."""

    gamma: float = 1.4
    name = "euler2d"
    m = 4
    dim = 2
    is_system = True

    def pressure(self, U):
        rho, mu, mv, e = U[0], U[1], U[2], U[3]
        return (self.gamma - 1.0) * (e - 0.5 * (mu * mu + mv * mv) / rho)

    def check(self, U):
        U = np.asarray(U, dtype=float)
        if not (np.all(U[0] > 0) and np.all(self.pressure(U) > 0)):
            raise InvalidStateError("nonpositive density or pressure")
        return U

    def to_conservative(self, rho, u, v, p):
        rho, u, v, p = (np.asarray(a, dtype=float) for a in (rho, u, v, p))
        if np.any(rho <= 0) or np.any(p <= 0):
            raise InvalidStateError("nonpositive density or pressure")
        e = p / (self.gamma - 1.0) + 0.5 * rho * (u * u + v * v)
        return np.array([rho, rho * u, rho * v, e])

    def to_primitive(self, U):
        U = self.check(U)
        return U[0], U[1] / U[0], U[2] / U[0], self.pressure(U)

    def flux(self, U, axis: int = 0):
        U = np.asarray(U, dtype=float)
        rho, mu, mv, e = U
        p = self.pressure(U)
        if axis == 0:
            u = mu / rho
            return np.array([mu, mu * u + p, mv * u, (e + p) * u])
        v = mv / rho
        return np.array([mv, mu * v, mv * v + p, (e + p) * v])

    def sound_speed(self, U):
        return np.sqrt(self.gamma * self.pressure(U) / U[0])

    def eigenvalues(self, U, axis: int = 0):
        U = np.asarray(U, dtype=float)
        un = U[1 + axis] / U[0]
        c = self.sound_speed(U)
        return np.array([un - c, un, un, un + c])

    def family_speeds(self, U, axis: int = 0) -> np.ndarray:
        lam = np.abs(self.eigenvalues(U, axis))
        return lam.reshape(lam.shape[0], -1).max(axis=1)

    def wave_speed(self, U, axis: int = 0) -> float:
        U = np.asarray(U, dtype=float)
        return float(np.max(np.abs(U[1 + axis] / U[0]) + self.sound_speed(U)))

    def jacobian(self, U, axis: int = 0):
        g = self.gamma
        rho, mu, mv, e = (float(v) for v in U)
        u, v = mu / rho, mv / rho
        q2 = u * u + v * v
        H = (e + self.pressure(np.array([rho, mu, mv, e]))) / rho
        phi = 0.5 * (g - 1.0) * q2
        if axis == 0:
            return np.array([
                [0.0, 1.0, 0.0, 0.0],
                [phi - u * u, (3.0 - g) * u, -(g - 1.0) * v, g - 1.0],
                [-u * v, v, u, 0.0],
                [u * (phi - H), H - (g - 1.0) * u * u, -(g - 1.0) * u * v, g * u],
            ])
        return np.array([
            [0.0, 0.0, 1.0, 0.0],
            [-u * v, v, u, 0.0],
            [phi - v * v, -(g - 1.0) * u, (3.0 - g) * v, g - 1.0],
            [v * (phi - H), -(g - 1.0) * u * v, H - (g - 1.0) * v * v, g * v],
        ])


def euler_flux_1d(U, gamma: float = 1.4):
    model = Euler1D(gamma)
    return model.flux(model.check(U))


def eigensystem_1d(U_avg, gamma: float = 1.4):
    """Right/left eigenvectors and eigenvalues (u-c, u, u+c) of the 1D flux Jacobian.

    Vectorized over trailing axes of ``U_avg``; matrices are returned with
    shape ``(3, 3, ...)``.
    """
    U = Euler1D(gamma).check(U_avg)
    rho = U[0]
    u = U[1] / rho
    p = (gamma - 1.0) * (U[2] - 0.5 * rho * u * u)
    c = np.sqrt(gamma * p / rho)
    H = (U[2] + p) / rho
    one = np.ones_like(rho)
    zero = np.zeros_like(rho)
    R = np.array([
        [one, one, one],
        [u - c, u, u + c],
        [H - u * c, 0.5 * u * u, H + u * c],
    ])
    b1 = (gamma - 1.0) / (c * c)
    b2 = 0.5 * b1 * u * u
    L = np.array([
        [0.5 * (b2 + u / c), -0.5 * (b1 * u + 1.0 / c), 0.5 * b1],
        [1.0 - b2, b1 * u, -b1 + zero],
        [0.5 * (b2 - u / c), -0.5 * (b1 * u - 1.0 / c), 0.5 * b1],
    ])
    return R, L, np.array([u - c, u, u + c])


def eigensystem_2d(U_avg, direction: int = 0, gamma: float = 1.4):
    """Eigensystem of the x (``direction=0``) or y (``direction=1``) flux Jacobian.

    Eigenvalues are ordered (un-c, un, un, un+c) with ``un`` the normal
    velocity; the two middle families are the entropy and shear waves.
    """
    U = Euler2D(gamma).check(U_avg)
    rho = U[0]
    u, v = U[1] / rho, U[2] / rho
    q2 = u * u + v * v
    p = (gamma - 1.0) * (U[3] - 0.5 * rho * q2)
    c = np.sqrt(gamma * p / rho)
    H = (U[3] + p) / rho
    one = np.ones_like(rho)
    zero = np.zeros_like(rho)
    un, ut = (u, v) if direction == 0 else (v, u)
    b1 = (gamma - 1.0) / (c * c)
    b2 = 0.5 * b1 * q2
    # rows/cols in (rho, m_n, m_t, e) ordering, permuted back below
    R = np.array([
        [one, one, zero, one],
        [un - c, un, zero, un + c],
        [ut, ut, one, ut],
        [H - un * c, 0.5 * q2, ut, H + un * c],
    ])
    L = np.array([
        [0.5 * (b2 + un / c), -0.5 * (b1 * un + 1.0 / c), -0.5 * b1 * ut, 0.5 * b1],
        [1.0 - b2, b1 * un, b1 * ut, -b1 + zero],
        [-ut, zero, one, zero],
        [0.5 * (b2 - un / c), -0.5 * (b1 * un - 1.0 / c), -0.5 * b1 * ut, 0.5 * b1],
    ])
    if direction == 1:
        perm = [0, 2, 1, 3]
        R = R[perm]
        L = L[:, perm]
    return R, L, np.array([un - c, un, un, un + c])


def max_wave_speed(model, u, axis: int = 0) -> float:
    """Largest signal speed over the (interior) field ``u``."""
    u = np.asarray(u, dtype=float)
    if not getattr(model, "is_system", False) and u.ndim > 1 and u.shape[0] == 1:
        u = u[0]
    return model.wave_speed(u, axis)
