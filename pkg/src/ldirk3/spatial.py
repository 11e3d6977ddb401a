"""Spatial discretization: WENO5-JS / MUSCL reconstruction of Lax-Friedrichs split
fluxes, characteristic-wise splitting for Euler, central diffusion fluxes and the
conservative divergence."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _fallback, kernels
from .mesh import GHOST, Grid1D, Grid2D, pad
from .physics import DiffusionSpec, Euler1D, Euler2D, ScalarLaw

RECON = {"weno5": kernels.RECON_WENO5, "muscl": kernels.RECON_MUSCL}


# ---------------------------------------------------------------------------
# pointwise building blocks


def weno5_reconstruct(stencil, bias: str = "left"):
    """WENO5-JS value at the face ``j+1/2``.

    ``bias="left"`` expects ``(u[j-2], ..., u[j+2])``; ``bias="right"``
    expects ``(u[j-1], ..., u[j+3])`` and reconstructs from the right.
    Extra trailing axes are allowed.
    """
    v = [np.asarray(s, dtype=float) for s in stencil]
    if len(v) != 5:
        raise ValueError("WENO5 needs a 5-point stencil")
    if bias == "left":
        return _fallback.weno5_left(*v)
    if bias == "right":
        return _fallback.weno5_left(v[4], v[3], v[2], v[1], v[0])
    raise ValueError(f"bias must be 'left' or 'right', not {bias!r}")


def weno5_weights(stencil):
    """Nonlinear weights of the three candidate stencils (left bias)."""
    return _fallback.weno5_weights(*[np.asarray(s, dtype=float) for s in stencil])


def muscl_reconstruct(stencil, side: str = "left"):
    """Minmod-limited linear extrapolation from ``(u[j-1], u[j], u[j+1])``.

    ``side="left"`` returns the value at ``j+1/2`` (left state of that face),
    ``side="right"`` the value at ``j-1/2``.
    """
    um, u0, up = (np.asarray(s, dtype=float) for s in stencil)
    slope = _fallback.minmod2(u0 - um, up - u0)
    if side == "left":
        return u0 + 0.5 * slope
    if side == "right":
        return u0 - 0.5 * slope
    raise ValueError(f"side must be 'left' or 'right', not {side!r}")


@dataclass
class SplitFluxPair:
    plus: np.ndarray
    minus: np.ndarray


def lf_split_scalar(u, law: ScalarLaw, a: float, axis: int = 0) -> SplitFluxPair:
    """Global Lax-Friedrichs splitting ``f = f+ + f-`` with ``f+- = (f(u) +- a u)/2``."""
    u = np.asarray(u, dtype=float)
    f = law.flux(u, axis)
    return SplitFluxPair(0.5 * (f + a * u), 0.5 * (f - a * u))


def central_diffusion_flux(u_padded, spec: DiffusionSpec, dx: float, g: int = GHOST):
    """Face diffusion flux ``eps * nu(mean) * (u[j+1]-u[j]) / dx`` on the n+1 faces."""
    u = np.asarray(u_padded, dtype=float)
    n = u.shape[-1] - 2 * g
    left = u[..., g - 1:g + n]
    right = u[..., g:g + n + 1]
    return spec.eps * spec.nu(0.5 * (left + right)) * (right - left) / dx


def divergence(fluxes, dx: float, axis: int = -1):
    """``-(F[j+1/2] - F[j-1/2]) / dx`` along ``axis``."""
    return -np.diff(np.asarray(fluxes), axis=axis) / dx


def char_weno_interface_flux(U_padded, model, direction: int = 0, lam=None, recon: str = "weno5"):
    """Characteristic-wise LF/WENO flux of an Euler model on all faces of a padded field.

    For 1D input ``(3, n+6)`` the result is ``(3, n+1)``.  For 2D input
    ``(4, nx+6, ny+6)`` the x-faces are ``(4, nx+1, ny)`` and the
    y-faces ``(4, nx, ny+1)``.
    """
    U = np.asarray(U_padded, dtype=float)
    if lam is None:
        lam = model.family_speeds(_strip(U), direction)
    return _euler_faces(U, model, direction, lam, RECON[recon])


def _strip(up, g=GHOST):
    return up[(slice(None),) + (slice(g, -g),) * (up.ndim - 1)]


def _euler_faces(U, model, direction, lam, recon):
    g = GHOST
    if U.ndim == 2:
        return kernels.euler_char_lines(U, lam, model.gamma, recon)
    if direction == 0:
        lines = np.ascontiguousarray(U[:, :, g:-g].transpose(0, 2, 1))
        return kernels.euler_char_lines(lines, lam, model.gamma, recon).transpose(0, 2, 1)
    perm = [0, 2, 1, 3]
    lines = np.ascontiguousarray(U[perm][:, g:-g, :])
    return kernels.euler_char_lines(lines, lam, model.gamma, recon)[perm]


def _scalar_faces(up, law, direction, a, recon):
    g = GHOST
    f = law.flux(up, direction)
    fp = 0.5 * (f + a * up)
    fm = 0.5 * (f - a * up)
    if up.ndim == 2:
        return kernels.split_flux_lines(fp, fm, recon)
    if direction == 0:
        fp = np.ascontiguousarray(fp[:, :, g:-g].transpose(0, 2, 1))
        fm = np.ascontiguousarray(fm[:, :, g:-g].transpose(0, 2, 1))
        return kernels.split_flux_lines(fp, fm, recon).transpose(0, 2, 1)
    return kernels.split_flux_lines(fp[:, g:-g, :], fm[:, g:-g, :], recon)


# ---------------------------------------------------------------------------
# semidiscrete operator


class Semidiscrete:
    """Right-hand side ``L(u)`` of the method-of-lines system and its face fluxes.

    Fields are interior arrays of shape ``(m, n)`` (1D) or ``(m, nx, ny)``
    (2D).  Face fluxes already include the diffusion term (``f_hat - Q_hat``)
    so time integrators see one conservative flux per axis.

    ``split="family"`` uses one global LF speed per characteristic family;
    ``split="max"`` uses the largest of them for all families.
    """

    def __init__(self, model, grid, bc, recon: str = "weno5",
                 diffusion: Optional[DiffusionSpec] = None, split: str = "family"):
        self.model = model
        self.grid = grid
        self.bc = bc
        self.recon_name = recon
        self.recon = RECON[recon]
        self.diffusion = diffusion
        self.split = split
        self.ndim = 2 if isinstance(grid, Grid2D) else 1
        self.m = model.m
        self.spacing = (grid.dx,) if self.ndim == 1 else (grid.dx, grid.dy)
        if diffusion is not None and (self.ndim != 1 or model.is_system):
            raise ValueError("diffusion is supported for 1D scalar laws only")
        if self.ndim == 2 and isinstance(model, Euler1D):
            raise ValueError("Euler1D model on a 2D grid")
        if self.ndim == 1 and isinstance(model, Euler2D):
            raise ValueError("Euler2D model on a 1D grid")

    @property
    def shape(self):
        n = (self.grid.n,) if self.ndim == 1 else self.grid.shape
        return (self.m,) + n

    def padded(self, u):
        return pad(np.asarray(u, dtype=float).reshape(self.shape), self.bc)

    def speeds(self, u):
        """Global LF speeds per axis (frozen Lambda), from the interior field ``u``."""
        u = np.asarray(u, dtype=float).reshape(self.shape)
        out = []
        for axis in range(self.ndim):
            if self.model.is_system:
                lam = self.model.family_speeds(u, axis)
                if self.split == "max":
                    lam = np.full_like(lam, lam.max())
            else:
                lam = self.model.wave_speed(u[0], axis)
            out.append(lam)
        return out

    def interface_fluxes(self, u, lam=None):
        """List of face-flux arrays, one per axis."""
        up = self.padded(u)
        if lam is None:
            lam = self.speeds(u)
        out = []
        for axis in range(self.ndim):
            if self.model.is_system:
                F = _euler_faces(up, self.model, axis, lam[axis], self.recon)
            else:
                F = _scalar_faces(up, self.model, axis, lam[axis], self.recon)
            if self.diffusion is not None:
                F = F - central_diffusion_flux(up, self.diffusion, self.spacing[0])
            out.append(F)
        return out

    def divergence(self, fluxes):
        total = 0.0
        for axis, F in enumerate(fluxes):
            total = total + divergence(F, self.spacing[axis], axis=axis + 1)
        return total

    def rhs(self, u, lam=None):
        return self.divergence(self.interface_fluxes(u, lam))

    def max_speed(self, u, axis: int = 0) -> float:
        u = np.asarray(u, dtype=float).reshape(self.shape)
        return float(self.model.wave_speed(u if self.model.is_system else u[0], axis))

    def max_diffusivity(self, u) -> float:
        if self.diffusion is None:
            return 0.0
        return float(self.diffusion.eps * np.max(self.diffusion.nu(np.asarray(u))))
