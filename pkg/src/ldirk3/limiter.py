"""Time limiters: stage-ratio limiter (1D and 2D), legacy time-derivative limiter,
face averaging of theta, total variation and the global TVD sensor."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import Extrapolate, FixedState, Periodic, _per_axis, pad

DEN_EPS = 1e-12


def minmod(*args):
    """Common-sign minimum-magnitude selector; 0 on sign disagreement.

    Arguments may be scalars or broadcastable arrays.
    """
    if not args:
        raise ValueError("minmod needs at least one argument")
    arrs = np.broadcast_arrays(*[np.asarray(a, dtype=float) for a in args])
    stack = np.stack(arrs)
    pos = np.all(stack > 0, axis=0)
    neg = np.all(stack < 0, axis=0)
    out = np.where(pos, stack.min(axis=0), np.where(neg, stack.max(axis=0), 0.0))
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# reference variables


@dataclass(frozen=True)
class ReferenceVariable:
    """Quantity fed to the limiter: ``conservative`` (component ``index``),
    ``density``, ``pressure`` or ``velocity`` (normal component ``index``)."""

    kind: str = "conservative"
    index: int = 0

    @classmethod
    def parse(cls, text: str) -> "ReferenceVariable":
        text = text.strip().lower()
        if text in ("density", "rho"):
            return cls("density")
        if text in ("pressure", "p"):
            return cls("pressure")
        if text.startswith("velocity"):
            _, _, k = text.partition(":")
            return cls("velocity", int(k or 0))
        if text.startswith("conservative"):
            _, _, k = text.partition(":")
            return cls("conservative", int(k or 0))
        raise ValueError(f"unknown reference variable {text!r}")

    def extract(self, model, u):
        """Reference values over the spatial shape of ``u`` (components dropped)."""
        u = np.asarray(u, dtype=float)
        if self.kind == "conservative":
            return u[self.index]
        if not getattr(model, "is_system", False):
            raise ValueError(f"{self.kind} reference needs a system model")
        if self.kind == "density":
            return u[0]
        if self.kind == "pressure":
            return model.pressure(u)
        if self.kind == "velocity":
            return u[1 + self.index] / u[0]
        raise ValueError(self.kind)

    def __str__(self):
        if self.kind in ("conservative", "velocity"):
            return f"{self.kind}:{self.index}"
        return self.kind


DENSITY = ReferenceVariable("density")
PRESSURE = ReferenceVariable("pressure")


def _theta_bc(bc, ndim):
    # theta ghosts follow the solution's policy; fixed states have no theta analogue
    return [Extrapolate() if isinstance(k, FixedState) else k for k in _per_axis(bc, ndim)]


# ---------------------------------------------------------------------------
# stage-ratio limiter


def _ratio_theta(num, den, scale):
    """minmod(num/den, 1) clamped to [0, 1] with the flat-stencil convention."""
    tol = DEN_EPS * max(1.0, scale)
    flat = np.abs(den) < tol
    safe = np.where(flat, 1.0, den)
    r = num / safe
    theta = np.clip(np.where(r > 0, np.minimum(r, 1.0), 0.0), 0.0, 1.0)
    return np.where(flat, np.where(np.abs(num) < tol, 1.0, 0.0), theta)


def stage_ratio_theta(w_k, w_k1, bc=Periodic()):
    """Nodal limiter from the ratio of central differences of two stage fields.

    ``w_k`` and ``w_k1`` are 1D reference-variable arrays (stage ``k`` and
    the current stage ``k+1`` iterate).
    """
    wk = pad(np.asarray(w_k, dtype=float)[None], bc, 1)[0]
    wk1 = pad(np.asarray(w_k1, dtype=float)[None], bc, 1)[0]
    scale = float(np.max(np.abs(w_k))) if np.size(w_k) else 1.0
    return _ratio_theta(wk1[2:] - wk1[:-2], wk[2:] - wk[:-2], scale)


def stage_ratio_theta_2d(w_k, w_k1, bc=Periodic()):
    """2D limiter: minmod of the x, y, diagonal and anti-diagonal ratios and 1."""
    wk = pad(np.asarray(w_k, dtype=float)[None], bc, 1)[0]
    wk1 = pad(np.asarray(w_k1, dtype=float)[None], bc, 1)[0]
    scale = float(np.max(np.abs(w_k))) if np.size(w_k) else 1.0
    c = slice(1, -1)
    pairs = [
        ((slice(2, None), c), (slice(None, -2), c)),                      # x
        ((c, slice(2, None)), (c, slice(None, -2))),                      # y
        ((slice(2, None), slice(2, None)), (slice(None, -2), slice(None, -2))),  # main diagonal
        ((slice(None, -2), slice(2, None)), (slice(2, None), slice(None, -2))),  # anti-diagonal
    ]
    theta = np.ones(np.shape(w_k))
    for hi, lo in pairs:
        theta = np.minimum(theta, _ratio_theta(wk1[hi] - wk1[lo], wk[hi] - wk[lo], scale))
    # minmod(r1..r4, 1) equals the smallest per-direction clamp
    return theta


def theta_interface(theta, bc=Periodic()):
    """Face values ``(theta[j] + theta[j+1]) / 2`` on the n+1 faces of a 1D field."""
    tp = pad(np.asarray(theta, dtype=float)[None], _theta_bc(bc, 1), 1)[0]
    return 0.5 * (tp[:-1] + tp[1:])


def theta_interface_2d(theta, bc=Periodic()):
    """Per-axis face averages: x-faces ``(nx+1, ny)`` and y-faces ``(nx, ny+1)``."""
    tp = pad(np.asarray(theta, dtype=float)[None], _theta_bc(bc, 2), 1)[0]
    tx = 0.5 * (tp[:-1, 1:-1] + tp[1:, 1:-1])
    ty = 0.5 * (tp[1:-1, :-1] + tp[1:-1, 1:])
    return tx, ty


def legacy_theta(u_n, u_np1, L_n, L_np1, dt, eps: float = 1e-10):
    """Time-derivative limiter ``minmod(2s/(L_n+eps), 2s/(L_np1+eps), 1)`` clamped to [0, 1]."""
    s = (np.asarray(u_np1, dtype=float) - np.asarray(u_n, dtype=float)) / dt
    theta = minmod(2.0 * s / (np.asarray(L_n) + eps), 2.0 * s / (np.asarray(L_np1) + eps), 1.0)
    return np.clip(theta, 0.0, 1.0)


# ---------------------------------------------------------------------------
# total variation and global sensor


def total_variation(u, periodic: bool = False) -> float:
    """Sum of absolute jumps over a 1D or 2D array; wraparound jumps for periodic data."""
    u = np.asarray(u, dtype=float)
    tv = 0.0
    for axis in range(u.ndim):
        tv += float(np.sum(np.abs(np.diff(u, axis=axis))))
        if periodic:
            first = np.take(u, 0, axis=axis)
            last = np.take(u, -1, axis=axis)
            tv += float(np.sum(np.abs(first - last)))
    return tv


def global_sensor(u_old, u_tentative, periodic: bool = False) -> int:
    """Return 1 (reject) if TV does not decrease, else 0 (accept)."""
    return int(total_variation(u_tentative, periodic) >= total_variation(u_old, periodic))
