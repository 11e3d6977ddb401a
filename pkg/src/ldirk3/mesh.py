"""Uniform 1D/2D node lattices and ghost-cell handling.

Arrays carry components on the leading axis: a 1D field is ``(m, n)`` and a
2D field ``(m, nx, ny)``.  Padded arrays add ``GHOST`` cells on each side of
every spatial axis.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

GHOST = 3


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid.

    Periodic grids hold ``n`` distinct nodes with ``dx = L/n`` (the right
    endpoint is the image of ``x_min``); non-periodic grids include both
    endpoints and use ``dx = L/(n-1)``.
    """

    x_min: float
    x_max: float
    n: int
    periodic: bool = False

    def __post_init__(self):
        if not (self.x_max > self.x_min):
            raise ValueError(f"degenerate domain [{self.x_min}, {self.x_max}]")
        if int(self.n) != self.n or self.n < 5:
            raise ValueError(f"need at least 5 nodes, got n={self.n}")

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def dx(self) -> float:
        if self.periodic:
            return self.length / self.n
        return self.length / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return self.x_min + np.arange(self.n) * self.dx

    @property
    def measure(self) -> float:
        """Length represented by the nodes (``n*dx``)."""
        return self.n * self.dx


@dataclass(frozen=True)
class Grid2D:
    xaxis: Grid1D
    yaxis: Grid1D

    @property
    def dx(self) -> float:
        return self.xaxis.dx

    @property
    def dy(self) -> float:
        return self.yaxis.dx

    @property
    def shape(self) -> tuple[int, int]:
        return (self.xaxis.n, self.yaxis.n)

    @property
    def measure(self) -> float:
        return self.xaxis.measure * self.yaxis.measure

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.xaxis.x, self.yaxis.x, indexing="ij")


Grid = Union[Grid1D, Grid2D]


def build_grid_1d(x_min: float, x_max: float, n: int, periodic: bool = False) -> Grid1D:
    return Grid1D(float(x_min), float(x_max), int(n), bool(periodic))


def build_grid_2d(x_range, y_range, n, periodic: bool = False) -> Grid2D:
    nx, ny = (n, n) if np.isscalar(n) else n
    return Grid2D(build_grid_1d(*x_range, nx, periodic), build_grid_1d(*y_range, ny, periodic))


class BoundaryKind:
    """Base class for boundary policies; instances are immutable."""

    periodic = False

    def fill_axis(self, arr: np.ndarray, axis: int, g: int) -> None:
        raise NotImplementedError


class Periodic(BoundaryKind):
    periodic = True

    def fill_axis(self, arr, axis, g):
        a = np.moveaxis(arr, axis, -1)
        n = a.shape[-1] - 2 * g
        a[..., :g] = a[..., n:n + g]
        a[..., n + g:] = a[..., g:2 * g]

    def __repr__(self):
        return "Periodic()"

    def __eq__(self, other):
        return type(other) is Periodic

    def __hash__(self):
        return hash("Periodic")


class Extrapolate(BoundaryKind):
    """Zero-order outflow: ghosts copy the nearest interior value."""

    def fill_axis(self, arr, axis, g):
        a = np.moveaxis(arr, axis, -1)
        a[..., :g] = a[..., g:g + 1]
        a[..., -g:] = a[..., -g - 1:-g]

    def __repr__(self):
        return "Extrapolate()"

    def __eq__(self, other):
        return type(other) is Extrapolate

    def __hash__(self):
        return hash("Extrapolate")


@dataclass(frozen=True, eq=True)
class FixedState(BoundaryKind):
    """Ghosts hold prescribed per-component values (left and right may differ)."""

    left: tuple
    right: tuple = None

    def fill_axis(self, arr, axis, g):
        a = np.moveaxis(arr, axis, -1)
        right = self.left if self.right is None else self.right
        extra = (1,) * (a.ndim - 2)
        a[..., :g] = np.asarray(self.left, dtype=float).reshape((-1,) + extra + (1,))
        a[..., -g:] = np.asarray(right, dtype=float).reshape((-1,) + extra + (1,))


BCSpec = Union[BoundaryKind, Sequence[BoundaryKind]]


def _per_axis(bc: BCSpec, ndim: int) -> list[BoundaryKind]:
    if isinstance(bc, BoundaryKind):
        return [bc] * ndim
    bcs = list(bc)
    if len(bcs) != ndim:
        raise ValueError(f"expected {ndim} boundary kinds, got {len(bcs)}")
    return bcs


def fill_ghosts(padded: np.ndarray, bc: BCSpec, g: int = GHOST) -> np.ndarray:
    """Populate the ghost layers of ``padded`` in place and return it.

    Axis 0 is the component axis and is never padded.  For 2D arrays the x
    ghosts are filled first, then y ghosts over the full padded x range, so
    corner cells are consistent for periodic and extrapolated boundaries.
    """
    spatial = padded.ndim - 1
    for axis, kind in enumerate(_per_axis(bc, spatial), start=1):
        kind.fill_axis(padded, axis, g)
    return padded


def pad(u: np.ndarray, bc: BCSpec, g: int = GHOST) -> np.ndarray:
    """Return a ghost-padded copy of the interior array ``u``."""
    widths = [(0, 0)] + [(g, g)] * (u.ndim - 1)
    out = np.pad(np.asarray(u, dtype=float), widths)
    return fill_ghosts(out, bc, g)


def interior(padded: np.ndarray, g: int = GHOST) -> np.ndarray:
    idx = (slice(None),) + (slice(g, -g),) * (padded.ndim - 1)
    return padded[idx]


def is_periodic(bc: BCSpec, axis: int = 0) -> bool:
    if isinstance(bc, BoundaryKind):
        return bc.periodic
    return list(bc)[axis].periodic


@dataclass
class Field:
    """Ghost-padded value array with its boundary policy."""

    data: np.ndarray
    bc: BCSpec = field(default_factory=Periodic)
    g: int = GHOST

    @classmethod
    def from_interior(cls, u, bc: BCSpec, g: int = GHOST) -> "Field":
        u = np.asarray(u, dtype=float)
        if u.ndim == 1:
            u = u[None]
        return cls(pad(u, bc, g), bc, g)

    @property
    def m(self) -> int:
        return self.data.shape[0]

    @property
    def interior(self) -> np.ndarray:
        return interior(self.data, self.g)

    def refresh(self) -> "Field":
        fill_ghosts(self.data, self.bc, self.g)
        return self
