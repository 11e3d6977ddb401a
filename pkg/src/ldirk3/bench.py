"""Timing of the compiled and pure-Python line kernels."""
from __future__ import annotations

import timeit

import numpy as np

from . import kernels


def _euler_lines(n, nlines, rng):
    # smooth positive states in local ordering (rho, m_n, m_t, e)
    x = np.linspace(0.0, 2.0 * np.pi, n + 5)
    rho = 1.0 + 0.2 * np.sin(x) + 0.01 * rng.random((nlines, n + 5))
    un = 0.5 * np.cos(x)
    ut = 0.3 * np.sin(2.0 * x)
    p = 1.0 + 0.1 * np.cos(3.0 * x)
    e = p / 0.4 + 0.5 * rho * (un * un + ut * ut)
    return np.ascontiguousarray(np.stack([rho, rho * un, rho * ut, e]))


def _cases(n):
    rng = np.random.default_rng(0)
    u = np.sin(np.linspace(0.0, 2.0 * np.pi, n + 5))[None] + 0.01 * rng.random((1, n + 5))
    fp, fm = np.ascontiguousarray(0.5 * (u + u)), np.ascontiguousarray(0.5 * (u - u))
    U1 = _euler_lines(n, 1, rng)[[0, 1, 3], 0]
    U2 = _euler_lines(n, n, rng)
    lam3 = np.array([2.5, 2.5, 2.5])
    lam4 = np.array([2.5, 2.5, 2.5, 2.5])
    return [
        ("split_flux_lines weno5", "split_flux_lines", (fp, fm, kernels.RECON_WENO5)),
        ("split_flux_lines muscl", "split_flux_lines", (fp, fm, kernels.RECON_MUSCL)),
        ("euler_char_lines 1d", "euler_char_lines", (np.ascontiguousarray(U1), lam3, 1.4)),
        ("euler_char_lines 2d", "euler_char_lines", (U2, lam4, 1.4)),
    ]


def time_kernel(fn, args, repeat: int) -> float:
    """Best-of-``repeat`` wall time of one call, in seconds."""
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def run_benchmark(n: int = 400, repeat: int = 20):
    """Yield one formatted line per kernel: timings for each backend and the speedup.

    The 2D entry times ``n`` lines of length ``n``.
    """
    backends = [("python", kernels.get_backend("python"))]
    try:
        backends.append(("cython", kernels.get_backend("cython")))
    except ImportError:
        pass
    yield f"active backend: {kernels.BACKEND}; n={n}; best of {repeat}"
    yield f"{'kernel':26s}" + "".join(f"{name:>14s}" for name, _ in backends) + "   speedup"
    for label, attr, args in _cases(n):
        times = [time_kernel(getattr(mod, attr), args, repeat) for _, mod in backends]
        cols = "".join(f"{t * 1e3:11.3f} ms" for t in times)
        speed = f"{times[0] / times[-1]:9.1f}x" if len(times) > 1 else "      n/a"
        yield f"{label:26s}{cols}{speed}"
