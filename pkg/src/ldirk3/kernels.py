"""Backend selection for the line kernels.

The compiled extension ``ldirk3._core`` is used when importable; otherwise
the numpy implementation in ``ldirk3._fallback`` is.  Set
``LDIRK3_BACKEND=python`` to force the fallback.
"""
import os

from . import _fallback

RECON_WENO5 = _fallback.RECON_WENO5
RECON_MUSCL = _fallback.RECON_MUSCL

_core = None
if os.environ.get("LDIRK3_BACKEND", "").lower() not in ("python", "numpy", "fallback"):
    try:
        from . import _core
    except ImportError:  # extension not built
        _core = None

BACKEND = "cython" if _core is not None else "python"
_impl = _core if _core is not None else _fallback


def get_backend(name=None):
    """Return the kernel module for ``name`` ("cython", "python") or the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _fallback
    if name == "cython":
        if _core is None:
            raise ImportError("compiled kernels are not built")
        return _core
    raise ValueError(f"unknown backend {name!r}")


def split_flux_lines(fp, fm, recon=RECON_WENO5):
    return _impl.split_flux_lines(fp, fm, recon)


def euler_char_lines(U, lam, gamma, recon=RECON_WENO5):
    return _impl.euler_char_lines(U, lam, gamma, recon)
