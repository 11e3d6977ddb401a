"""Pure-numpy implementations of the line kernels.

Every kernel works on "lines": arrays whose last axis is a ghost-padded
spatial direction of length ``npad``.  Outputs hold the ``npad - 5``
interface values between padded nodes ``i+2`` and ``i+3``.
"""
import numpy as np

WENO_EPS = 1e-6
RECON_WENO5 = 0
RECON_MUSCL = 1


def weno5_left(v0, v1, v2, v3, v4):
    """Left-biased WENO5-JS value at the right face of ``v2``."""
    b0 = 13.0 / 12.0 * (v0 - 2.0 * v1 + v2) ** 2 + 0.25 * (v0 - 4.0 * v1 + 3.0 * v2) ** 2
    b1 = 13.0 / 12.0 * (v1 - 2.0 * v2 + v3) ** 2 + 0.25 * (v1 - v3) ** 2
    b2 = 13.0 / 12.0 * (v2 - 2.0 * v3 + v4) ** 2 + 0.25 * (3.0 * v2 - 4.0 * v3 + v4) ** 2
    a0 = 0.1 / (WENO_EPS + b0) ** 2
    a1 = 0.6 / (WENO_EPS + b1) ** 2
    a2 = 0.3 / (WENO_EPS + b2) ** 2
    q0 = (2.0 * v0 - 7.0 * v1 + 11.0 * v2) / 6.0
    q1 = (-v1 + 5.0 * v2 + 2.0 * v3) / 6.0
    q2 = (2.0 * v2 + 5.0 * v3 - v4) / 6.0
    return (a0 * q0 + a1 * q1 + a2 * q2) / (a0 + a1 + a2)


def weno5_weights(v0, v1, v2, v3, v4):
    b0 = 13.0 / 12.0 * (v0 - 2.0 * v1 + v2) ** 2 + 0.25 * (v0 - 4.0 * v1 + 3.0 * v2) ** 2
    b1 = 13.0 / 12.0 * (v1 - 2.0 * v2 + v3) ** 2 + 0.25 * (v1 - v3) ** 2
    b2 = 13.0 / 12.0 * (v2 - 2.0 * v3 + v4) ** 2 + 0.25 * (3.0 * v2 - 4.0 * v3 + v4) ** 2
    a = np.array([0.1 / (WENO_EPS + b0) ** 2, 0.6 / (WENO_EPS + b1) ** 2, 0.3 / (WENO_EPS + b2) ** 2])
    return a / a.sum(axis=0)


def minmod2(a, b):
    return np.where(a * b > 0.0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


def muscl_left(vm, v0, vp):
    return v0 + 0.5 * minmod2(v0 - vm, vp - v0)


def _recon_pair(fp, fm, recon):
    n = fp.shape[-1] - 5
    s = [fp[..., k:k + n] for k in range(6)]
    t = [fm[..., k:k + n] for k in range(6)]
    if recon == RECON_WENO5:
        return weno5_left(*s[0:5]) + weno5_left(t[5], t[4], t[3], t[2], t[1])
    return muscl_left(s[1], s[2], s[3]) + muscl_left(t[4], t[3], t[2])


def split_flux_lines(fp, fm, recon=RECON_WENO5):
    """Interface flux from nodal split fluxes: left-biased ``fp`` plus right-biased ``fm``."""
    return _recon_pair(np.asarray(fp), np.asarray(fm), recon)


def _euler_flux_local(U, gamma):
    # local ordering (rho, m_n, [m_t,] e): normal momentum is component 1
    rho = U[0]
    un = U[1] / rho
    if U.shape[0] == 3:
        p = (gamma - 1.0) * (U[2] - 0.5 * rho * un * un)
        return np.array([U[1], U[1] * un + p, (U[2] + p) * un])
    ut = U[2] / rho
    p = (gamma - 1.0) * (U[3] - 0.5 * rho * (un * un + ut * ut))
    return np.array([U[1], U[1] * un + p, U[2] * un, (U[3] + p) * un])


def _eigen_local(Ua, gamma):
    rho = Ua[0]
    un = Ua[1] / rho
    one = np.ones_like(rho)
    zero = np.zeros_like(rho)
    if Ua.shape[0] == 3:
        q2 = un * un
        p = (gamma - 1.0) * (Ua[2] - 0.5 * rho * q2)
    else:
        ut = Ua[2] / rho
        q2 = un * un + ut * ut
        p = (gamma - 1.0) * (Ua[3] - 0.5 * rho * q2)
    if not (np.all(rho > 0) and np.all(p > 0)):
        from .physics import InvalidStateError

        raise InvalidStateError("nonpositive density or pressure in averaged state")
    c = np.sqrt(gamma * p / rho)
    H = (Ua[-1] + p) / rho
    b1 = (gamma - 1.0) / (c * c)
    b2 = 0.5 * b1 * q2
    if Ua.shape[0] == 3:
        R = np.array([[one, one, one], [un - c, un, un + c], [H - un * c, 0.5 * q2, H + un * c]])
        L = np.array([
            [0.5 * (b2 + un / c), -0.5 * (b1 * un + 1.0 / c), 0.5 * b1],
            [1.0 - b2, b1 * un, -b1],
            [0.5 * (b2 - un / c), -0.5 * (b1 * un - 1.0 / c), 0.5 * b1],
        ])
        return R, L
    R = np.array([
        [one, one, zero, one],
        [un - c, un, zero, un + c],
        [ut, ut, one, ut],
        [H - un * c, 0.5 * q2, ut, H + un * c],
    ])
    L = np.array([
        [0.5 * (b2 + un / c), -0.5 * (b1 * un + 1.0 / c), -0.5 * b1 * ut, 0.5 * b1],
        [1.0 - b2, b1 * un, b1 * ut, -b1],
        [-ut, zero, one, zero],
        [0.5 * (b2 - un / c), -0.5 * (b1 * un - 1.0 / c), -0.5 * b1 * ut, 0.5 * b1],
    ])
    return R, L


def euler_char_lines(U, lam, gamma, recon=RECON_WENO5):
    """Characteristic-wise Lax-Friedrichs split flux along the last axis.

    ``U`` has shape ``(m, nlines, npad)`` in local ordering with the normal
    momentum at index 1; ``lam`` holds the global per-family speeds.
    """
    U = np.asarray(U, dtype=float)
    n = U.shape[-1] - 5
    F = _euler_flux_local(U, gamma)
    Ua = 0.5 * (U[..., 2:2 + n] + U[..., 3:3 + n])
    R, L = _eigen_local(Ua, gamma)
    return char_split_lines(U, F, R, L, lam, recon)


def char_split_lines(U, F, R, L, lam, recon=RECON_WENO5):
    """Lax-Friedrichs splitting in characteristic space with given eigenvectors.

    ``R``/``L`` have shape ``(m, m, ..., npad - 5)`` (one pair per interface);
    the six-node neighborhood of each interface is projected with ``L``,
    split with ``lam``, reconstructed and mapped back with ``R``.
    """
    m = U.shape[0]
    n = U.shape[-1] - 5
    lam = np.asarray(lam, dtype=float).reshape((m,) + (1,) * (U.ndim - 1))
    gp, gm = [], []
    for k in range(6):
        W = np.einsum("ab...,b...->a...", L, U[..., k:k + n])
        G = np.einsum("ab...,b...->a...", L, F[..., k:k + n])
        gp.append(0.5 * (G + lam * W))
        gm.append(0.5 * (G - lam * W))
    if recon == RECON_WENO5:
        h = weno5_left(*gp[0:5]) + weno5_left(gm[5], gm[4], gm[3], gm[2], gm[1])
    else:
        h = muscl_left(gp[1], gp[2], gp[3]) + muscl_left(gm[4], gm[3], gm[2])
    return np.einsum("ab...,b...->a...", R, h)
