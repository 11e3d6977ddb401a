# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled line kernels; same contracts as ``ldirk3._fallback``."""
import numpy as np
from libc.math cimport sqrt, fabs

cdef double WENO_EPS = 1e-6


cdef inline double _weno_left(double v0, double v1, double v2, double v3, double v4) noexcept nogil:
    cdef double t, b0, b1, b2, a0, a1, a2
    t = v0 - 2.0 * v1 + v2
    b0 = 13.0 / 12.0 * t * t
    t = v0 - 4.0 * v1 + 3.0 * v2
    b0 += 0.25 * t * t
    t = v1 - 2.0 * v2 + v3
    b1 = 13.0 / 12.0 * t * t
    t = v1 - v3
    b1 += 0.25 * t * t
    t = v2 - 2.0 * v3 + v4
    b2 = 13.0 / 12.0 * t * t
    t = 3.0 * v2 - 4.0 * v3 + v4
    b2 += 0.25 * t * t
    b0 += WENO_EPS
    b1 += WENO_EPS
    b2 += WENO_EPS
    a0 = 0.1 / (b0 * b0)
    a1 = 0.6 / (b1 * b1)
    a2 = 0.3 / (b2 * b2)
    return (a0 * (2.0 * v0 - 7.0 * v1 + 11.0 * v2)
            + a1 * (-v1 + 5.0 * v2 + 2.0 * v3)
            + a2 * (2.0 * v2 + 5.0 * v3 - v4)) / (6.0 * (a0 + a1 + a2))


cdef inline double _minmod2(double a, double b) noexcept nogil:
    if a * b <= 0.0:
        return 0.0
    if fabs(a) < fabs(b):
        return a
    return b


cdef inline double _muscl_left(double vm, double v0, double vp) noexcept nogil:
    return v0 + 0.5 * _minmod2(v0 - vm, vp - v0)


cdef inline double _recon(double* gp, double* gm, int recon) noexcept nogil:
    if recon == 0:
        return _weno_left(gp[0], gp[1], gp[2], gp[3], gp[4]) + _weno_left(gm[5], gm[4], gm[3], gm[2], gm[1])
    return _muscl_left(gp[1], gp[2], gp[3]) + _muscl_left(gm[4], gm[3], gm[2])


def split_flux_lines(fp_in, fm_in, int recon=0):
    fp_arr = np.ascontiguousarray(fp_in, dtype=np.float64)
    fm_arr = np.ascontiguousarray(fm_in, dtype=np.float64)
    shape = fp_arr.shape
    last = shape[len(shape) - 1]
    lead = shape[:len(shape) - 1]
    cdef double[:, ::1] fp = fp_arr.reshape(-1, last)
    cdef double[:, ::1] fm = fm_arr.reshape(-1, last)
    cdef Py_ssize_t nl = fp.shape[0], npad = fp.shape[1], n = npad - 5, l, i, k
    out_arr = np.empty((nl, n))
    cdef double[:, ::1] out = out_arr
    cdef double gp[6]
    cdef double gm[6]
    with nogil:
        for l in range(nl):
            for i in range(n):
                for k in range(6):
                    gp[k] = fp[l, i + k]
                    gm[k] = fm[l, i + k]
                out[l, i] = _recon(&gp[0], &gm[0], recon)
    return out_arr.reshape(lead + (n,))


def euler_char_lines(U_in, lam_in, double gamma, int recon=0):
    U_arr = np.ascontiguousarray(U_in, dtype=np.float64)
    cdef Py_ssize_t m = U_arr.shape[0]
    shape = U_arr.shape
    last = shape[len(shape) - 1]
    lead = shape[1:len(shape) - 1]
    cdef double[:, :, ::1] U = U_arr.reshape(m, -1, last)
    cdef double[::1] lam = np.ascontiguousarray(lam_in, dtype=np.float64)
    cdef Py_ssize_t nl = U.shape[1], npad = U.shape[2], n = npad - 5
    if m != 3 and m != 4:
        raise ValueError("euler_char_lines expects 3 or 4 components")
    F_arr = np.empty((m, nl, npad))
    cdef double[:, :, ::1] F = F_arr
    out_arr = np.empty((m, nl, n))
    cdef double[:, :, ::1] out = out_arr
    cdef double R[4][4]
    cdef double L[4][4]
    cdef double gp[4][6]
    cdef double gm[4][6]
    cdef double h[4]
    cdef double rho, un, ut, q2, p, c, H, b1, b2, w, g, e
    cdef Py_ssize_t l, i, k, a, b, j
    cdef double gm1 = gamma - 1.0
    cdef int bad = 0
    with nogil:
        # nodal fluxes
        for l in range(nl):
            for j in range(npad):
                rho = U[0, l, j]
                un = U[1, l, j] / rho
                if m == 3:
                    p = gm1 * (U[2, l, j] - 0.5 * rho * un * un)
                    F[0, l, j] = U[1, l, j]
                    F[1, l, j] = U[1, l, j] * un + p
                    F[2, l, j] = (U[2, l, j] + p) * un
                else:
                    ut = U[2, l, j] / rho
                    p = gm1 * (U[3, l, j] - 0.5 * rho * (un * un + ut * ut))
                    F[0, l, j] = U[1, l, j]
                    F[1, l, j] = U[1, l, j] * un + p
                    F[2, l, j] = U[2, l, j] * un
                    F[3, l, j] = (U[3, l, j] + p) * un
        for l in range(nl):
            for i in range(n):
                rho = 0.5 * (U[0, l, i + 2] + U[0, l, i + 3])
                un = 0.5 * (U[1, l, i + 2] + U[1, l, i + 3]) / rho
                e = 0.5 * (U[m - 1, l, i + 2] + U[m - 1, l, i + 3])
                if m == 3:
                    ut = 0.0
                else:
                    ut = 0.5 * (U[2, l, i + 2] + U[2, l, i + 3]) / rho
                q2 = un * un + ut * ut
                p = gm1 * (e - 0.5 * rho * q2)
                if rho <= 0.0 or p <= 0.0:
                    bad = 1
                    break
                c = sqrt(gamma * p / rho)
                H = (e + p) / rho
                b1 = gm1 / (c * c)
                b2 = 0.5 * b1 * q2
                if m == 3:
                    R[0][0] = 1.0; R[0][1] = 1.0; R[0][2] = 1.0
                    R[1][0] = un - c; R[1][1] = un; R[1][2] = un + c
                    R[2][0] = H - un * c; R[2][1] = 0.5 * q2; R[2][2] = H + un * c
                    L[0][0] = 0.5 * (b2 + un / c); L[0][1] = -0.5 * (b1 * un + 1.0 / c); L[0][2] = 0.5 * b1
                    L[1][0] = 1.0 - b2; L[1][1] = b1 * un; L[1][2] = -b1
                    L[2][0] = 0.5 * (b2 - un / c); L[2][1] = -0.5 * (b1 * un - 1.0 / c); L[2][2] = 0.5 * b1
                else:
                    R[0][0] = 1.0; R[0][1] = 1.0; R[0][2] = 0.0; R[0][3] = 1.0
                    R[1][0] = un - c; R[1][1] = un; R[1][2] = 0.0; R[1][3] = un + c
                    R[2][0] = ut; R[2][1] = ut; R[2][2] = 1.0; R[2][3] = ut
                    R[3][0] = H - un * c; R[3][1] = 0.5 * q2; R[3][2] = ut; R[3][3] = H + un * c
                    L[0][0] = 0.5 * (b2 + un / c); L[0][1] = -0.5 * (b1 * un + 1.0 / c)
                    L[0][2] = -0.5 * b1 * ut; L[0][3] = 0.5 * b1
                    L[1][0] = 1.0 - b2; L[1][1] = b1 * un; L[1][2] = b1 * ut; L[1][3] = -b1
                    L[2][0] = -ut; L[2][1] = 0.0; L[2][2] = 1.0; L[2][3] = 0.0
                    L[3][0] = 0.5 * (b2 - un / c); L[3][1] = -0.5 * (b1 * un - 1.0 / c)
                    L[3][2] = -0.5 * b1 * ut; L[3][3] = 0.5 * b1
                for k in range(6):
                    for a in range(m):
                        w = 0.0
                        g = 0.0
                        for b in range(m):
                            w = w + L[a][b] * U[b, l, i + k]
                            g = g + L[a][b] * F[b, l, i + k]
                        gp[a][k] = 0.5 * (g + lam[a] * w)
                        gm[a][k] = 0.5 * (g - lam[a] * w)
                for a in range(m):
                    h[a] = _recon(&gp[a][0], &gm[a][0], recon)
                for a in range(m):
                    w = 0.0
                    for b in range(m):
                        w = w + R[a][b] * h[b]
                    out[a, l, i] = w
            if bad:
                break
    if bad:
        from ldirk3.physics import InvalidStateError
        raise InvalidStateError("nonpositive density or pressure in averaged state")
    return out_arr.reshape((m,) + lead + (n,))
