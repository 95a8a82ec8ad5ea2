# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled time-stepping kernels (same contract as ``_pykernels``)."""

import numpy as np
from libc.math cimport exp, isfinite, log


cdef Py_ssize_t _bad_index(const double[::1] v, const double[::1] h,
                           double v_floor) noexcept nogil:
    cdef Py_ssize_t i
    for i in range(v.shape[0]):
        if not (v[i] > v_floor) or not isfinite(v[i]) or not isfinite(h[i]):
            return i
    return -1


cdef Py_ssize_t _rhs(const double[::1] v, const double[::1] h,
                     double[::1] out_v, double[::1] out_h, double[::1] p,
                     double[::1] kv, double[::1] kh, double dx, double sigma,
                     double d1, double d2, double gamma, double alpha,
                     double nu, double v_floor) noexcept nogil:
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t i
    cdef double lv, pg, pa
    cdef bint unit_gamma = gamma == 1.0
    cdef bint zero_alpha = alpha == 0.0
    cdef double c2 = 0.5 / dx
    cdef double idx2 = 1.0 / (dx * dx)
    cdef double fl_v, fr_v, fl_h, fr_h
    cdef Py_ssize_t bad = _bad_index(v, h, v_floor)
    if bad >= 0:
        return bad
    # v**-gamma, v**(gamma - alpha), v**(-alpha - 1) from one logarithm
    for i in range(n):
        lv = log(v[i])
        pg = 1.0 / v[i] if unit_gamma else exp(-gamma * lv)
        pa = 1.0 if zero_alpha else exp(-alpha * lv)
        p[i] = pg
        kv[i] = pa / pg
        kh[i] = pa / v[i]
    fl_v = 0.5 * (kv[0] + kv[1]) * (p[1] - p[0])
    fl_h = 0.5 * (kh[0] + kh[1]) * (h[1] - h[0])
    for i in range(1, n - 1):
        fr_v = 0.5 * (kv[i] + kv[i + 1]) * (p[i + 1] - p[i])
        fr_h = 0.5 * (kh[i] + kh[i + 1]) * (h[i + 1] - h[i])
        out_v[i] = (sigma * (v[i + 1] - v[i - 1]) * c2
                    + (h[i + 1] - h[i - 1]) * c2
                    - nu * d1 * (fr_v - fl_v) * idx2)
        out_h[i] = (sigma * (h[i + 1] - h[i - 1]) * c2
                    - (p[i + 1] - p[i - 1]) * c2
                    + nu * d2 * (fr_h - fl_h) * idx2)
        fl_v = fr_v
        fl_h = fr_h
    out_v[0] = 0.0
    out_h[0] = 0.0
    out_v[n - 1] = 0.0
    out_h[n - 1] = 0.0
    return -1


def rhs(const double[::1] v, const double[::1] h, double[::1] out_v,
        double[::1] out_h, double dx, double sigma, double d1, double d2,
        double gamma, double alpha, double nu, double v_floor):
    cdef Py_ssize_t n = v.shape[0]
    cdef double[::1] p = np.empty(n)
    cdef double[::1] kv = np.empty(n)
    cdef double[::1] kh = np.empty(n)
    cdef Py_ssize_t bad
    with nogil:
        bad = _rhs(v, h, out_v, out_h, p, kv, kh, dx, sigma, d1, d2, gamma,
                   alpha, nu, v_floor)
    return bad


def rk4_step(const double[::1] v, const double[::1] h, double dt,
             double dx, double sigma, double d1, double d2, double gamma,
             double alpha, double nu, double v_floor):
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t i, stage, bad = -1
    k_v_np = np.empty((4, n))
    k_h_np = np.empty((4, n))
    vn_np = np.empty(n)
    hn_np = np.empty(n)
    cdef double[:, ::1] k_v = k_v_np
    cdef double[:, ::1] k_h = k_h_np
    cdef double[::1] vs = np.empty(n)
    cdef double[::1] hs = np.empty(n)
    cdef double[::1] vn = vn_np
    cdef double[::1] hn = hn_np
    cdef double[::1] p = np.empty(n)
    cdef double[::1] kv = np.empty(n)
    cdef double[::1] kh = np.empty(n)
    cdef double w
    cdef double c = dt / 6.0
    with nogil:
        for stage in range(4):
            if stage == 0:
                bad = _rhs(v, h, k_v[0], k_h[0], p, kv, kh, dx, sigma, d1,
                           d2, gamma, alpha, nu, v_floor)
            else:
                bad = _rhs(vs, hs, k_v[stage], k_h[stage], p, kv, kh, dx,
                           sigma, d1, d2, gamma, alpha, nu, v_floor)
            if bad >= 0:
                break
            if stage < 3:
                w = (1.0 if stage == 2 else 0.5) * dt
                for i in range(n):
                    vs[i] = v[i] + w * k_v[stage, i]
                    hs[i] = h[i] + w * k_h[stage, i]
        if bad < 0:
            for i in range(n):
                vn[i] = v[i] + c * (k_v[0, i] + 2.0 * k_v[1, i]
                                    + 2.0 * k_v[2, i] + k_v[3, i])
                hn[i] = h[i] + c * (k_h[0, i] + 2.0 * k_h[1, i]
                                    + 2.0 * k_h[2, i] + k_h[3, i])
            bad = _bad_index(vn, hn, v_floor)
    if bad >= 0:
        return np.asarray(v), np.asarray(h), bad
    return vn_np, hn_np, bad
