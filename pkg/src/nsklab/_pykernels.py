"""Numpy reference implementation of the time-stepping kernels.

Both functions return the index of the first offending node (non-positive or
non-finite volume, or a non-finite update), or -1 when the evaluation is
clean.  The compiled module ``_ckernels`` has identical signatures.
"""

import numpy as np


def _bad_index(v, h, v_floor):
    bad = ~(v > v_floor) | ~np.isfinite(v) | ~np.isfinite(h)
    if np.any(bad):
        return int(np.argmax(bad))
    return -1


def rhs(v, h, out_v, out_h, dx, sigma, d1, d2, gamma, alpha, nu, v_floor):
    """Semidiscrete shock-frame system written into ``out_v``, ``out_h``."""
    bad = _bad_index(v, h, v_floor)
    if bad >= 0:
        return bad
    p = v ** -gamma
    kv = v ** (gamma - alpha)
    kh = v ** (-alpha - 1.0)
    fv = 0.5 * (kv[1:] + kv[:-1]) * (p[1:] - p[:-1]) / dx
    fh = 0.5 * (kh[1:] + kh[:-1]) * (h[1:] - h[:-1]) / dx
    c2 = 0.5 / dx
    dv_c = (v[2:] - v[:-2]) * c2
    dh_c = (h[2:] - h[:-2]) * c2
    dp_c = (p[2:] - p[:-2]) * c2
    out_v[1:-1] = sigma * dv_c + dh_c - nu * d1 * (fv[1:] - fv[:-1]) / dx
    out_h[1:-1] = sigma * dh_c - dp_c + nu * d2 * (fh[1:] - fh[:-1]) / dx
    out_v[0] = out_v[-1] = 0.0
    out_h[0] = out_h[-1] = 0.0
    return -1


def rk4_step(v, h, dt, dx, sigma, d1, d2, gamma, alpha, nu, v_floor):
    """One classical Runge-Kutta step; returns ``(v_new, h_new, bad)``.

    On failure the input state is returned unchanged with ``bad >= 0``.
    """
    n = v.shape[0]
    kv = [np.empty(n) for _ in range(4)]
    kh = [np.empty(n) for _ in range(4)]
    args = (dx, sigma, d1, d2, gamma, alpha, nu, v_floor)
    weights = (0.5, 0.5, 1.0)
    vs, hs = v, h
    for stage in range(4):
        bad = rhs(vs, hs, kv[stage], kh[stage], *args)
        if bad >= 0:
            return v, h, bad
        if stage < 3:
            w = weights[stage] * dt
            vs = v + w * kv[stage]
            hs = h + w * kh[stage]
    c = dt / 6.0
    vn = v + c * (kv[0] + 2.0 * kv[1] + 2.0 * kv[2] + kv[3])
    hn = h + c * (kh[0] + 2.0 * kh[1] + 2.0 * kh[2] + kh[3])
    bad = _bad_index(vn, hn, v_floor)
    if bad >= 0:
        return v, h, bad
    return vn, hn, -1
