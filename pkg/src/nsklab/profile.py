"""Viscous-dispersive shock profiles in the (v, h) variables.

The traveling-wave ODE integrated once from the left end state is the planar
system

    v' = [sigma (v - v-) + (h - h-)] / (D1 v**beta p'(v))
    h' = [-sigma (h - h-) + p(v) - p(v-)] / (D2 v**(-alpha-1))

with ``D1 = tau1 b / gamma`` and ``D2 = tau2 b`` (``tau1`` and ``tau2 gamma``
for the default ``b = gamma``).  The left state is a saddle and the right
state a stable node, so the profile is the branch of the unstable manifold of
the left state, obtained by forward shooting.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from nsklab.constitutive import dpressure, pressure
from nsklab.endstates import mirror
from nsklab.errors import (DegenerateCapillarityError, DomainError,
                           NonConvergenceError)
from nsklab.fields import Grid, Interpolant, ddx

RTOL = 1e-10
ATOL = 1e-14
DELTA_REL = 1e-8


def _require_capillarity(params):
    if params.tau2 <= 0.0:
        raise DegenerateCapillarityError(
            "c = 0 makes the h-equation algebraic; the pure Navier-Stokes "
            "profile is not handled by this model")


def tw_rhs(v, h, shock, params):
    """Right-hand side ``(dv/dxi, dh/dxi)`` of the integrated profile ODE."""
    _require_capillarity(params)
    v = np.asarray(v, dtype=float)
    if np.any(v <= 0):
        raise DomainError("negative specific volume in the profile ODE")
    s = shock.sigma
    m = v ** (params.alpha + 1.0)
    a = s * (v - shock.v_minus) + (h - shock.h_minus)
    b = -s * (h - shock.h_minus) + v ** -params.gamma - shock.v_minus ** -params.gamma
    dv = -a * m / (params.diff_v * params.gamma)
    dh = b * m / params.diff_h
    return dv, dh


def tw_jacobian(v, h, shock, params):
    """Jacobian ``[[dF/dv, dF/dh], [dG/dv, dG/dh]]`` of :func:`tw_rhs`."""
    g, al = params.gamma, params.alpha
    s = shock.sigma
    m = v ** (al + 1.0)
    dm = (al + 1.0) * v ** al
    a = s * (v - shock.v_minus) + (h - shock.h_minus)
    b = -s * (h - shock.h_minus) + v ** -g - shock.v_minus ** -g
    k1 = 1.0 / (params.diff_v * g)
    k2 = 1.0 / params.diff_h
    fv = -(s * m + a * dm) * k1
    fh = -m * k1
    gv = (-g * v ** (-g - 1.0) * m + b * dm) * k2
    gh = -s * m * k2
    return fv, fh, gv, gh


def second_derivatives(v, h, shock, params):
    dv, dh = tw_rhs(v, h, shock, params)
    fv, fh, gv, gh = tw_jacobian(v, h, shock, params)
    return fv * dv + fh * dh, gv * dv + gh * dh


def unstable_direction(shock, params):
    """Positive eigenvalue and unit eigenvector (v-component > 0) at U-."""
    fv, fh, gv, gh = tw_jacobian(shock.v_minus, shock.h_minus, shock, params)
    jac = np.array([[fv, fh], [gv, gh]])
    w, vecs = np.linalg.eig(jac)
    k = int(np.argmax(w.real))
    if not w[k].real > 0:
        raise NonConvergenceError("left end state is not a saddle")
    e = vecs[:, k].real
    e = e / np.linalg.norm(e)
    if e[0] < 0:
        e = -e
    return float(w[k].real), e


@dataclass(frozen=True)
class Profile:
    grid: Grid
    shock: object
    params: object
    vt: np.ndarray
    ht: np.ndarray
    ut: np.ndarray
    dvt: np.ndarray
    dht: np.ndarray
    d2vt: np.ndarray
    d2ht: np.ndarray
    offset: float = 0.0
    _interp: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def xi(self):
        return self.grid.nodes

    def interpolant(self, name):
        """Cached cubic interpolants of the stored profile samples."""
        if name not in self._interp:
            x = self.grid.nodes
            table = {
                "v": (self.vt, self.dvt), "h": (self.ht, self.dht),
                "dv": (self.dvt, self.d2vt), "dh": (self.dht, self.d2ht),
                "d2h": (self.d2ht, None), "u": (self.ut, None),
            }
            vals, slopes = table[name]
            self._interp[name] = Interpolant(x, vals, slopes)
        return self._interp[name]

    def shifted(self, shift, grid=None):
        """Profile fields evaluated at ``xi - shift`` on ``grid``."""
        grid = self.grid if grid is None else grid
        x = grid.nodes - shift
        return {k: self.interpolant(k)(x) for k in ("v", "h", "dv", "dh", "d2h")}

    def boundary_error(self):
        s = self.shock
        return max(abs(self.vt[0] - s.v_minus), abs(self.ht[0] - s.h_minus),
                   abs(self.vt[-1] - s.v_plus), abs(self.ht[-1] - s.h_plus))

    def to_columns(self):
        return {"xi": self.xi, "v": self.vt, "h": self.ht, "u": self.ut,
                "dv": self.dvt, "dh": self.dht, "d2v": self.d2vt}


def slow_direction(shock, params):
    """Slowest decaying eigenpair at the right end state (a stable node)."""
    fv, fh, gv, gh = tw_jacobian(shock.v_plus, shock.h_plus, shock, params)
    w, vecs = np.linalg.eig(np.array([[fv, fh], [gv, gh]]))
    if np.any(np.abs(w.imag) > 0) or np.any(w.real >= 0):
        raise NonConvergenceError(
            "right end state is not a stable node; the profile would not be "
            "monotone")
    k = int(np.argmax(w.real))
    return float(w[k].real), vecs[:, k].real


def _pressure_jump(base, z, gamma):
    """``p(base + z) - p(base)`` without cancellation for small ``z``."""
    return base ** -gamma * np.expm1(-gamma * np.log1p(z / base))


def _deviation_rhs(zv, zh, base, shock, params):
    """:func:`tw_rhs` at ``base + z`` for an end state ``base``.

    The Rankine-Hugoniot relations remove the constant parts of the two
    numerators, so the residuals stay accurate relative to ``|z|`` near the
    end states where the orbit spends most of its length.
    """
    s = shock.sigma
    v = base[0] + zv
    m = v ** (params.alpha + 1.0)
    a = s * zv + zh
    b = -s * zh + _pressure_jump(base[0], zv, params.gamma)
    return -a * m / (params.diff_v * params.gamma), b * m / params.diff_h


def _scalar_rhs(base, shock, params):
    # lean closure for the integrator; same formulas as _deviation_rhs
    s, g, ap1 = shock.sigma, params.gamma, params.alpha + 1.0
    vb, hb = base
    pb = vb ** -g
    k1 = -1.0 / (params.diff_v * g)
    k2 = 1.0 / params.diff_h

    def rhs(_, z):
        v = vb + z[0]
        if v <= 0.0:
            raise DomainError("negative specific volume during shooting")
        m = v ** ap1
        dp = pb * math.expm1(-g * math.log1p(z[0] / vb))
        return [(s * z[0] + z[1]) * m * k1, (-s * z[1] + dp) * m * k2]
    return rhs


class _Orbit:
    """Unstable-manifold branch of U-, with ``xi = 0`` at the v-midpoint.

    The first stage is integrated as a deviation from U-, the second as a
    deviation from U+, so the tolerances act on the distance to the nearby
    end state.  Outside the integrated range the orbit is continued by the
    linearized flows at the two end states, which keeps it exponentially
    decaying and monotone on arbitrarily long domains.
    """

    def __init__(self, shock, params, delta_rel=DELTA_REL, budget=None):
        self.shock = shock
        dv_total = abs(shock.v_plus - shock.v_minus)
        self.mu, self.e = unstable_direction(shock, params)
        self.lam, self.e_slow = slow_direction(shock, params)
        self.delta = delta_rel * dv_total
        self.left = np.array([shock.v_minus, shock.h_minus])
        self.right = np.array([shock.v_plus, shock.h_plus])
        half = 0.5 * (shock.v_plus - shock.v_minus)
        if budget is None:
            budget = 60.0 / self.mu
        atol = ATOL * dv_total

        def midpoint(_, z):
            return z[0] - half
        midpoint.terminal = True
        midpoint.direction = 1

        first = solve_ivp(_scalar_rhs(self.left, shock, params),
                          (0.0, budget), self.delta * self.e, method="RK45",
                          rtol=RTOL, atol=atol, events=midpoint,
                          dense_output=True)
        if first.status != 1 or len(first.t_events[0]) == 0:
            raise NonConvergenceError(
                "orbit never reached the midpoint volume within the xi budget")
        self.s_mid = float(first.t_events[0][0])
        tol = 1e-9 * dv_total

        def near(_, z):
            return math.hypot(z[0], z[1]) - tol
        near.terminal = True
        near.direction = -1

        z_mid = first.y_events[0][0] + self.left - self.right
        span = 60.0 / abs(self.lam)
        second = solve_ivp(_scalar_rhs(self.right, shock, params),
                           (self.s_mid, self.s_mid + span), z_mid,
                           method="RK45", rtol=RTOL, atol=atol,
                           dense_output=True, events=near)
        self._first = first.sol
        self._second = second.sol
        self.s_end = float(second.t[-1])
        z_end = second.y[:, -1]
        # beyond the last step only the slow mode survives
        self.z_end = self.e_slow * (z_end @ self.e_slow)
        self.arrived = second.status == 1

    def deviations(self, xi):
        """``(z, right)``: deviation from the nearby end state at each
        ``xi`` and a mask of the nodes measured from U+."""
        s = np.asarray(xi, dtype=float) + self.s_mid
        z = np.empty((2,) + s.shape)
        left = s < 0.0
        mid1 = (s >= 0.0) & (s < self.s_mid)
        mid2 = (s >= self.s_mid) & (s <= self.s_end)
        right = s > self.s_end
        if np.any(left):
            z[:, left] = self.delta * self.e[:, None] * np.exp(self.mu * s[left])
        if np.any(mid1):
            z[:, mid1] = self._first(s[mid1])
        if np.any(mid2):
            z[:, mid2] = self._second(s[mid2])
        if np.any(right):
            z[:, right] = self.z_end[:, None] * np.exp(
                self.lam * (s[right] - self.s_end))
        return z, s >= self.s_mid

    def __call__(self, xi):
        """State ``(v, h)`` at profile coordinate ``xi``."""
        z, on_right = self.deviations(xi)
        return z + np.where(on_right, self.right[:, None], self.left[:, None])


def _sample(orbit, grid, shock, params):
    z, on_right = orbit.deviations(grid.nodes)
    base = np.where(on_right, orbit.right[:, None], orbit.left[:, None])
    v, h = base + z
    dv, dh = np.empty_like(v), np.empty_like(h)
    for mask, b in ((~on_right, orbit.left), (on_right, orbit.right)):
        dv[mask], dh[mask] = _deviation_rhs(z[0, mask], z[1, mask], b, shock,
                                            params)
    fv, fh, gv, gh = tw_jacobian(v, h, shock, params)
    return v, h, dv, dh, fv * dv + fh * dh, gv * dv + gh * dh


def compute_profile(shock, params, grid=None, n=2001, scale=14.0,
                    delta_rel=DELTA_REL):
    """Shock profile connecting ``shock``'s end states, sampled on ``grid``.

    The default grid is ``[-14/eps, 14/eps]``, wide enough for the
    exponential tails to reach the end states within 1e-6.  A 1-shock is
    produced from the mirrored 2-shock.
    """
    _require_capillarity(params)
    if shock.eps <= 0:
        raise DomainError("profile requires a positive amplitude")
    if grid is None:
        grid = Grid.for_amplitude(shock.eps, n, scale)
    if shock.family == 1:
        twin = mirror(shock, params)
        p2 = compute_profile(twin, params, grid, delta_rel=delta_rel)
        rev = slice(None, None, -1)
        v, h = p2.vt[rev], -p2.ht[rev]
        dv, dh = -p2.dvt[rev], p2.dht[rev]
        d2v, d2h = p2.d2vt[rev], -p2.d2ht[rev]
    else:
        orbit = _Orbit(shock, params, delta_rel)
        if not orbit.arrived:
            raise NonConvergenceError(
                "orbit failed to enter the 1e-6 ball of the right state")
        v, h, dv, dh, d2v, d2h = _sample(orbit, grid, shock, params)
    if np.any(v <= 0):
        raise DomainError("negative specific volume in the computed profile")
    u = h + params.tau1 * params.b * dv / v ** (params.alpha + 1.0)
    return Profile(grid, shock, params, v, h, u, dv, dh, d2v, d2h)


def vs_residual(profile, grid=None):
    """Pointwise residual of the unintegrated traveling-wave equations.

    All derivatives are discrete (:func:`ddx`) so the residual measures the
    O(dx**2) consistency of the sampled profile.
    """
    p = profile.params
    g = grid or profile.grid
    v, h = profile.vt, profile.ht
    s = profile.shock.sigma
    pv = v ** -p.gamma
    r1 = (-s * ddx(v, g) - ddx(h, g)
          + p.diff_v * ddx(v ** p.beta * ddx(pv, g), g))
    r2 = (-s * ddx(h, g) + ddx(pv, g)
          - p.diff_h * ddx(v ** (-p.alpha - 1.0) * ddx(h, g), g))
    return r1, r2


def shock0_residual(profile):
    """Residual of the original (v, u) traveling-wave system.

    Uses the reconstructed ``u``; the momentum equation is checked in its
    once-integrated form so only two discrete derivatives are stacked.
    """
    p = profile.params
    g = profile.grid
    sh = profile.shock
    v, u = profile.vt, profile.ut
    s = sh.sigma
    mu = p.b * v ** -p.alpha
    kap = p.c * mu * mu * v ** 3
    dkap = p.c * p.b ** 2 * (3.0 - 2.0 * p.alpha) * v ** (2.0 - 2.0 * p.alpha)
    vx = ddx(v, g)
    vxx = ddx(vx, g)
    r1 = -s * vx - ddx(u, g)
    # -s (u - u-) + p(v) - p(v-) = mu u'/v + kappa(-v''/v^5 + 5 v'^2/(2 v^6))
    #                               - kappa' v'^2 / (2 v^5)
    lhs = -s * (u - sh.u_minus) + v ** -p.gamma - sh.v_minus ** -p.gamma
    rhs = (mu * ddx(u, g) / v
           + kap * (-vxx / v ** 5 + 2.5 * vx ** 2 / v ** 6)
           - dkap * vx ** 2 / (2.0 * v ** 5))
    return r1, lhs - rhs


def tail_slopes(profile, fraction=0.25):
    """Slopes of ``log v'`` against ``|xi|`` over the outer ``fraction`` of
    each half-domain (negative for exponential decay)."""
    x = profile.xi
    L = profile.grid.half_length
    dv = np.abs(profile.dvt)
    out = []
    for mask in (x <= -(1 - fraction) * L, x >= (1 - fraction) * L):
        ok = mask & (dv > 0)
        slope = np.polyfit(np.abs(x[ok]), np.log(dv[ok]), 1)[0]
        out.append(float(slope))
    return tuple(out)


def validate_profile(profile):
    """Report of the small-shock properties of a computed 2-shock profile."""
    p = profile.params
    sh = profile.shock
    eps = sh.eps
    x = profile.xi
    dv, dh = profile.dvt, profile.dht
    dp = -p.gamma * profile.vt ** (-p.gamma - 1.0) * dv
    adv = np.abs(dv)
    core = np.abs(x) <= 1.0 / eps
    sign = 1.0 if sh.family == 2 else -1.0
    left, right = tail_slopes(profile)
    ratio1 = np.abs(sh.sigma_star * sign * dv + dh) / (eps * adv)
    ratio2 = np.abs(sh.sigma_star * sign * dh - dp) / (eps * adv)
    return {
        "monotone_v": bool(np.all(sign * dv > 0)),
        "monotone_h": bool(np.all(dh < 0)),
        "boundary_error": profile.boundary_error(),
        "midpoint_error": float(abs(profile.interpolant("v")(0.0)
                                    - 0.5 * (sh.v_minus + sh.v_plus))),
        "tail_slope_left": left,
        "tail_slope_right": right,
        "min_dv_core": float(np.min(adv[core])),
        "min_dv_core_over_eps2": float(np.min(adv[core]) / eps ** 2),
        "ratio_vh": float(np.max(ratio1)),
        "ratio_hp": float(np.max(ratio2)),
        "ratio_d2v": float(np.max(np.abs(profile.d2vt) / (eps * adv))),
        "ratio_d2h": float(np.max(np.abs(profile.d2ht) / (eps * adv))),
    }
