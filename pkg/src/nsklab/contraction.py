"""Weighted relative entropy, shift dynamics and the functional inventory.

Every functional is a trapezoid integral over ``[-L, L]`` in the comparison
arrangement: the solution is kept on its own nodes while the profile and the
weight are evaluated at ``xi - X``.  By the change of variables
``xi -> xi + X`` this equals evaluating ``U(xi + X)`` against the unshifted
profile.  Derivatives of perturbations are discrete (:func:`ddx`) and
derivatives of profile factors come from the stored exact samples.

The diffusion prefactors ``tau1`` and ``tau2 gamma`` of the textbook form are
``params.diff_v`` and ``params.diff_h`` here, which coincide for ``b = gamma``.
"""

import math
import warnings
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from nsklab.constitutive import dpressure, p_rel, pressure, q_rel, volume_from_pressure
from nsklab.errors import ConfigError
from nsklab.fields import ddx, integrate
from nsklab.profile import tail_slopes

DELTA3_DEFAULT = 0.1
DELTA0_DEFAULT = 0.4


def default_lambda(eps, delta0=DELTA0_DEFAULT):
    """``sqrt(eps)`` clamped into ``[eps / delta0, delta0]``.

    When that interval is empty (``eps > delta0**2``) ``sqrt(eps)`` is
    returned with a warning.
    """
    lo, hi = eps / delta0, delta0
    lam = math.sqrt(eps)
    if lo > hi:
        warnings.warn(f"no admissible weight strength for eps={eps} and "
                      f"delta0={delta0}; using sqrt(eps)", stacklevel=2)
        return lam
    return min(max(lam, lo), hi)


@dataclass(frozen=True)
class WeightSpec:
    lam: float
    eps: float
    profile: object

    def __post_init__(self):
        if self.lam < 0:
            raise ConfigError("weight strength lambda must be non-negative")
        if not self.eps > 0:
            raise ConfigError("eps must be positive")

    @classmethod
    def for_profile(cls, profile, lam=None, delta0=DELTA0_DEFAULT):
        eps = profile.shock.eps
        return cls(default_lambda(eps, delta0) if lam is None else lam, eps,
                   profile)


def _weight_from(vt, dvt, spec):
    sh = spec.profile.shock
    params = spec.profile.params
    k = spec.lam / spec.eps
    a = 1.0 - k * (pressure(vt, params) - pressure(sh.v_minus, params))
    da = -k * dpressure(vt, params) * dvt
    return a, da


def weight_a(xi, spec):
    """Weight ``a(xi)`` and ``a'(xi)``."""
    prof = spec.profile
    xi = np.asarray(xi, dtype=float)
    vt = prof.interpolant("v")(xi)
    dvt = prof.interpolant("dv")(xi)
    return _weight_from(vt, dvt, spec)


def phi_eps(y, eps):
    """Saturated linear feedback: ``-y / eps**4`` clipped to ``+-1/eps**2``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    e2 = eps * eps
    return float(np.clip(-y / (e2 * e2), -1.0 / e2, 1.0 / e2))


@dataclass(frozen=True)
class FunctionalReport:
    X: float
    E_weighted: float
    Y: float
    Y_g: float
    Y_b: float
    Y_l: float
    Y_s: float
    J_bad: float
    J_good: float
    P1: float
    P2: float
    B1_plus: float
    B1_minus: float
    B2: float
    G_h_minus: float
    G_h_plus: float
    G_p: float
    D_h: float
    D_p: float
    I_gY: float
    I_1: float
    I_2: float
    Xdot: float
    boundary_tail_bound: float

    @property
    def B_delta(self):
        return self.B1_plus + self.B1_minus + self.B2

    @property
    def G_delta(self):
        return self.G_h_minus + self.G_h_plus + self.G_p + self.D_h + self.D_p

    @property
    def bad_sum(self):
        """``2|J_bad| + 2|P1| + 2|P2|``."""
        return 2.0 * abs(self.J_bad) + 2.0 * abs(self.P1) + 2.0 * abs(self.P2)

    def rhs(self):
        """Right side of the relative-entropy evolution identity."""
        return self.Xdot * self.Y + self.J_bad + self.P1 + self.P2 - self.J_good

    def as_dict(self):
        return asdict(self)


REPORT_FIELDS = tuple(f.name for f in fields(FunctionalReport))


def _profile_at(profile, grid, shift):
    return profile.shifted(shift, grid)


def _decay_rate(profile):
    return min(abs(s) for s in tail_slopes(profile))


def truncate_v(v, profile, k, shift=0.0, grid=None):
    """Truncations ``(v_k, v_s, v_b)`` through the pressure difference.

    ``p(v_k) - p(vt)`` is ``p(v) - p(vt)`` clamped to ``[-k, k]``; ``v_s``
    clamps only from below at ``-k`` (cuts large volumes) and ``v_b`` only
    from above at ``k`` (cuts small volumes).
    """
    if not k > 0:
        raise ValueError("truncation level must be positive")
    grid = profile.grid if grid is None else grid
    params = profile.params
    vt = _profile_at(profile, grid, shift)["v"]
    pt = pressure(vt, params)
    w = pressure(v, params) - pt

    def back(dw):
        return volume_from_pressure(pt + dw, params)
    return (back(np.clip(w, -k, k)), back(np.maximum(w, -k)),
            back(np.minimum(w, k)))


def truncate_h(h, profile, delta3, shift=0.0, grid=None):
    grid = profile.grid if grid is None else grid
    ht = _profile_at(profile, grid, shift)["h"]
    return ht + np.clip(np.asarray(h, dtype=float) - ht, -delta3, delta3)


def _in_region(v, vt, dpt, ht_x, a, da, sigma, grid, params):
    w = pressure(v, params) - pressure(vt, params)
    q = q_rel(v, vt, params)
    i_gy = integrate(-da * w * w / (2.0 * sigma ** 2) - da * q
                     - a * dpt * (v - vt) + a * ht_x * w / sigma, grid)
    i_1 = integrate(da * w * w, grid) / (2.0 * sigma)
    return i_gy, i_1


def evaluate_functionals(state, profile, spec, X=0.0,
                         delta3=DELTA3_DEFAULT, xdot=None):
    """All contraction functionals of ``state`` at shift ``X``.

    ``xdot`` defaults to the shift law :func:`shift_rate` applied to the
    computed values.
    """
    grid = state.grid
    params = profile.params
    sigma = profile.shock.sigma
    d1, d2 = params.diff_v, params.diff_h
    v, h = np.asarray(state.v), np.asarray(state.h)
    prof = _profile_at(profile, grid, X)
    vt, ht, dvt, dht, d2ht = prof["v"], prof["h"], prof["dv"], prof["dh"], prof["d2h"]
    a, da = _weight_from(vt, dvt, spec)

    p_v = pressure(v, params)
    p_t = pressure(vt, params)
    dpt = dpressure(vt, params) * dvt  # p(vt)'
    w = p_v - p_t
    z = h - ht
    q = q_rel(v, vt, params)
    pr = p_rel(v, vt, params)
    eta = 0.5 * z * z + q
    dw = ddx(w, grid)
    dz = ddx(z, grid)
    vb, vtb = v ** params.beta, vt ** params.beta
    k, kt = v ** (-params.alpha - 1.0), vt ** (-params.alpha - 1.0)
    dk = ddx(k - kt, grid)

    def I(f):
        return integrate(f, grid)

    E = I(a * eta)
    Y = I(-da * eta) + I(a * (-dpt * (v - vt) + dht * z))
    B2 = sigma * I(a * dvt * pr)
    J_bad = I(da * w * z) + B2
    P1 = (-d1 * I(da * vb * w * dw) - d1 * I(da * w * (vb - vtb) * dpt)
          - d1 * I(a * dw * (vb - vtb) * dpt))
    P2 = (-d2 * I(da * k * z * dz) + d2 * I(a * z * (k - kt) * d2ht)
          + d2 * I(a * z * dk * dht))
    D_p = d1 * I(a * vb * dw * dw)
    D_h = d2 * I(a * k * dz * dz)
    G_p = sigma * I(da * q)
    J_good = G_p + 0.5 * sigma * I(da * z * z) + D_p + D_h

    om = w <= delta3
    oc = ~om
    s = z - w / sigma
    B1_plus = I(np.where(om, da * w * w, 0.0)) / (2.0 * sigma)
    B1_minus = I(np.where(oc, da * w * z, 0.0))
    G_h_plus = 0.5 * sigma * I(np.where(om, da * s * s, 0.0))
    G_h_minus = 0.5 * sigma * I(np.where(oc, da * z * z, 0.0))
    Y_g = I(np.where(om, -da * w * w / (2.0 * sigma ** 2) - da * q
                     - a * dpt * (v - vt) + a * dht * w / sigma, 0.0))
    Y_b = I(np.where(om, -0.5 * da * s * s - da * w * s / sigma, 0.0))
    Y_l = I(np.where(om, a * dht * s, 0.0))
    Y_s = I(np.where(oc, -da * q - a * dpt * (v - vt) - 0.5 * da * z * z
                     + a * dht * z, 0.0))

    vbar = truncate_v(v, profile, delta3, X, grid)[0]
    I_gY, I_1 = _in_region(vbar, vt, dpt, dht, a, da, sigma, grid, params)
    I_2 = sigma * I(a * dvt * p_rel(vbar, vt, params))

    if xdot is None:
        xdot = shift_rate_values(Y, J_bad, P1, P2, spec.eps)
    tail = (abs(a[0] * eta[0]) + abs(a[-1] * eta[-1])) / _decay_rate(profile)
    return FunctionalReport(
        X=float(X), E_weighted=E, Y=Y, Y_g=Y_g, Y_b=Y_b, Y_l=Y_l, Y_s=Y_s,
        J_bad=J_bad, J_good=J_good, P1=P1, P2=P2, B1_plus=B1_plus,
        B1_minus=B1_minus, B2=B2, G_h_minus=G_h_minus, G_h_plus=G_h_plus,
        G_p=G_p, D_h=D_h, D_p=D_p, I_gY=I_gY, I_1=I_1, I_2=I_2,
        Xdot=float(xdot), boundary_tail_bound=float(tail))


def shift_rate_values(Y, J_bad, P1, P2, eps):
    return phi_eps(Y, eps) * (2.0 * abs(J_bad) + 2.0 * abs(P1)
                              + 2.0 * abs(P2) + 1.0)


def shift_rate(report, eps):
    """``Xdot = Phi_eps(Y) (2|J_bad| + 2|P1| + 2|P2| + 1)``."""
    return shift_rate_values(report.Y, report.J_bad, report.P1, report.P2, eps)


@dataclass(frozen=True)
class ShiftState:
    X: float = 0.0
    t: float = 0.0
    xdot: float = 0.0


def advance_shift(shift, dt, report, eps):
    """Explicit Euler update of the shift with the PDE step ``dt``."""
    xdot = shift_rate(report, eps)
    return ShiftState(shift.X + dt * xdot, shift.t + dt, xdot)


def xdoty_holds(report, eps, rtol=1e-12):
    """Check the decay inequality satisfied by the feedback term ``Xdot Y``."""
    lhs = report.Xdot * report.Y
    f = report.bad_sum
    if abs(report.Y) >= eps * eps:
        bound = -f
    else:
        bound = -report.Y ** 2 / eps ** 4
    return lhs <= bound + rtol * (abs(bound) + abs(lhs) + 1e-300)


def shift_bound_holds(report, eps):
    """``|Xdot| <= (1/eps**2)(bad_sum + 1)``, exact for the implemented law."""
    return abs(report.Xdot) <= (report.bad_sum + 1.0) / eps ** 2 * (1.0 + 1e-15)


def weight_scale_bounds(spec, grid=None):
    """Range of ``a' / ((lambda/eps) |vt'|)`` over the nodes."""
    prof = spec.profile
    grid = prof.grid if grid is None else grid
    _, da = weight_a(grid.nodes, spec)
    dv = np.abs(prof.interpolant("dv")(grid.nodes))
    ok = dv > 0
    ratio = da[ok] / (spec.lam / spec.eps * dv[ok])
    return float(ratio.min()), float(ratio.max())


@dataclass
class ContractionMonitor:
    """Solver hook that advances the shift and records the functionals.

    Must be called with every step (``monitor_stride = 1``) for the shift
    ODE to be integrated with the PDE step.
    """

    profile: object
    spec: WeightSpec
    delta3: float = DELTA3_DEFAULT
    shift: ShiftState = field(default_factory=ShiftState)
    times: list = field(default_factory=list)
    reports: list = field(default_factory=list)
    xdoty_ok: list = field(default_factory=list)
    shift_bound_ok: list = field(default_factory=list)

    def __call__(self, state):
        eps = self.spec.eps
        if self.reports:
            dt = state.t - self.times[-1]
            self.shift = advance_shift(self.shift, dt, self.reports[-1], eps)
        rep = evaluate_functionals(state, self.profile, self.spec,
                                   self.shift.X, self.delta3)
        self.times.append(state.t)
        self.reports.append(rep)
        self.xdoty_ok.append(xdoty_holds(rep, eps))
        self.shift_bound_ok.append(shift_bound_holds(rep, eps))

    def series(self, name):
        return np.array([getattr(r, name) for r in self.reports])

    def summary(self):
        """Decay ledger of the run."""
        t = np.asarray(self.times)
        E = self.series("E_weighted")
        tail = self.series("boundary_tail_bound")
        bad = np.array([r.bad_sum for r in self.reports])
        diss_p = np.trapezoid(self.series("G_p"), t) if t.size > 1 else 0.0
        diss_d = (np.trapezoid(self.series("D_h") + self.series("D_p"), t)
                  if t.size > 1 else 0.0)
        incr = np.diff(E)
        slack = 1e-6 * E[0] + tail[1:] if t.size > 1 else np.zeros(0)
        return {
            "E0": float(E[0]), "E_final": float(E[-1]),
            "max_increment": float(incr.max()) if incr.size else 0.0,
            "monotone_with_slack": bool(np.all(incr <= slack)),
            "cumulative_G_p": float(diss_p),
            "cumulative_D": float(diss_d),
            "bad_sum_integral": float(np.trapezoid(bad, t)) if t.size > 1 else 0.0,
            "xdoty_all": bool(all(self.xdoty_ok)),
            "shift_bound_all": bool(all(self.shift_bound_ok)),
            "X_final": float(self.shift.X),
            "max_tail_bound": float(tail.max()),
        }

    def identity_gap(self):
        """Per-step defect between the finite-difference ``dE/dt`` and the
        evolution identity (trapezoid in time, Euler shift increment)."""
        t = np.asarray(self.times)
        E = self.series("E_weighted")
        gaps = []
        for n in range(len(t) - 1):
            r0, r1 = self.reports[n], self.reports[n + 1]
            dt = t[n + 1] - t[n]
            f0 = r0.J_bad + r0.P1 + r0.P2 - r0.J_good
            f1 = r1.J_bad + r1.P1 + r1.P2 - r1.J_good
            pred = r0.Xdot * 0.5 * (r0.Y + r1.Y) + 0.5 * (f0 + f1)
            gaps.append((E[n + 1] - E[n]) / dt - pred)
        return np.asarray(gaps)

    def lhs_ledger(self, delta0=DELTA0_DEFAULT):
        """Weighted entropy plus the dissipation integrals, per time."""
        t = np.asarray(self.times)
        lam, eps = self.spec.lam, self.spec.eps
        gp = np.abs(self.series("G_p"))
        dd = self.series("D_h") + self.series("D_p")
        acc = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(t) * (
            (delta0 * eps / lam * gp + delta0 * dd)[1:]
            + (delta0 * eps / lam * gp + delta0 * dd)[:-1]))])
        return self.series("E_weighted") + acc
