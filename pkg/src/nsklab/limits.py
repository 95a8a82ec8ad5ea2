"""Vanishing viscosity-capillarity experiments by exact rescaling.

A solution ``U`` of the unit system gives ``U_nu(t, x) = U(t/nu, x/nu)``, a
solution of the system with viscosity ``nu`` and capillarity ``nu**2``.  In
the shock frame used by the solver this reads
``U_nu(t, x) = U_xi(t/nu, (x - sigma t)/nu)``, so one unit run serves a whole
ladder of ``nu`` values.
"""

from dataclasses import dataclass, field

import numpy as np

from nsklab.constitutive import q_rel, rel_entropy_density
from nsklab.contraction import ContractionMonitor, WeightSpec
from nsklab.endstates import lax_ok
from nsklab.errors import ConfigError, DomainError
from nsklab.fields import Interpolant, ddx, integrate
from nsklab.solver import SolverConfig, State, simulate

WINDOW = (-2.0, 2.0)
HORIZON = 1.0
NU_LADDER = (0.4, 0.2, 0.1, 0.05)


@dataclass(frozen=True)
class RiemannShock:
    """Piecewise-constant entropy shock ``(v-, u-)`` | ``(v+, u+)``."""

    shock: object

    def __post_init__(self):
        if not lax_ok(self.shock):
            raise ConfigError("end states violate the Lax ordering")

    @property
    def sigma(self):
        return self.shock.sigma

    def at(self, x, center):
        """``(vbar, ubar)`` at ``x`` for a discontinuity located at ``center``."""
        x = np.asarray(x, dtype=float)
        s = self.shock
        left = x < center
        return (np.where(left, s.v_minus, s.v_plus),
                np.where(left, s.u_minus, s.u_plus))

    def lab_center(self, t):
        return self.sigma * t


def _edge_value(x, f, at, side):
    """Linear extrapolation of ``f`` to ``at`` from the two nearest nodes on
    one side (left: ``x < at``; right: ``x >= at``)."""
    idx = np.flatnonzero(x < at) if side == "left" else np.flatnonzero(x >= at)
    if idx.size == 0:
        return float(np.interp(at, x, f))
    if idx.size == 1:
        return float(f[idx[0]])
    i, j = (idx[-2], idx[-1]) if side == "left" else (idx[0], idx[1])
    return float(f[i] + (f[j] - f[i]) * (at - x[i]) / (x[j] - x[i]))


def _split_integral(x, f_left, f_right, center):
    """``int_{x0}^{center} f_left + int_{center}^{x1} f_right`` by trapezoid.

    Each piece is closed at the jump point with a one-sided extrapolation
    from its own side, so sampled step data integrate exactly.
    """
    x = np.asarray(x, dtype=float)
    c = float(np.clip(center, x[0], x[-1]))
    total = 0.0
    if c > x[0]:
        inside = x < c
        xs = np.concatenate([x[inside], [c]])
        fs = np.concatenate([f_left[inside], [_edge_value(x, f_left, c, "left")]])
        total += float(np.trapezoid(fs, xs))
    if c < x[-1]:
        inside = x > c
        xs = np.concatenate([[c], x[inside]])
        fs = np.concatenate([[_edge_value(x, f_right, c, "right")], f_right[inside]])
        total += float(np.trapezoid(fs, xs))
    return total


def dq_ac(v, riemann, center, x, params):
    """``int Q(v | vbar(. - center)) dx`` over the nodes ``x``.

    Only absolutely continuous ``v`` (nodal samples) is supported; singular
    measures have no representation here.
    """
    v = np.asarray(v, dtype=float)
    if np.any(v <= 0):
        raise DomainError("dq_ac needs a positive volume field")
    s = riemann.shock
    return _split_integral(x, q_rel(v, s.v_minus, params),
                           q_rel(v, s.v_plus, params), center)


def l1_window_distance(v, riemann, center, x):
    s = riemann.shock
    v = np.asarray(v, dtype=float)
    return _split_integral(x, np.abs(v - s.v_minus), np.abs(v - s.v_plus),
                           center)


def kinetic_part(u, riemann, center, x):
    s = riemann.shock
    u = np.asarray(u, dtype=float)
    return _split_integral(x, 0.5 * (u - s.u_minus) ** 2,
                           0.5 * (u - s.u_plus) ** 2, center)


@dataclass
class UnitRun:
    """A unit-system run with snapshots at prescribed times."""

    times: np.ndarray
    states: list
    shift_times: np.ndarray
    shift_values: np.ndarray
    monitor: object = None

    def state_at(self, t, tol=1e-9):
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > tol * max(1.0, abs(t)):
            raise ConfigError(f"unit run has no snapshot at t={t}")
        return self.states[k]

    def shift_at(self, t):
        return float(np.interp(t, self.shift_times, self.shift_values))


def unit_run(initial, params, shock, times, config=None, profile=None,
             lam=None, delta3=0.1):
    """Integrate the unit system, stopping exactly at every time in ``times``.

    With a ``profile`` the contraction monitor runs alongside and provides
    the shift ``X(t)``; otherwise the shift is zero.
    """
    config = config or SolverConfig()
    times = np.unique(np.asarray(times, dtype=float))
    mon = None
    if profile is not None:
        spec = WeightSpec.for_profile(profile, lam)
        mon = ContractionMonitor(profile, spec, delta3)
    state = initial
    snaps = []
    first = True
    for t in times:
        if t < state.t - 1e-12:
            raise ConfigError("snapshot times must not precede the initial state")
        if t > state.t:
            cfg = SolverConfig(cfl=config.cfl, v_floor=config.v_floor,
                               t_end=float(t), stride=10 ** 9, nu=config.nu,
                               dt=config.dt)
            traj = simulate(state, params, shock, cfg, monitor=mon,
                            monitor_initial=first)
            state = traj.final
        elif first and mon is not None:
            mon(state)
        first = False
        snaps.append(state)
    if mon is not None:
        st, sx = np.asarray(mon.times), np.array([r.X for r in mon.reports])
    else:
        st, sx = times, np.zeros_like(times)
    return UnitRun(times, snaps, st, sx, mon)


@dataclass(frozen=True)
class MacroSnapshot:
    t: float
    x: np.ndarray
    v: np.ndarray
    h: np.ndarray
    u: np.ndarray


def rescale_run(run, nu, t, x, params, shock):
    """Macroscopic fields ``U_nu(t, x)`` read off the unit run.

    ``u`` is recovered from ``h`` by the effective-velocity inverse of the
    ``nu``-scaled system, ``u = h + nu tau1 b v**(-alpha-1) v_x``.
    """
    if not nu > 0:
        raise ConfigError("nu must be positive")
    state = run.state_at(t / nu)
    grid = state.grid
    x = np.asarray(x, dtype=float)
    xi = (x - shock.sigma * t) / nu
    if xi.min() < grid.nodes[0] - 1e-9 or xi.max() > grid.nodes[-1] + 1e-9:
        raise ConfigError(
            f"unit domain [-{grid.half_length:g}, {grid.half_length:g}] does "
            f"not cover the window at nu={nu}")
    dv_unit = ddx(state.v, grid)
    v = Interpolant(grid.nodes, state.v, dv_unit)(xi)
    h = Interpolant(grid.nodes, state.h, ddx(state.h, grid))(xi)
    dv_xi = Interpolant(grid.nodes, dv_unit)(xi)
    # d/dx = (1/nu) d/dxi, so nu * v_x = v_xi
    u = h + params.tau1 * params.b * v ** (-params.alpha - 1.0) * dv_xi
    return MacroSnapshot(float(t), x, v, h, u)


def scaled_profile(profile, nu, x):
    """``(vt, ht, ut)((x)/nu)``."""
    xi = np.asarray(x, dtype=float) / nu
    return tuple(profile.interpolant(k)(xi) for k in ("v", "h", "u"))


@dataclass
class WellPrepared:
    state: State
    ini_conv: float       # int Q(v0|vt_nu) + (h0 - ht_nu)**2 / 2 dx
    E0: float             # int eta(U0 | Riemann) dx of the limit data
    min_v: float


def well_prepared_data(riemann, profile, nu, params, grid, perturbation=None,
                       omega=0.0):
    """Initial datum of the ``nu`` system expressed on the unit grid.

    ``omega = 0`` starts from the scaled profile, ``omega > 0`` from Riemann
    data mollified by ``tanh`` at macroscopic width ``omega``.  The optional
    ``perturbation`` acts in macroscopic ``x`` on both ``v`` and ``u``.  The
    effective velocity uses the modified kinetic part
    ``u - nu tau1 b v_x / v**(alpha+1)``.
    """
    xi = grid.nodes
    x = nu * xi
    s = riemann.shock
    if omega > 0:
        ramp = 0.5 * (1.0 + np.tanh(x / omega))
        v = s.v_minus + (s.v_plus - s.v_minus) * ramp
        u = s.u_minus + (s.u_plus - s.u_minus) * ramp
    else:
        v = profile.interpolant("v")(xi)
        u = profile.interpolant("u")(xi)
    if perturbation is not None:
        bump = perturbation.shape(x)
        v = v + perturbation.amp_v * bump
        u = u + perturbation.amp_h * bump
    min_v = float(np.min(v))
    if not min_v > 0:
        raise DomainError(f"well-prepared data lost positivity (min v={min_v})")
    if omega > 0 or perturbation is not None:
        h = u - params.tau1 * params.b * v ** (-params.alpha - 1.0) * ddx(v, grid)
    else:
        h = profile.interpolant("h")(xi)
    vt = profile.interpolant("v")(xi)
    ht = profile.interpolant("h")(xi)
    ini = nu * integrate(rel_entropy_density(v, h, vt, ht, params), grid)
    # the limit datum is the Riemann state plus the same perturbation
    vb, ub = riemann.at(x, 0.0)
    if perturbation is not None:
        vb = vb + perturbation.amp_v * perturbation.shape(x)
        ub = ub + perturbation.amp_h * perturbation.shape(x)
    vr, ur = riemann.at(x, 0.0)
    e0 = nu * integrate(rel_entropy_density(vb, ub, vr, ur, params), grid)
    state = State(0.0, v, h, grid).pinned(s)
    return WellPrepared(state, ini, e0, min_v)


@dataclass
class LadderReport:
    rows: list = field(default_factory=list)  # (nu, t, L1, dq, kin, X_nu, drift)
    nus: tuple = ()
    final_l1: dict = field(default_factory=dict)
    profile_mass: float = 0.0
    max_drift: dict = field(default_factory=dict)

    def strictly_decreasing(self):
        vals = [self.final_l1[nu] for nu in sorted(self.nus, reverse=True)]
        return all(b < a for a, b in zip(vals, vals[1:]))

    def fitted_constant(self):
        return max(self.final_l1[nu] / nu for nu in self.nus)


def profile_l1_mass(profile, riemann):
    """``int |vt(xi) - vbar(xi)| dxi`` over the profile grid."""
    return l1_window_distance(profile.vt, riemann, 0.0, profile.xi)


def stability_metrics(run, riemann, params, nu, times, x):
    """Per-time rows ``(nu, t, L1, dq_ac, kinetic, X_nu, drift)``.

    The macroscopic shift is ``X_nu(t) = sigma t + nu X(t/nu)`` where ``X`` is
    the unit-run shift relative to the shock frame.
    """
    rows = []
    sh = riemann.shock
    for t in times:
        snap = rescale_run(run, nu, t, x, params, sh)
        center = riemann.lab_center(t)
        xs = center + nu * run.shift_at(t / nu)
        rows.append((nu, float(t),
                     l1_window_distance(snap.v, riemann, center, x),
                     dq_ac(snap.v, riemann, xs, x, params),
                     kinetic_part(snap.u, riemann, xs, x),
                     float(xs), float(abs(xs - center))))
    return rows


def ladder(profile, params, grid, nus=NU_LADDER, window=WINDOW, horizon=HORIZON,
           n_times=11, n_window=4001, config=None, perturbation=None,
           omega=0.0, lam=None, delta3=0.1):
    """Run the unit system once and evaluate every ``nu`` on the window."""
    shock = profile.shock
    riemann = RiemannShock(shock)
    nus = tuple(sorted(nus, reverse=True))
    if any(n <= 0 for n in nus):
        raise ConfigError("nu values must be positive")
    macro_t = np.linspace(0.0, horizon, n_times)
    unit_t = np.unique(np.concatenate([macro_t / nu for nu in nus]))
    nu_ref = min(nus)
    prep = well_prepared_data(riemann, profile, nu_ref, params, grid,
                              perturbation, omega)
    if perturbation is None and omega == 0.0:
        initial = prep.state
    else:
        raise ConfigError("perturbed ladders need one unit run per nu; use "
                          "well_prepared_data and unit_run directly")
    run = unit_run(initial, params, shock, unit_t, config, profile, lam,
                   delta3)
    x = np.linspace(window[0], window[1], n_window)
    rep = LadderReport(nus=nus, profile_mass=profile_l1_mass(profile, riemann))
    for nu in nus:
        rows = stability_metrics(run, riemann, params, nu, macro_t, x)
        rep.rows.extend(rows)
        rep.final_l1[nu] = rows[-1][2]
        rep.max_drift[nu] = max(r[6] for r in rows)
    return rep, run
