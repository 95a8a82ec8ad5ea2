"""Method-of-lines integration of the effective-velocity system.

In the shock frame ``xi = x - sigma t`` the unknowns ``(v, h)`` satisfy

    v_t = sigma v_xi + h_xi - nu D1 (v**beta p(v)_xi)_xi
    h_t = sigma h_xi - p(v)_xi + nu D2 (v**(-alpha-1) h_xi)_xi

with ``D1 = tau1 b / gamma`` and ``D2 = tau2 b`` (``nu = 1`` is the unit
system).  Diffusion is discretized in conservative flux form, advection by
central differences, and the two boundary nodes are pinned to the end states.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from nsklab import kernels
from nsklab.errors import ConfigError, NumericsError
from nsklab.fields import Grid, ddx


@dataclass(frozen=True)
class State:
    t: float
    v: np.ndarray
    h: np.ndarray
    grid: Grid

    def __post_init__(self):
        for name in ("v", "h"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != (self.grid.n,):
                raise ValueError(f"{name} has shape {arr.shape}, grid has "
                                 f"{self.grid.n} nodes")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def pinned(self, shock):
        """Copy with the boundary nodes set exactly to the end states."""
        v, h = self.v.copy(), self.h.copy()
        v[0], h[0] = shock.v_minus, shock.h_minus
        v[-1], h[-1] = shock.v_plus, shock.h_plus
        return State(self.t, v, h, self.grid)

    def boundary_mismatch(self, shock):
        return max(abs(self.v[0] - shock.v_minus), abs(self.h[0] - shock.h_minus),
                   abs(self.v[-1] - shock.v_plus), abs(self.h[-1] - shock.h_plus))


@dataclass(frozen=True)
class Perturbation:
    """Additive initial perturbation ``amp * shape((xi - center) / width)``.

    ``gaussian`` uses ``exp(-s**2 / 2)``; ``sine`` uses ``sin(s)`` multiplied
    by a smooth cutoff so the boundary values are left untouched.
    """

    kind: str = "none"
    amp_v: float = 0.0
    amp_h: float = 0.0
    width: float = 1.0
    center: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "gaussian", "sine"):
            raise ConfigError(f"unknown perturbation kind {self.kind!r}")
        if not self.width > 0:
            raise ConfigError("perturbation width must be positive")

    def shape(self, xi):
        s = (np.asarray(xi, dtype=float) - self.center) / self.width
        if self.kind == "gaussian":
            return np.exp(-0.5 * s * s)
        if self.kind == "sine":
            return np.sin(s) * np.exp(-0.5 * (s / 4.0) ** 2)
        return np.zeros_like(s)


def initial_state(profile, perturbation=None, grid=None, shock=None):
    """Profile (resampled on ``grid`` if given) plus a perturbation, pinned."""
    grid = profile.grid if grid is None else grid
    shock = profile.shock if shock is None else shock
    if grid == profile.grid:
        v, h = profile.vt.copy(), profile.ht.copy()
    else:
        v = profile.interpolant("v")(grid.nodes)
        h = profile.interpolant("h")(grid.nodes)
    if perturbation is not None:
        bump = perturbation.shape(grid.nodes)
        v = v + perturbation.amp_v * bump
        h = h + perturbation.amp_h * bump
    if np.any(v <= 0):
        raise NumericsError("initial perturbation makes v non-positive",
                            t=0.0, min_v=float(v.min()))
    return State(0.0, v, h, grid).pinned(shock)


def constant_state(v0, h0, grid):
    return State(0.0, np.full(grid.n, float(v0)), np.full(grid.n, float(h0)),
                 grid)


@dataclass(frozen=True)
class SolverConfig:
    cfl: float = 0.2
    v_floor: float = 1e-6
    t_end: float = 1.0
    stride: int = 1
    monitor_stride: int = 1
    nu: float = 1.0
    dt: float = None  # fixed step; must respect the stability bound

    def __post_init__(self):
        if not (0.0 < self.cfl <= 0.5):
            raise ConfigError(f"cfl must lie in (0, 0.5], got {self.cfl}")
        if not self.v_floor > 0:
            raise ConfigError("v_floor must be positive")
        if not self.t_end >= 0:
            raise ConfigError("t_end must be non-negative")
        if self.stride < 1 or self.monitor_stride < 1:
            raise ConfigError("strides must be positive integers")
        if not self.nu > 0:
            raise ConfigError("nu must be positive")
        if self.dt is not None and not self.dt > 0:
            raise ConfigError("fixed dt must be positive")


def _kernel_args(grid, shock, params, nu, v_floor):
    return (grid.dx, shock.sigma, params.diff_v, params.diff_h, params.gamma,
            params.alpha, nu, v_floor)


def _raise_bad(state_v, state_h, bad, t, grid, what):
    vb = float(state_v[bad])
    msg = (f"{what} at t={t:.6g}, xi={grid.nodes[bad]:.6g}: "
           f"v={vb:.6g}, h={float(state_h[bad]):.6g}, min v={np.min(state_v):.6g}")
    raise NumericsError(msg, t=t, location=float(grid.nodes[bad]),
                        min_v=float(np.min(state_v)))


def semidiscrete_rhs(state, params, shock, nu=1.0, v_floor=1e-6):
    """Right-hand side ``(dv/dt, dh/dt)``; boundary rows are zero."""
    v = np.ascontiguousarray(state.v)
    h = np.ascontiguousarray(state.h)
    out_v = np.empty_like(v)
    out_h = np.empty_like(h)
    bad = kernels.rhs(v, h, out_v, out_h,
                      *_kernel_args(state.grid, shock, params, nu, v_floor))
    if bad >= 0:
        _raise_bad(v, h, bad, state.t, state.grid,
                   "positivity or finiteness lost")
    return out_v, out_h


def stable_dt(state, params, shock, cfl=0.2, nu=1.0):
    """Explicit step bound: parabolic CFL plus an advective safeguard.

    Both diffusion operators have effective diffusivity proportional to
    ``v**(-alpha-1)``, the v-equation with prefactor ``D1 gamma``.
    """
    dx = state.grid.dx
    vmin = float(np.min(state.v))
    if not vmin > 0:
        raise NumericsError("non-positive volume", t=state.t, min_v=vmin)
    kmax = vmin ** (-params.alpha - 1.0)
    diff = nu * max(params.diff_v * params.gamma, params.diff_h) * kmax
    dt_par = cfl * dx * dx / diff
    sound = math.sqrt(params.gamma * vmin ** (-params.gamma - 1.0))
    dt_adv = 2.0 * dx / (abs(shock.sigma) + sound)
    return min(dt_par, dt_adv)


def step(state, dt, params, shock, nu=1.0, v_floor=1e-6):
    """One classical RK4 step of size ``dt``."""
    v = np.ascontiguousarray(state.v)
    h = np.ascontiguousarray(state.h)
    vn, hn, bad = kernels.rk4_step(
        v, h, dt, *_kernel_args(state.grid, shock, params, nu, v_floor))
    if bad >= 0:
        _raise_bad(v, h, bad, state.t, state.grid,
                   "positivity or finiteness lost during RK4 step")
    return State(state.t + dt, np.asarray(vn), np.asarray(hn), state.grid)


@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    n_steps: int = 0
    dt_min: float = math.inf
    dt_max: float = 0.0

    @property
    def final(self):
        return self.states[-1]


def simulate(initial, params, shock, config, monitor=None,
             monitor_initial=True):
    """Integrate from ``initial`` to ``config.t_end``.

    ``monitor(state)`` is called on the initial state (unless
    ``monitor_initial`` is false, for continuing a segmented run), every
    ``config.monitor_stride`` steps and at the final time; snapshots are
    stored every ``config.stride`` steps and at the final time.
    """
    state = initial
    traj = Trajectory(times=[state.t], states=[state])
    if monitor is not None and monitor_initial:
        monitor(state)
    t_end = config.t_end
    k = 0
    while state.t < t_end * (1.0 - 1e-14):
        dt_cap = stable_dt(state, params, shock, config.cfl, config.nu)
        if config.dt is not None:
            if config.dt > dt_cap * (1.0 + 1e-12):
                raise ConfigError(
                    f"fixed dt={config.dt:.3g} exceeds the stability bound "
                    f"{dt_cap:.3g}")
            dt = config.dt
        else:
            dt = dt_cap
        dt = min(dt, t_end - state.t)
        state = step(state, dt, params, shock, config.nu, config.v_floor)
        k += 1
        traj.dt_min = min(traj.dt_min, dt)
        traj.dt_max = max(traj.dt_max, dt)
        done = not state.t < t_end * (1.0 - 1e-14)
        if k % config.stride == 0 or done:
            traj.times.append(state.t)
            traj.states.append(state)
        if monitor is not None and (k % config.monitor_stride == 0 or done):
            monitor(state)
    traj.n_steps = k
    return traj


def linearized_rhs(dv, dh, grid, params, shock, nu=1.0):
    """Continuum linearization of the system at the left end state."""
    vm = shock.v_minus
    a = params.gamma * vm ** (-params.gamma - 1.0)  # -p'(v-)
    k = vm ** (-params.alpha - 1.0)
    dvx, dhx = ddx(dv, grid), ddx(dh, grid)
    rv = shock.sigma * dvx + dhx + nu * params.diff_v * a * vm ** params.beta * ddx(dvx, grid)
    rh = shock.sigma * dhx + a * dvx + nu * params.diff_h * k * ddx(dhx, grid)
    return rv, rh


def _default_kappa(params):
    def kappa(v):
        mu = params.b * v ** -params.alpha
        dk = params.c * params.b ** 2 * (3.0 - 2.0 * params.alpha) * v ** (2.0 - 2.0 * params.alpha)
        return params.c * mu * mu * v ** 3, dk
    return kappa


def transform_residual(v, u, grid, params, kappa=None):
    """Pointwise defect of the effective-velocity identity for the momentum
    diffusion.

    Compares ``tau2 (mu u_x / v)_x + [Korteweg stress]_x`` with
    ``tau2 (mu h_x / v)_x`` where ``h = u - tau1 mu v_x / v``.  ``kappa`` may
    be a callable ``v -> (kappa, kappa')`` replacing ``c mu**2 v**3``; any
    other law leaves an O(1) residual.
    """
    v = np.asarray(v, dtype=float)
    u = np.asarray(u, dtype=float)
    if np.any(v <= 0):
        raise ValueError("transform_residual needs positive v")
    kappa = _default_kappa(params) if kappa is None else kappa
    kap, dkap = kappa(v)
    mu = params.b * v ** -params.alpha
    vx = ddx(v, grid)
    vxx = ddx(vx, grid)
    ux = ddx(u, grid)
    stress = kap * (-vxx / v ** 5 + 2.5 * vx ** 2 / v ** 6) - dkap * vx ** 2 / (2.0 * v ** 5)
    lhs = params.tau2 * ddx(mu * ux / v, grid) + ddx(stress, grid)
    h = u - params.tau1 * mu * vx / v
    rhs = params.tau2 * ddx(mu * ddx(h, grid) / v, grid)
    return lhs - rhs


def interior(f, margin=4):
    """Slice away ``margin`` nodes at each end (one-sided stencil layers)."""
    return np.asarray(f)[margin:-margin]
