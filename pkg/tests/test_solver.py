import math

import numpy as np
import pytest

from nsklab import _pykernels
from nsklab.errors import ConfigError, NumericsError
from nsklab.fields import Grid
from nsklab.kernels import BACKEND, backends
from nsklab.solver import (
    Perturbation, SolverConfig, State, constant_state, initial_state,
    interior, linearized_rhs, semidiscrete_rhs, simulate, stable_dt, step,
    transform_residual)

from conftest import make_params


def test_state_is_validated_and_read_only():
    g = Grid(1.0, 21)
    s = constant_state(1.0, 0.0, g)
    with pytest.raises(ValueError):
        s.v[0] = 2.0
    with pytest.raises(ValueError):
        State(0.0, np.ones(20), np.zeros(21), g)


@pytest.mark.parametrize("kwargs", [dict(cfl=0.0), dict(cfl=0.6),
                                    dict(v_floor=0.0), dict(t_end=-1.0),
                                    dict(stride=0), dict(nu=0.0), dict(dt=-1.0)])
def test_solver_config_rejects(kwargs):
    with pytest.raises(ConfigError):
        SolverConfig(**kwargs)


def test_perturbation_shapes():
    x = np.linspace(-5, 5, 11)
    g = Perturbation("gaussian", 1.0, 0.0, width=2.0, center=1.0).shape(x)
    np.testing.assert_allclose(g, np.exp(-0.5 * ((x - 1.0) / 2.0) ** 2))
    assert np.all(Perturbation().shape(x) == 0)
    with pytest.raises(ConfigError):
        Perturbation("square")


def test_constant_state_is_an_equilibrium(base_shock, base_params):
    g = Grid(20.0, 201)
    s = constant_state(base_shock.v_minus, base_shock.h_minus, g)
    rv, rh = semidiscrete_rhs(s, base_params, base_shock)
    assert np.all(rv == 0.0) and np.all(rh == 0.0)
    traj = simulate(s, base_params, base_shock, SolverConfig(t_end=2.0))
    assert np.all(traj.final.v == s.v) and np.all(traj.final.h == s.h)


def test_profile_residual_second_order(base_shock, base_params):
    # the unpinned samples: pinning would add an O(1e-7 / dx**2) spike
    from nsklab.profile import compute_profile
    errs = []
    for n in (1001, 2001):
        prof = compute_profile(base_shock, base_params, grid=Grid(140.0, n))
        s = State(0.0, prof.vt, prof.ht, prof.grid)
        rv, rh = semidiscrete_rhs(s, base_params, base_shock)
        errs.append(max(np.abs(interior(rv, 1)).max(), np.abs(interior(rh, 1)).max()))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.15)


def test_linearization(base_shock, base_params):
    # symmetric amplitude differences remove the O(amp) remainder; what is
    # left is the O(dx**2) mismatch between the flux stencil and ddx(ddx)
    amp = 1e-4
    errs = []
    for n in (401, 801):
        g = Grid(10.0, n)
        phi = np.exp(-g.nodes ** 2)
        psi = 0.5 * g.nodes * np.exp(-g.nodes ** 2)
        rv_lin, rh_lin = linearized_rhs(phi, psi, g, base_params, base_shock)
        rp = semidiscrete_rhs(State(0.0, base_shock.v_minus + amp * phi,
                                    base_shock.h_minus + amp * psi, g),
                              base_params, base_shock)
        rm = semidiscrete_rhs(State(0.0, base_shock.v_minus - amp * phi,
                                    base_shock.h_minus - amp * psi, g),
                              base_params, base_shock)
        errs.append(max(
            np.abs(interior((rp[0] - rm[0]) / (2 * amp) - rv_lin, 8)).max(),
            np.abs(interior((rp[1] - rm[1]) / (2 * amp) - rh_lin, 8)).max()))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)


def test_discrete_conservation(base_profile, base_params, base_shock):
    # flux form: interior sums of the update only see the boundary cells, so a
    # perturbation away from the ends leaves them unchanged
    s0 = initial_state(base_profile)
    pert = Perturbation("gaussian", 0.05, -0.03, width=3.0)
    s1 = initial_state(base_profile, pert)
    dx = s0.grid.dx
    a = [dx * r[1:-1].sum() for r in semidiscrete_rhs(s0, base_params, base_shock)]
    b = [dx * r[1:-1].sum() for r in semidiscrete_rhs(s1, base_params, base_shock)]
    np.testing.assert_allclose(b, a, rtol=0, atol=1e-13)


def test_rk4_fourth_order(base_profile, base_params, base_shock):
    pert = Perturbation("gaussian", 0.05, -0.03, width=3.0)
    grid = Grid(140.0, 401)
    s0 = initial_state(base_profile, pert, grid=grid)
    dt0 = 0.5 * stable_dt(s0, base_params, base_shock)
    finals = []
    for k in (1, 2, 4):
        cfg = SolverConfig(t_end=8 * dt0, dt=dt0 / k)
        finals.append(simulate(s0, base_params, base_shock, cfg).final.v)
    e1 = np.abs(finals[0] - finals[2]).max()
    e2 = np.abs(finals[1] - finals[2]).max()
    order = math.log2((e1 - e2) / e2)
    assert order > 3.5


def test_fixed_dt_above_bound_rejected(base_profile, base_params, base_shock):
    s0 = initial_state(base_profile)
    cap = stable_dt(s0, base_params, base_shock)
    with pytest.raises(ConfigError, match="stability bound"):
        simulate(s0, base_params, base_shock, SolverConfig(t_end=1.0, dt=2 * cap))


def test_positivity_loss_diagnostic(base_shock, base_params):
    g = Grid(5.0, 51)
    v = np.ones(g.n)
    v[30] = 1e-9
    s = State(0.25, v, np.zeros(g.n), g)
    with pytest.raises(NumericsError) as info:
        semidiscrete_rhs(s, base_params, base_shock)
    err = info.value
    assert err.t == 0.25
    assert err.location == pytest.approx(g.nodes[30])
    assert err.min_v == pytest.approx(1e-9)
    assert err.exit_code == 3


def test_initial_state_pinned(base_profile, base_shock):
    s = initial_state(base_profile, Perturbation("sine", 0.01, 0.01, 2.0))
    assert s.boundary_mismatch(base_shock) == 0.0
    with pytest.raises(NumericsError):
        initial_state(base_profile, Perturbation("gaussian", -5.0, 0.0))


def test_simulate_snapshots_and_monitor(base_profile, base_params, base_shock):
    calls = []
    cfg = SolverConfig(t_end=1.0, stride=3, monitor_stride=2)
    traj = simulate(initial_state(base_profile), base_params, base_shock, cfg,
                    monitor=lambda st: calls.append(st.t))
    assert traj.times[0] == 0.0 and traj.times[-1] == pytest.approx(1.0)
    assert calls[0] == 0.0 and calls[-1] == pytest.approx(1.0)
    assert len(traj.states) == traj.n_steps // 3 + 1 + (traj.n_steps % 3 != 0)


@pytest.mark.skipif("compiled" not in backends(), reason="extension not built")
@pytest.mark.parametrize("ga", [(1.0, 0.0), (1.1, 0.3), (1.25, 0.75)])
def test_backends_agree(ga, base_profile):
    comp = backends()["compiled"]
    params = make_params(*ga)
    sh = base_profile.shock
    pert = Perturbation("sine", 0.02, -0.01, width=3.0).shape(base_profile.xi)
    v = base_profile.vt + 0.02 * pert
    h = base_profile.ht - 0.01 * pert
    args = (base_profile.grid.dx, sh.sigma, params.diff_v, params.diff_h,
            params.gamma, params.alpha, 0.7, 1e-6)
    outs = []
    for mod in (_pykernels, comp):
        ov, oh = np.empty_like(v), np.empty_like(h)
        assert mod.rhs(v, h, ov, oh, *args) == -1
        vn, hn, bad = mod.rk4_step(v, h, 0.004, *args)
        assert bad == -1
        outs.append((ov, oh, vn, hn))
    # pow versus exp/log differ at round-off in O(1) pressures, which the
    # second differences divide by dx**2
    tol = 1e-13 / base_profile.grid.dx ** 2
    for a, b in zip(*outs):
        np.testing.assert_allclose(a, b, rtol=0, atol=tol)


@pytest.mark.skipif("compiled" not in backends(), reason="extension not built")
def test_backends_agree_on_failure():
    comp = backends()["compiled"]
    v = np.ones(40)
    v[17] = -1.0
    h = np.zeros(40)
    for mod in (_pykernels, comp):
        assert mod.rhs(v, h, np.empty(40), np.empty(40), 0.1, 1.0, 0.9, 0.1,
                       1.0, 0.0, 1.0, 1e-6) == 17


def test_backend_name():
    assert BACKEND in ("compiled", "python")


def _transform_errors(params, kappa=None):
    errs = []
    for n in (401, 801):
        g = Grid(math.pi * 4, n)
        x = g.nodes
        r = transform_residual(1 + 0.3 * np.sin(x), 0.2 * np.cos(x), g, params,
                               kappa)
        errs.append(np.abs(interior(r, 6)).max())
    return errs


@pytest.mark.parametrize("ga", [(1.0, 0.0, 0.09), (1.1, 0.3, 0.05),
                                (1.25, 0.75, 0.09)])
def test_transform_identity_converges(ga):
    errs = _transform_errors(make_params(*ga))
    assert math.log2(errs[0] / errs[1]) >= 1.8


def test_transform_negative_control():
    params = make_params(1.0, 0.0, 0.09)
    errs = _transform_errors(params, kappa=lambda v: (v, np.ones_like(v)))
    assert min(errs) >= 1e-2


def test_transform_constant_volume():
    params = make_params(1.1, 0.3, 0.05)
    g = Grid(6.0, 601)
    r = transform_residual(np.full(g.n, 1.3), np.sin(g.nodes), g, params)
    assert np.abs(interior(r, 6)).max() < 1e-3


def test_step_advances_time(base_profile, base_params, base_shock):
    s = initial_state(base_profile)
    s1 = step(s, 0.01, base_params, base_shock)
    assert s1.t == pytest.approx(0.01)


def test_pure_python_switch():
    import os
    import subprocess
    import sys
    env = dict(os.environ, NSKLAB_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from nsklab import kernels; print(kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
