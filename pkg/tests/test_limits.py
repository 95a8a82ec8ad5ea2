from dataclasses import replace

import numpy as np
import pytest

from nsklab.constitutive import q_rel
from nsklab.errors import ConfigError, DomainError
from nsklab.fields import Grid
from nsklab.limits import (
    RiemannShock, dq_ac, kinetic_part, l1_window_distance, ladder,
    profile_l1_mass, rescale_run, scaled_profile, stability_metrics, unit_run,
    well_prepared_data)
from nsklab.solver import Perturbation, SolverConfig, State, initial_state, simulate

X = np.linspace(-2.0, 2.0, 401)


@pytest.fixture(scope="module")
def riemann(base_shock):
    return RiemannShock(base_shock)


def test_riemann_requires_lax(base_shock):
    bad = replace(base_shock, v_plus=0.9)
    with pytest.raises(ConfigError):
        RiemannShock(bad)


def test_riemann_values(riemann, base_shock):
    v, u = riemann.at(np.array([-1.0, 0.2, 0.6]), 0.5)
    assert v.tolist() == [base_shock.v_minus, base_shock.v_minus, base_shock.v_plus]
    assert u.tolist() == [base_shock.u_minus, base_shock.u_minus, base_shock.u_plus]
    assert riemann.lab_center(2.0) == pytest.approx(2 * base_shock.sigma)


@pytest.mark.parametrize("center", [0.0, 0.5, -1.2345, 0.0123])
def test_dq_ac_examples(riemann, base_shock, base_params, center):
    vbar, _ = riemann.at(X, center)
    assert dq_ac(vbar, riemann, center, X, base_params) == pytest.approx(0.0, abs=1e-15)
    flat = np.full(X.size, base_shock.v_minus)
    expected = q_rel(base_shock.v_minus, base_shock.v_plus, base_params) * (2.0 - center)
    assert dq_ac(flat, riemann, center, X, base_params) == pytest.approx(expected, rel=1e-12)
    assert l1_window_distance(flat, riemann, center, X) == pytest.approx(
        (base_shock.v_plus - base_shock.v_minus) * (2.0 - center), rel=1e-12)
    u = np.full(X.size, base_shock.u_plus)
    assert kinetic_part(u, riemann, center, X) == pytest.approx(
        0.5 * (base_shock.u_plus - base_shock.u_minus) ** 2 * (center + 2.0), rel=1e-12)


def test_dq_ac_rejects_nonpositive(riemann, base_params):
    with pytest.raises(DomainError):
        dq_ac(np.zeros(X.size), riemann, 0.0, X, base_params)


@pytest.fixture(scope="module")
def short_run(base_profile, base_params, base_shock):
    s0 = initial_state(base_profile, Perturbation("gaussian", 0.05, -0.02, 2.0))
    times = [0.0, 0.5, 1.0, 2.0]
    return unit_run(s0, base_params, base_shock, times, profile=base_profile,
                    lam=0.3)


def test_unit_run_snapshots(short_run):
    assert [s.t for s in short_run.states] == pytest.approx([0.0, 0.5, 1.0, 2.0], abs=1e-14)
    with pytest.raises(ConfigError):
        short_run.state_at(0.7)
    assert short_run.shift_at(0.0) == 0.0


def test_unit_scale_is_identity(short_run, base_params, base_shock):
    # nu = 1 reads the unit run in lab coordinates x = xi + sigma t
    t = 2.0
    st = short_run.state_at(t)
    x = st.grid.nodes[100:-100:7] + base_shock.sigma * t
    snap = rescale_run(short_run, 1.0, t, x, base_params, base_shock)
    np.testing.assert_allclose(snap.v, st.v[100:-100:7], rtol=0, atol=1e-14)
    np.testing.assert_allclose(snap.h, st.h[100:-100:7], rtol=0, atol=1e-14)


def test_rescale_checks_domain(short_run, base_params, base_shock):
    with pytest.raises(ConfigError, match="cover"):
        rescale_run(short_run, 1.0, 1.0, np.array([0.0, 500.0]), base_params, base_shock)
    with pytest.raises(ConfigError):
        rescale_run(short_run, 0.0, 1.0, X, base_params, base_shock)


@pytest.mark.parametrize("nu", [0.5, 0.1])
def test_discrete_scaling_commutes(base_profile, base_params, base_shock, nu):
    # the nu system on the grid scaled by nu is the unit system with time
    # scaled by nu, step for step
    n = 801
    unit_grid = Grid(140.0, n)
    pert = Perturbation("gaussian", 0.05, -0.02, 2.0)
    s1 = initial_state(base_profile, pert, grid=unit_grid)
    snu = State(0.0, s1.v, s1.h, Grid(140.0 * nu, n))
    t_unit = 3.0
    a = simulate(s1, base_params, base_shock, SolverConfig(t_end=t_unit))
    b = simulate(snu, base_params, base_shock,
                 SolverConfig(t_end=nu * t_unit, nu=nu))
    assert a.n_steps == b.n_steps
    np.testing.assert_allclose(b.final.v, a.final.v, rtol=0, atol=1e-12)
    np.testing.assert_allclose(b.final.h, a.final.h, rtol=0, atol=1e-12)


def test_scaled_profile(base_profile):
    v, h, u = scaled_profile(base_profile, 0.5, np.array([0.0, 1.0]))
    assert v[0] == pytest.approx(float(base_profile.interpolant("v")(0.0)))
    assert v[1] == pytest.approx(float(base_profile.interpolant("v")(2.0)))


def test_well_prepared_profile_data(riemann, base_profile, base_params):
    prep = well_prepared_data(riemann, base_profile, 0.1, base_params, base_profile.grid)
    np.testing.assert_allclose(prep.state.v[1:-1], base_profile.vt[1:-1], rtol=0, atol=1e-15)
    np.testing.assert_allclose(prep.state.h[1:-1], base_profile.ht[1:-1], rtol=0, atol=1e-15)
    assert prep.ini_conv == pytest.approx(0.0, abs=1e-14)
    assert prep.E0 == 0.0


def test_well_prepared_mollified(riemann, base_profile, base_params):
    reports = [well_prepared_data(riemann, base_profile, nu, base_params,
                                  base_profile.grid, omega=0.1)
               for nu in (0.4, 0.2, 0.1, 0.05)]
    assert all(r.min_v > 0 for r in reports)
    assert all(np.isfinite(r.ini_conv) and r.ini_conv > 0 for r in reports)
    with pytest.raises(DomainError):
        well_prepared_data(riemann, base_profile, 0.1, base_params,
                           base_profile.grid, Perturbation("gaussian", -3.0, 0.0, 0.5))


def test_static_profile_metric_is_order_nu(riemann, base_profile, base_params, base_shock):
    # a run that has not moved: the metric is nu times the profile mismatch
    s0 = State(0.0, base_profile.vt, base_profile.ht, base_profile.grid)
    run = unit_run(s0, base_params, base_shock, [0.0])
    mass = profile_l1_mass(base_profile, riemann)
    x = np.linspace(-2, 2, 4001)
    for nu in (0.1, 0.05, 0.02):
        row = stability_metrics(run, riemann, base_params, nu, [0.0], x)[0]
        assert row[2] <= nu * mass * (1 + 1e-6)
        assert row[2] >= 0.5 * nu * mass
        assert row[6] == 0.0


def test_small_ladder(base_profile, base_params):
    rep, run = ladder(base_profile, base_params, base_profile.grid,
                      nus=(0.4, 0.2), horizon=0.4, n_times=3, n_window=801)
    assert rep.nus == (0.4, 0.2)
    assert len(rep.rows) == 6
    assert rep.strictly_decreasing()
    assert rep.fitted_constant() <= rep.profile_mass
    assert max(rep.max_drift.values()) < 1e-3


def test_ladder_rejects(base_profile, base_params):
    with pytest.raises(ConfigError):
        ladder(base_profile, base_params, base_profile.grid, nus=(0.4, -0.1))
    with pytest.raises(ConfigError, match="perturbed"):
        ladder(base_profile, base_params, base_profile.grid,
               perturbation=Perturbation("gaussian", 0.01, 0.0))


def test_split_integral_smooth_second_order(riemann, base_params):
    # a continuous field crossing the split point is integrated at O(dx**2)
    errs = []
    for n in (201, 401):
        x = np.linspace(-2.0, 2.0, n)
        u = np.sin(x) + riemann.shock.u_plus
        val = kinetic_part(u, riemann, 0.3, x)
        fine = np.linspace(-2.0, 2.0, 200001)
        uf = np.sin(fine) + riemann.shock.u_plus
        ref = kinetic_part(uf, riemann, 0.3, fine)
        errs.append(abs(val - ref))
    assert errs[0] / errs[1] > 3.0
