"""Acceptance criteria A1-A9 at their stated tolerances and time budgets.

Each test records one pass/fail line, printed in the pytest terminal summary.
"""

import json
import math
import time

import numpy as np
import pytest

from nsklab import cli
from nsklab.contraction import WeightSpec, evaluate_functionals
from nsklab.endstates import lax_ok, rh_residual, solve_end_states
from nsklab.fields import Grid
from nsklab.limits import ladder
from nsklab.npi import change_of_variables, npi_campaign
from nsklab.profile import compute_profile, vs_residual
from nsklab.solver import (SolverConfig, State, initial_state, interior, simulate,
                           transform_residual)

from conftest import make_params, record


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start

    @property
    def ok(self):
        return self.elapsed < self.seconds


def test_A1_rankine_hugoniot_lax():
    worst, ordering = 0.0, True
    with Budget(1.0) as b:
        for gamma in (1.0, 1.1, 1.25):
            params = make_params(gamma)
            for eps in (0.01, 0.05, 0.1, 0.2, 0.3):
                for family in (1, 2):
                    sh = solve_end_states(1.0, 0.0, eps, family, params)
                    worst = max(worst, *map(abs, rh_residual(sh, params)))
                    ordering &= lax_ok(sh)
    ok = worst <= 1e-12 and ordering and b.ok
    record("A1", ok, f"max RH residual {worst:.2e}, Lax ordering {ordering}, "
                     f"{b.elapsed:.2f}s")
    assert ok


def test_A2_profile_correctness():
    params = make_params(1.1, 0.2, 0.05)
    sh = solve_end_states(1.0, 0.0, 0.1, 2, params)
    with Budget(60.0) as b:
        errs = []
        for n in (1001, 2001):
            prof = compute_profile(sh, params, grid=Grid(140.0, n))
            errs.append(max(np.abs(r[4:-4]).max() for r in vs_residual(prof)))
        order = math.log2(errs[0] / errs[1])
        prof = compute_profile(sh, params, grid=Grid(120.0, 2001))
        monotone = bool(np.all(prof.dvt > 0) and np.all(np.diff(prof.vt) > 0))
        dev = []
        simulate(initial_state(prof), params, sh, SolverConfig(t_end=5.0),
                 monitor=lambda st: dev.append(np.abs(st.v - prof.vt).max()))
        sup = max(dev)
    ok = order >= 1.8 and monotone and sup <= 1e-3 and b.ok
    record("A2", ok, f"VS residual order {order:.2f}, monotone {monotone}, "
                     f"sup|v-vt| {sup:.2e} to t=5, {b.elapsed:.1f}s")
    assert ok


def test_A3_transformation_algebra():
    params = make_params(1.0, 0.0, 0.09)
    with Budget(5.0) as b:
        errs, control = [], []
        for n in (401, 801):
            g = Grid(4 * math.pi, n)
            v, u = 1 + 0.3 * np.sin(g.nodes), 0.2 * np.cos(g.nodes)
            errs.append(np.abs(interior(transform_residual(v, u, g, params), 6)).max())
            bad = transform_residual(v, u, g, params,
                                     kappa=lambda w: (w, np.ones_like(w)))
            control.append(np.abs(interior(bad, 6)).max())
        order = math.log2(errs[0] / errs[1])
    ok = order >= 1.8 and min(control) >= 1e-2 and b.ok
    record("A3", ok, f"identity order {order:.2f}, negative control "
                     f"{min(control):.2e}, {b.elapsed:.2f}s")
    assert ok


A4_CONFIG = """
gamma = 1
alpha = 0
c = 0.09
eps = 0.1
lambda = 0.3
delta3 = 0.1
perturbation = gaussian
pert_amp_v = 0.3
pert_amp_h = -0.2
pert_width = 1
pert_center = 2
t_end = 10
L = 120
stride = 25
"""


@pytest.fixture(scope="module")
def a4_runs(tmp_path_factory):
    out = {}
    start = time.perf_counter()
    for n, dt in ((1201, 0.004), (2401, 0.002)):
        cfg = cli.parse_config(A4_CONFIG + f"n = {n}\ndt = {dt}\n")
        d = tmp_path_factory.mktemp(f"a4_{n}")
        cli.run("contraction", cfg, str(d))
        out[n] = json.loads((d / "manifest.json").read_text())
    out["elapsed"] = time.perf_counter() - start
    return out


def test_A4_contraction(a4_runs):
    coarse, fine = a4_runs[1201]["summary"], a4_runs[2401]["summary"]
    shrink = coarse["identity_gap_max"] / fine["identity_gap_max"]
    ok = (coarse["monotone_with_slack"] and fine["monotone_with_slack"]
          and shrink >= 3.0 and a4_runs["elapsed"] < 300)
    record("A4", ok, f"E {coarse['E0']:.4f} -> {coarse['E_final']:.4f}, max "
                     f"increment {coarse['max_increment']:.1e}, identity gap "
                     f"shrink {shrink:.2f}x, {a4_runs['elapsed']:.0f}s")
    assert ok


def test_A5_decomposition_identities():
    params = make_params(1.0, 0.0, 0.09)
    sh = solve_end_states(1.0, 0.0, 0.1, 2, params)
    prof = compute_profile(sh, params, n=2001)
    spec = WeightSpec(0.3, 0.1, prof)
    rng = np.random.default_rng(2024)
    x = prof.xi
    worst_y = worst_j = 0.0
    outside = []
    with Budget(10.0) as b:
        for _ in range(50):
            v, h = prof.vt.copy(), prof.ht.copy()
            for _ in range(3):
                bump = np.exp(-0.5 * ((x - rng.uniform(-25, 25)) / rng.uniform(1, 6)) ** 2)
                v += rng.uniform(-0.25, 0.25) * bump
                h += rng.uniform(-0.3, 0.3) * bump
            rep = evaluate_functionals(State(0.0, v, h, prof.grid), prof, spec,
                                       X=rng.uniform(-3, 3), delta3=0.1)
            worst_y = max(worst_y, abs(rep.Y - (rep.Y_g + rep.Y_b + rep.Y_l + rep.Y_s)))
            worst_j = max(worst_j, abs((rep.J_bad - rep.J_good) - (rep.B_delta - rep.G_delta)))
            outside.append(rep.B1_minus != 0.0)
    ok = worst_y <= 1e-12 and worst_j <= 1e-12 and b.ok
    record("A5", ok, f"Y split {worst_y:.1e}, J split {worst_j:.1e}, states "
                     f"reaching w > delta3: {sum(outside)}/50, {b.elapsed:.1f}s")
    assert ok


def test_A6_nonlinear_poincare():
    with Budget(30.0) as b:
        rep = npi_campaign(1.0, (1e-2, 1e-3), 1000, seed=0, m=1024)
    worst = max(rep.max_R.values())
    ok = rep.passed(1e-8) and b.ok
    record("A6", ok, f"max R {worst:.3f} over 2x1000 samples, offenders "
                     f"{len(rep.offenders)}, {b.elapsed:.1f}s")
    assert ok


def test_A7_jacobian_estimate():
    spreads = []
    with Budget(30.0) as b:
        for ga in ((1.0, 0.0, 0.09), (1.1, 0.3, 0.05), (1.25, 0.75, 0.09)):
            params = make_params(*ga)
            ratios = []
            for eps in (0.05, 0.1, 0.2):
                sh = solve_end_states(1.0, 0.0, eps, 2, params)
                ratios.append(change_of_variables(compute_profile(sh, params)).ratio_to_eps2)
            spreads.append(max(ratios) / min(ratios))
    ok = max(spreads) <= 3.0 and b.ok
    record("A7", ok, f"deviation/eps^2 spread {max(spreads):.2f} (<= 3), "
                     f"{b.elapsed:.1f}s")
    assert ok


def test_A8_vanishing_limit():
    params = make_params(1.0, 0.0, 0.09)
    sh = solve_end_states(1.0, 0.0, 0.1, 2, params)
    grid = Grid(140.0, 2335)
    with Budget(600.0) as b:
        prof = compute_profile(sh, params, grid=grid)
        rep, _ = ladder(prof, params, grid)
    l1 = [rep.final_l1[nu] for nu in rep.nus]
    bound = all(rep.final_l1[nu] <= rep.profile_mass * nu for nu in rep.nus)
    drift = max(rep.max_drift.values())
    ok = rep.strictly_decreasing() and bound and drift < 1e-3 and b.ok
    record("A8", ok, "L1(t=1) " + ", ".join(f"{v:.4f}" for v in l1)
           + f"; fitted C {rep.fitted_constant():.3f} <= profile mass "
             f"{rep.profile_mass:.3f}; max drift {drift:.1e}; {b.elapsed:.0f}s")
    assert ok


def test_A9_shift_bound(a4_runs):
    s = a4_runs[1201]["summary"]
    ok = (s["shift_bound_all"] and s["xdoty_all"]
          and math.isfinite(s["bad_sum_integral"]))
    record("A9", ok, f"shift bound at every step {s['shift_bound_all']}, "
                     f"bad-sum integral {s['bad_sum_integral']:.3e} (manifest)")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
