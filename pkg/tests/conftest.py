import warnings

import pytest

from nsklab import FluidParams, compute_profile, solve_end_states
from nsklab.fields import Grid


def make_params(gamma=1.0, alpha=0.0, c=0.09, b=None):
    """Parameters that may sit outside the strict exponent window."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return FluidParams(gamma, alpha, c, b, strict=False)


@pytest.fixture(scope="session")
def base_params():
    return FluidParams(1.0, 0.0, 0.09)


@pytest.fixture(scope="session")
def base_shock(base_params):
    return solve_end_states(1.0, 0.0, 0.1, 2, base_params)


@pytest.fixture(scope="session")
def base_profile(base_shock, base_params):
    return compute_profile(base_shock, base_params, grid=Grid(140.0, 2001))


# acceptance criteria record (name, passed, detail) here; the terminal
# summary prints one line per criterion
ACCEPTANCE = []


def record(name, ok, detail):
    ACCEPTANCE.append((name, bool(ok), detail))
    return bool(ok)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"{name} {'PASS' if ok else 'FAIL'}  {detail}")
