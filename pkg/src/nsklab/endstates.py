"""Rankine-Hugoniot / Lax admissible end states for a prescribed amplitude."""

import math
import warnings
from dataclasses import dataclass, replace

from nsklab.constitutive import dpressure, pressure, volume_from_pressure
from nsklab.errors import ConfigError, DomainError

EPS_SOFT_CEILING = 0.3


@dataclass(frozen=True)
class ShockData:
    v_minus: float
    u_minus: float
    v_plus: float
    u_plus: float
    sigma: float
    sigma_star: float
    eps: float
    family: int

    @property
    def h_minus(self):
        # effective velocity equals u at the constant end states
        return self.u_minus

    @property
    def h_plus(self):
        return self.u_plus

    def as_dict(self):
        return {"family": self.family, "eps": self.eps,
                "v_minus": self.v_minus, "u_minus": self.u_minus,
                "v_plus": self.v_plus, "u_plus": self.u_plus,
                "sigma": self.sigma, "sigma_star": self.sigma_star}


def solve_end_states(v_minus, u_minus, eps, family, params):
    """End states with ``|p(v+) - p(v-)| = eps``.

    A 2-shock has ``p(v+) = p(v-) - eps`` (so ``v- < v+``, ``sigma > 0``), a
    1-shock ``p(v+) = p(v-) + eps`` (``v- > v+``, ``sigma < 0``).  In both
    cases ``u- > u+``.
    """
    if family not in (1, 2):
        raise ConfigError(f"shock family must be 1 or 2, got {family!r}")
    if not v_minus > 0:
        raise DomainError(f"v_minus must be positive, got {v_minus}")
    if eps < 0:
        raise ConfigError(f"amplitude must be non-negative, got eps={eps}")
    if eps > EPS_SOFT_CEILING:
        warnings.warn(f"eps={eps} is above the small-shock regime "
                      f"(soft ceiling {EPS_SOFT_CEILING})", stacklevel=2)
    p_minus = pressure(v_minus, params)
    sigma_star = math.sqrt(-dpressure(v_minus, params))
    if eps == 0:
        sigma = sigma_star if family == 2 else -sigma_star
        return ShockData(v_minus, u_minus, v_minus, u_minus, sigma,
                         sigma_star, 0.0, family)

    p_plus = p_minus - eps if family == 2 else p_minus + eps
    if p_plus <= 0:
        raise DomainError(
            f"infeasible amplitude eps={eps}: requires p(v+) > 0 "
            f"(p(v-)={p_minus})")
    v_plus = volume_from_pressure(p_plus, params)
    speed = math.sqrt(-(p_plus - p_minus) / (v_plus - v_minus))
    sigma = speed if family == 2 else -speed
    # first RH relation: u+ - u- = -sigma (v+ - v-)
    u_plus = u_minus - sigma * (v_plus - v_minus)
    return ShockData(v_minus, u_minus, v_plus, u_plus, sigma, sigma_star,
                     float(eps), family)


def rh_residual(shock, params):
    dv = shock.v_plus - shock.v_minus
    du = shock.u_plus - shock.u_minus
    dp = pressure(shock.v_plus, params) - pressure(shock.v_minus, params)
    return -shock.sigma * dv - du, -shock.sigma * du + dp


def lax_ok(shock):
    """Family ordering of the Lax entropy condition."""
    if shock.eps == 0:
        return True
    if shock.family == 2:
        return (shock.v_minus < shock.v_plus and shock.u_minus > shock.u_plus
                and shock.sigma > 0)
    return (shock.v_minus > shock.v_plus and shock.u_minus > shock.u_plus
            and shock.sigma < 0)


def mirror(shock, params):
    """The reflection x -> -x, u -> -u, sigma -> -sigma.

    It maps a 2-shock from ``(v-, u-)`` to ``(v+, u+)`` onto the 1-shock from
    ``(v+, -u+)`` to ``(v-, -u-)``.
    """
    return replace(shock, v_minus=shock.v_plus, v_plus=shock.v_minus,
                   u_minus=-shock.u_plus, u_plus=-shock.u_minus,
                   sigma=-shock.sigma, family=3 - shock.family,
                   sigma_star=math.sqrt(-dpressure(shock.v_plus, params)))
