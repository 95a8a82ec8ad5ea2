"""Pointwise constitutive laws, entropies and relative functionals.

Pressure ``p(v) = v**-gamma``, viscosity ``mu(v) = b v**-alpha`` and
capillarity ``kappa(v) = c mu(v)**2 v**3``.  All functions accept scalars or
numpy arrays and raise :class:`DomainError` on non-positive volumes instead
of clamping.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from nsklab.errors import ConfigError, DomainError

C_MAX = 0.09
GAMMA_MAX = 1.25


def tau_split(c):
    """Return ``(tau1, tau2)`` with ``tau1 = (1 + sqrt(1 - 4c)) / 2``.

    ``tau1 * tau2 == c`` and ``tau1 >= 0.9`` on the admissible range
    ``0 <= c <= 9/100``.
    """
    if not (c >= 0.0):
        raise ConfigError(f"capillarity ratio must satisfy c >= 0, got c={c}")
    if c > C_MAX:
        raise ConfigError(
            f"c={c} violates c <= 9/100 (equivalently tau1 >= 0.9)")
    tau1 = 0.5 * (1.0 + math.sqrt(1.0 - 4.0 * c))
    return tau1, 1.0 - tau1


def check_gamma_alpha(gamma, alpha):
    """Return the list of violated exponent hypotheses (empty when valid)."""
    bad = []
    if not (1.0 <= gamma <= GAMMA_MAX):
        bad.append(f"gamma must satisfy 1 <= gamma <= 5/4 (gamma={gamma})")
    if not (0.0 <= alpha <= gamma):
        bad.append(f"alpha must satisfy 0 <= alpha <= gamma (alpha={alpha})")
    if gamma > 1.0 + alpha / 3.0 + 1e-15:
        bad.append(
            f"gamma must satisfy gamma <= 1 + alpha/3 "
            f"(gamma={gamma}, alpha={alpha})")
    return bad


@dataclass(frozen=True)
class FluidParams:
    """Constitutive constants.

    ``b`` defaults to ``gamma``, which is the normalization under which the
    effective-velocity system takes its textbook form.  With ``strict=False``
    violations of the exponent hypotheses ``1 <= gamma <= 5/4`` and
    ``0 <= alpha <= gamma <= 1 + alpha/3`` only emit a warning; the
    constraints ``gamma >= 1``, ``alpha >= 0``, ``b > 0`` and
    ``0 <= c <= 9/100`` are always enforced.
    """

    gamma: float = 1.0
    alpha: float = 0.0
    c: float = 0.09
    b: float = None
    strict: bool = True
    tau1: float = field(init=False)
    tau2: float = field(init=False)
    beta: float = field(init=False)

    def __post_init__(self):
        if self.b is None:
            object.__setattr__(self, "b", float(self.gamma))
        if not self.b > 0:
            raise ConfigError(f"viscosity scale must satisfy b > 0 (b={self.b})")
        if self.gamma < 1.0 or self.alpha < 0.0:
            raise ConfigError(
                "gamma must satisfy 1 <= gamma <= 5/4 and alpha >= 0 "
                f"(gamma={self.gamma}, alpha={self.alpha})")
        bad = check_gamma_alpha(self.gamma, self.alpha)
        if bad:
            msg = "; ".join(bad)
            if self.strict:
                raise ConfigError(msg)
            warnings.warn(f"outside the contraction hypotheses: {msg}",
                          stacklevel=3)
        tau1, tau2 = tau_split(self.c)
        object.__setattr__(self, "tau1", tau1)
        object.__setattr__(self, "tau2", tau2)
        object.__setattr__(self, "beta", self.gamma - self.alpha)

    @property
    def diff_v(self):
        """Prefactor of ``-(v**beta p(v)_x)_x`` in the volume equation."""
        return self.tau1 * self.b / self.gamma

    @property
    def diff_h(self):
        """Prefactor of ``(v**(-alpha-1) h_x)_x`` in the h equation."""
        return self.tau2 * self.b

    def describe(self):
        return {"gamma": self.gamma, "alpha": self.alpha, "c": self.c,
                "b": self.b, "tau1": self.tau1, "tau2": self.tau2,
                "beta": self.beta}


def _positive(x, name="v"):
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError(f"{name} must be positive, got min {np.min(arr)!r}")
    return arr


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def pressure(v, params):
    v = _positive(v)
    return _out(v ** -params.gamma)


def dpressure(v, params):
    v = _positive(v)
    return _out(-params.gamma * v ** (-params.gamma - 1.0))


def d2pressure(v, params):
    v = _positive(v)
    g = params.gamma
    return _out(g * (g + 1.0) * v ** (-g - 2.0))


def volume_from_pressure(p, params):
    """Inverse of ``p(v) = v**-gamma``."""
    p = _positive(p, "pressure")
    return _out(p ** (-1.0 / params.gamma))


def coefficients(v, params):
    """Return ``(mu(v), kappa(v))``."""
    v = _positive(v)
    mu = params.b * v ** -params.alpha
    return _out(mu), _out(params.c * mu * mu * v ** 3)


def q_energy(v, params):
    """Internal energy ``Q`` with ``Q'(v) = -p(v)``."""
    v = _positive(v)
    if params.gamma == 1.0:
        return _out(-np.log(v))
    g = params.gamma
    return _out(v ** (1.0 - g) / (g - 1.0))


_SERIES_CUT = 1e-3


def _remainder(v, w, coef, direct):
    """Taylor remainder ``sum_{n>=2} coef(n) s**n / n!`` in ``s = log(v/w)``.

    Near ``v = w`` the closed form ``direct(v/w)`` cancels catastrophically,
    so the truncated series is used there instead.
    """
    v, w = np.broadcast_arrays(np.atleast_1d(v), np.atleast_1d(w))
    r = v / w
    s = np.log(r)
    small = np.abs(s) < _SERIES_CUT
    out = np.empty(r.shape)
    big = ~small
    out[big] = direct(r[big])
    ss = s[small]
    term = ss.copy()
    acc = np.zeros_like(ss)
    for n in range(2, 8):
        term = term * ss / n
        acc += coef(n) * term
    out[small] = acc
    return out, w


def q_rel(v, w, params):
    """Relative internal energy ``Q(v|w) = Q(v) - Q(w) - Q'(w)(v - w)``."""
    v = _positive(v)
    w = _positive(w, "w")
    scalar = np.ndim(v) == 0 and np.ndim(w) == 0
    g = params.gamma
    if g == 1.0:
        out, _ = _remainder(v, w, lambda n: 1.0, lambda r: r - 1.0 - np.log(r))
    else:
        k = 1.0 - g
        out, ww = _remainder(
            v, w, lambda n: 1.0 - k ** (n - 1),
            lambda r: (r ** k - 1.0) / (g - 1.0) + r - 1.0)
        out = ww ** k * out
    return float(out[0]) if scalar else out


def p_rel(v, w, params):
    """Relative pressure ``p(v|w) = p(v) - p(w) - p'(w)(v - w)``."""
    v = _positive(v)
    w = _positive(w, "w")
    scalar = np.ndim(v) == 0 and np.ndim(w) == 0
    g = params.gamma
    out, ww = _remainder(v, w, lambda n: (-g) ** n + g,
                         lambda r: r ** -g - 1.0 + g * (r - 1.0))
    out = ww ** -g * out
    return float(out[0]) if scalar else out


def rel_entropy_density(v, h, vt, ht, params):
    """``eta((v,h)|(vt,ht)) = (h - ht)**2 / 2 + Q(v|vt)``."""
    dh = np.asarray(h, dtype=float) - np.asarray(ht, dtype=float)
    return _out(0.5 * dh * dh + q_rel(v, vt, params))
