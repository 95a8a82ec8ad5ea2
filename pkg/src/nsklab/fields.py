"""Uniform grids and the discrete calculus shared by the numeric modules.

Fields are plain float arrays aligned with :attr:`Grid.nodes`.
"""

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline

MIN_NODES = 16


@dataclass(frozen=True)
class Grid:
    half_length: float
    n: int

    def __post_init__(self):
        if self.n < MIN_NODES:
            raise ValueError(f"grid needs n >= {MIN_NODES} nodes, got {self.n}")
        if not self.half_length > 0:
            raise ValueError("grid half_length must be positive")

    @property
    def dx(self):
        return 2.0 * self.half_length / (self.n - 1)

    @property
    def nodes(self):
        # symmetric by construction: node i and n-1-i are exact negatives
        i = np.arange(self.n)
        x = -self.half_length + i * self.dx
        return 0.5 * (x - x[::-1])

    def refined(self):
        """Same domain with ``dx`` halved."""
        return Grid(self.half_length, 2 * self.n - 1)

    @classmethod
    def for_amplitude(cls, eps, n, scale=14.0):
        """Domain ``[-scale/eps, scale/eps]`` sized by the profile tail decay."""
        return cls(scale / eps, n)


def _check(f, grid):
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.n,):
        raise ValueError(f"field of shape {f.shape} does not match grid n={grid.n}")
    return f


def ddx(f, grid):
    """Central differences inside, second-order one-sided at the two ends."""
    f = _check(f, grid)
    return np.gradient(f, grid.dx, edge_order=2)


def integrate(f, grid):
    """Trapezoid rule over ``[-L, L]``."""
    f = _check(f, grid)
    return float(np.trapezoid(f, dx=grid.dx))


class Interpolant:
    """Cubic interpolant on uniform nodes, extended by constants outside.

    With ``slopes`` it is the cubic Hermite interpolant; otherwise local
    four-point Lagrange interpolation is used.  Outside the data range the
    value is the end value and every derivative is zero.
    """

    def __init__(self, x, values, slopes=None):
        self.x = np.asarray(x, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.x.size < 4:
            raise ValueError("need at least four nodes")
        self.h = self.x[1] - self.x[0]
        self._spline = None
        if slopes is not None:
            self._spline = CubicHermiteSpline(self.x, self.values,
                                              np.asarray(slopes, dtype=float))

    def __call__(self, xi, nu=0):
        xi = np.asarray(xi, dtype=float)
        inside = (xi >= self.x[0]) & (xi <= self.x[-1])
        if self._spline is not None:
            out = self._spline(np.clip(xi, self.x[0], self.x[-1]), nu)
        else:
            out = self._lagrange(np.clip(xi, self.x[0], self.x[-1]), nu)
        if nu == 0:
            out = np.where(xi < self.x[0], self.values[0], out)
            out = np.where(xi > self.x[-1], self.values[-1], out)
        else:
            out = np.where(inside, out, 0.0)
        return out

    def _lagrange(self, xi, nu):
        m = self.x.size
        j = np.floor((xi - self.x[0]) / self.h).astype(int) - 1
        j = np.clip(j, 0, m - 4)
        s = (xi - self.x[j]) / self.h  # local coordinate, stencil at s=0..3
        f = [self.values[j + k] for k in range(4)]
        if nu == 0:
            w = [-(s - 1) * (s - 2) * (s - 3) / 6, s * (s - 2) * (s - 3) / 2,
                 -s * (s - 1) * (s - 3) / 2, s * (s - 1) * (s - 2) / 6]
        elif nu == 1:
            w = [-(3 * s * s - 12 * s + 11) / 6, (3 * s * s - 10 * s + 6) / 2,
                 -(3 * s * s - 8 * s + 3) / 2, (3 * s * s - 6 * s + 2) / 6]
            w = [wk / self.h for wk in w]
        else:
            raise ValueError("Lagrange interpolant supports nu in {0, 1}")
        return sum(wk * fk for wk, fk in zip(w, f))


def sample_shifted(interp, shift, grid):
    """Values of ``f(xi - shift)`` on the grid nodes (``f^{-X}``)."""
    return interp(grid.nodes - shift)
