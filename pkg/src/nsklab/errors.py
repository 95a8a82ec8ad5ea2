"""Exception hierarchy.

The CLI maps each class to an exit code (config=2, numerics=3,
nonconvergence=4).
"""


class NSKError(Exception):
    """Base class for all errors raised by nsklab."""

    exit_code = 1


class ConfigError(NSKError, ValueError):
    exit_code = 2


class DomainError(NSKError, ValueError):
    """A pointwise law was evaluated outside its domain (e.g. v <= 0)."""

    exit_code = 3


class DegenerateCapillarityError(DomainError):
    """c = 0 makes the h-equation of the traveling wave algebraic."""


class NumericsError(NSKError, RuntimeError):
    """Positivity loss or non-finite values during time integration."""

    exit_code = 3

    def __init__(self, message, t=None, location=None, min_v=None):
        super().__init__(message)
        self.t = t
        self.location = location
        self.min_v = min_v


class NonConvergenceError(NSKError, RuntimeError):
    exit_code = 4
