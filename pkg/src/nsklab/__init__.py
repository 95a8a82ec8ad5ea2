"""Viscous-dispersive shock laboratory for the 1-D Navier-Stokes-Korteweg
system in effective-velocity variables."""

from nsklab.constitutive import FluidParams
from nsklab.endstates import ShockData, solve_end_states
from nsklab.errors import (ConfigError, DegenerateCapillarityError,
                           DomainError, NonConvergenceError, NSKError,
                           NumericsError)
from nsklab.fields import Grid
from nsklab.profile import Profile, compute_profile

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DegenerateCapillarityError", "DomainError", "FluidParams",
    "Grid", "NSKError", "NonConvergenceError", "NumericsError", "Profile",
    "ShockData", "compute_profile", "solve_end_states",
]
