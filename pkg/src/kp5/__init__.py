"""Simulation and dispersive analysis of the fifth-order Kadomtsev-Petviashvili equation.

    u_t + alpha*u_xxx + beta*u_xxxxx + d_x^{-1} u_yy + u*u_x = 0
"""

from .dispersion import DispersionParams
from .lattice import FrequencyLattice, RejectedInput, SpaceTimeField, SpectralField
from .window import TimeWindow

__version__ = "0.1.0"

__all__ = [
    "DispersionParams",
    "FrequencyLattice",
    "RejectedInput",
    "SpaceTimeField",
    "SpectralField",
    "TimeWindow",
]
