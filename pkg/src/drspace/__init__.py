"""Spherical analysis on Damek-Ricci spaces.

Special functions (Jacobi, Bessel, Gauss 2F1, complex Gamma), the group
geometry of S = N A, spherical and Helgason-type transforms, Lorentz norms,
spherical means and a harness of numerical inequality checks.
"""

from .errors import (
    BudgetExhaustedError,
    DomainError,
    DrspaceError,
    OutsideCertifiedDomainError,
    PrecisionLossError,
    UncalibratedError,
    UnsupportedSpaceError,
)
from .geometry import SpaceParams
from .specfun import JacobiParams, SpectralPoint, c_function, jacobi_phi, phi_dr

__version__ = "0.1.0"

__all__ = [
    "SpaceParams",
    "JacobiParams",
    "SpectralPoint",
    "jacobi_phi",
    "phi_dr",
    "c_function",
    "DrspaceError",
    "DomainError",
    "OutsideCertifiedDomainError",
    "PrecisionLossError",
    "UnsupportedSpaceError",
    "UncalibratedError",
    "BudgetExhaustedError",
]
