"""Oscillator/Coulomb duality, monopole reduction and vortex spectra, numerically."""
__version__ = "0.1.0"

from .core import (
    ConvergenceError,
    DomainError,
    ExcludedSetError,
    HamredError,
    NumericalError,
    Params,
    PhaseState,
    RefinementNeeded,
    Signature,
    SingularPointError,
    Space,
    ValidationError,
    validate,
)
from .trajectory import Trajectory

__all__ = [
    "ConvergenceError",
    "DomainError",
    "ExcludedSetError",
    "HamredError",
    "NumericalError",
    "Params",
    "PhaseState",
    "RefinementNeeded",
    "Signature",
    "SingularPointError",
    "Space",
    "Trajectory",
    "ValidationError",
    "validate",
    "__version__",
]
