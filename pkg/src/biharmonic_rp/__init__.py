"""Simulation and inversion of biharmonic backscattering in random media."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigurationError,
    DomainError,
    IterationLimitError,
    ModeError,
    ResonanceError,
    SingularityError,
)
from .wavenumber import Wavenumber, complex_wavenumber, wavenumber_from_kappa_r  # noqa: E402

__all__ = [
    "ConfigurationError",
    "DomainError",
    "IterationLimitError",
    "ModeError",
    "ResonanceError",
    "SingularityError",
    "Wavenumber",
    "complex_wavenumber",
    "wavenumber_from_kappa_r",
    "__version__",
]
