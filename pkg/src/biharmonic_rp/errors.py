"""Exception types raised across the package."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class SingularityError(DomainError):
    """Evaluation at a singular point (e.g. ``z = 0`` for Hankel functions)."""


class ConfigurationError(ValueError):
    """Inconsistent grids, geometry or experiment settings."""


class ResonanceError(RuntimeError):
    """Discrete Lippmann-Schwinger system is numerically singular."""


class ModeError(ValueError):
    """Estimator called with data of the wrong acquisition mode."""


class IterationLimitError(RuntimeError):
    """Iterative solver hit its iteration cap.

    The last iterate and its residual are attached so callers can inspect or
    accept them.
    """

    def __init__(self, message, iterate=None, residual=None):
        super().__init__(message)
        self.iterate = iterate
        self.residual = residual
