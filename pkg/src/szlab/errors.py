"""Exception types shared across the package."""


class SelfAdjointnessError(ValueError):
    """Matrix fails the self-adjointness tolerance; carries the violation report."""

    def __init__(self, message, max_violation=None, where=None):
        super().__init__(message)
        self.max_violation = max_violation
        self.where = where


class SpectralDomainError(ValueError):
    """A scalar function is undefined somewhere on the spectrum it is applied to."""


class DefinitenessError(ValueError):
    """An operator required to be positive definite has a non-positive eigenvalue."""

    def __init__(self, message, offending_eigenvalue=None):
        super().__init__(message)
        self.offending_eigenvalue = offending_eigenvalue


class SupportTruncationError(ValueError):
    """A shifted or transported function lost significant mass off the grid."""

    def __init__(self, message, lost_fraction=None):
        super().__init__(message)
        self.lost_fraction = lost_fraction


class DivergenceError(ArithmeticError):
    """A quadrature or Monte Carlo tail failed to decay; carries the evidence."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class GridAxisError(ValueError):
    """A required axis is missing from a grid or two grids are incompatible."""


class ConfigError(ValueError):
    """Invalid run configuration (unknown key, missing field, bad value)."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
