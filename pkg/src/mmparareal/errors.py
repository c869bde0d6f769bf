"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Shapes of operands do not fit together."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class SingularMatrixError(ArithmeticError):
    """A matrix is singular to working tolerance.

    ``pivot`` is the magnitude of the offending pivot (or determinant-like
    quantity) that fell below the threshold.
    """

    def __init__(self, message, pivot=0.0):
        super().__init__(message)
        self.pivot = float(pivot)


class AssumptionViolation(ValueError):
    """Model parameters violate the dissipativity/invertibility assumptions.

    ``report`` optionally carries an :class:`~mmparareal.oumodel.AssumptionReport`.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class InsufficientDataError(ValueError):
    """Too few usable points to fit a slope for a group."""

    def __init__(self, message, group=None):
        super().__init__(message)
        self.group = group


class StabilityError(ArithmeticError):
    """An explicit time stepper produced non-finite values."""


class ConfigError(DomainError):
    """A configuration or input file is malformed."""
