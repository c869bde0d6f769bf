"""Micro-macro Parareal for slow-fast linear ODEs and OU moment equations."""

from .errors import (
    AssumptionViolation,
    ConfigError,
    DimensionError,
    DomainError,
    InsufficientDataError,
    SingularMatrixError,
    StabilityError,
)

__version__ = "0.1.0"
