"""Restriction, lifting and matching between micro and macro state vectors.

The operators are described by data (a slow/fast index partition plus a
lifting spec), so the same code couples the plain slow-fast ODE, the mean
moment system and the covariance moment system.
"""

from dataclasses import dataclass

import numpy as np

from . import smalllin
from .errors import DimensionError, DomainError

EQUILIBRIUM = "equilibrium"
INITIAL_CONDITION = "initial_condition"
LIFTING_VARIANTS = (EQUILIBRIUM, INITIAL_CONDITION)


@dataclass(frozen=True)
class SlowFastPartition:
    slow_indices: tuple
    fast_indices: tuple

    def __post_init__(self):
        slow = tuple(int(i) for i in self.slow_indices)
        fast = tuple(int(i) for i in self.fast_indices)
        both = slow + fast
        if len(set(both)) != len(both):
            raise DimensionError(f"slow {slow} and fast {fast} indices overlap or repeat")
        if sorted(both) != list(range(len(both))):
            raise DimensionError(f"indices {sorted(both)} do not cover 0..{len(both) - 1}")
        object.__setattr__(self, "slow_indices", slow)
        object.__setattr__(self, "fast_indices", fast)

    @property
    def dim(self):
        return len(self.slow_indices) + len(self.fast_indices)

    @property
    def n_slow(self):
        return len(self.slow_indices)

    @classmethod
    def leading(cls, n_slow, dim):
        """First ``n_slow`` components slow, the rest fast."""
        return cls(tuple(range(n_slow)), tuple(range(n_slow, dim)))

    @classmethod
    def identity(cls, dim):
        """Everything slow: classical Parareal."""
        return cls(tuple(range(dim)), ())

    def restriction_matrix(self):
        R = np.zeros((self.n_slow, self.dim))
        R[np.arange(self.n_slow), list(self.slow_indices)] = 1.0
        return R


@dataclass(frozen=True, eq=False)
class LiftingSpec:
    """How to build a micro state from a macro one.

    ``equilibrium``: fast part = ``equilibrium_map @ X``.
    ``initial_condition``: fast part = ``initial_fast`` regardless of ``X``.
    """

    variant: str
    equilibrium_map: np.ndarray = None
    initial_fast: np.ndarray = None

    def __post_init__(self):
        if self.variant not in LIFTING_VARIANTS:
            raise DomainError(f"unknown lifting variant {self.variant!r}; expected one of {LIFTING_VARIANTS}")
        if self.variant == EQUILIBRIUM:
            if self.equilibrium_map is None:
                raise DimensionError("equilibrium lifting needs an equilibrium_map")
            object.__setattr__(self, "equilibrium_map", smalllin.as_matrix(self.equilibrium_map))
        else:
            if self.initial_fast is None:
                raise DimensionError("initial_condition lifting needs initial_fast")
            fast = np.asarray(self.initial_fast, dtype=float).reshape(-1)
            object.__setattr__(self, "initial_fast", fast)

    @classmethod
    def from_initial(cls, u0, part):
        return cls(INITIAL_CONDITION, initial_fast=np.asarray(u0, dtype=float)[list(part.fast_indices)])

    @classmethod
    def from_map(cls, matrix):
        return cls(EQUILIBRIUM, equilibrium_map=matrix)


def _check_len(v, n, what):
    if v.shape[0] != n:
        raise DimensionError(f"{what} has length {v.shape[0]}, expected {n}")


def restrict(u, part):
    u = np.asarray(u, dtype=float).reshape(-1)
    _check_len(u, part.dim, "micro state")
    return u[list(part.slow_indices)]


def fast_part(u, part):
    u = np.asarray(u, dtype=float).reshape(-1)
    _check_len(u, part.dim, "micro state")
    return u[list(part.fast_indices)]


def lift(X, spec, part):
    X = np.asarray(X, dtype=float).reshape(-1)
    _check_len(X, part.n_slow, "macro state")
    if spec.variant == EQUILIBRIUM:
        if spec.equilibrium_map.shape != (len(part.fast_indices), part.n_slow):
            raise DimensionError(
                f"equilibrium map shape {spec.equilibrium_map.shape} does not fit partition "
                f"({len(part.fast_indices)} fast, {part.n_slow} slow)"
            )
        fast = spec.equilibrium_map @ X
    else:
        fast = spec.initial_fast
        _check_len(fast, len(part.fast_indices), "initial fast state")
    u = np.empty(part.dim)
    u[list(part.slow_indices)] = X
    u[list(part.fast_indices)] = fast
    return u


def match_states(X, u, part):
    X = np.asarray(X, dtype=float).reshape(-1)
    _check_len(X, part.n_slow, "macro state")
    out = np.array(u, dtype=float).reshape(-1)
    _check_len(out, part.dim, "micro state")
    out[list(part.slow_indices)] = X
    return out
