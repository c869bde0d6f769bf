"""Experiment configuration, loaded from a flat JSON object."""

import json
from dataclasses import dataclass, fields

import numpy as np

from ..coupling import LIFTING_VARIANTS
from ..errors import ConfigError, DomainError
from ..oumodel import OUParams

DEFAULT_EPS_GRID = tuple(float(e) for e in np.geomspace(1e-5, 1e-2, 13))
DEFAULT_INITIAL_MICRO = (100.0, 100.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a sweep needs.  ``initial_micro`` is ``(m_x, m_y, s_x, s_xy, s_y)``."""

    alpha: float = -1.0
    beta: float = -1.0
    gamma: float = 0.1
    zeta: float = -1.0
    sigma: float = 0.5
    eps_grid: tuple = DEFAULT_EPS_GRID
    T: float = 10.0
    N: int = 10
    K: int = 10
    lifting: str = "initial_condition"
    initial_micro: tuple = DEFAULT_INITIAL_MICRO
    seed: int = 0

    def __post_init__(self):
        grid = tuple(float(e) for e in self.eps_grid)
        if not grid:
            raise DomainError("eps_grid must be nonempty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise DomainError("eps_grid must be strictly ascending")
        if any(not 0.0 < e < 1.0 for e in grid):
            raise DomainError("eps_grid values must lie in (0, 1)")
        init = tuple(float(v) for v in self.initial_micro)
        if len(init) != 5:
            raise DomainError(f"initial_micro needs 5 entries (m_x, m_y, s_x, s_xy, s_y), got {len(init)}")
        if int(self.N) < 1 or int(self.K) < 0:
            raise DomainError(f"need N >= 1 and K >= 0, got N={self.N}, K={self.K}")
        if self.lifting not in LIFTING_VARIANTS:
            raise DomainError(f"lifting must be one of {LIFTING_VARIANTS}, got {self.lifting!r}")
        object.__setattr__(self, "eps_grid", grid)
        object.__setattr__(self, "initial_micro", init)
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "K", int(self.K))
        object.__setattr__(self, "T", float(self.T))
        object.__setattr__(self, "seed", int(self.seed))

    def ou(self, eps):
        return OUParams(self.alpha, self.beta, self.gamma, self.zeta, self.sigma, eps)

    @property
    def mean0(self):
        return np.array(self.initial_micro[:2])

    @property
    def cov0(self):
        return np.array(self.initial_micro[2:])

    def to_dict(self):
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["eps_grid"] = list(self.eps_grid)
        out["initial_micro"] = list(self.initial_micro)
        return out


def config_from_dict(data):
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    try:
        return ExperimentConfig(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config: {exc}") from exc


def load_config(path):
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return config_from_dict(data)
