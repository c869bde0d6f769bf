"""Euler-Maruyama ensembles of the slow-fast OU SDE.

Random numbers come from Philox4x32-10 (Salmon et al., "Parallel random
numbers: as easy as 1, 2, 3", SC'11), a counter-based generator: the block
for path ``i`` at step ``j`` is ``philox(counter=(i_lo, i_hi, j, stream),
key=(seed_lo, seed_hi))``.  Every path therefore sees the same draws no
matter how paths are chunked or scheduled.  Each block yields two uniforms
with 53-bit resolution, mapped to standard normals by the inverse normal
CDF.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .errors import DomainError, StabilityError
from .oumodel import CovarianceState, MeanState

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK32 = np.uint64(0xFFFFFFFF)
_SHIFT32 = np.uint64(32)

STREAM_INCREMENTS = 0
STREAM_INITIAL = 1


def philox4x32(counter, key, rounds=10):
    """Philox4x32 bijection on arrays of 32-bit words.

    ``counter`` is a sequence of four arrays (or ints), ``key`` of two; all
    broadcast together.  Returns four ``uint64`` arrays holding 32-bit
    outputs.
    """
    c0, c1, c2, c3 = (np.asarray(c, dtype=np.uint64) & _MASK32 for c in counter)
    k0, k1 = (np.asarray(k, dtype=np.uint64) & _MASK32 for k in key)
    for r in range(rounds):
        if r:
            k0 = (k0 + _W0) & _MASK32
            k1 = (k1 + _W1) & _MASK32
        p0 = _M0 * c0
        p1 = _M1 * c2
        hi0, lo0 = p0 >> _SHIFT32, p0 & _MASK32
        hi1, lo1 = p1 >> _SHIFT32, p1 & _MASK32
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
    return c0, c1, c2, c3


class CounterRNG:
    """Standard normals addressed by (path, step, stream) under a 64-bit seed."""

    def __init__(self, seed):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self._key = (seed & 0xFFFFFFFF, seed >> 32)

    def uniforms(self, paths, step, stream=STREAM_INCREMENTS):
        """Two uniforms in (0, 1) per path, shape ``(len(paths), 2)``."""
        paths = np.asarray(paths, dtype=np.uint64)
        lo = paths & _MASK32
        hi = paths >> _SHIFT32
        x0, x1, x2, x3 = philox4x32((lo, hi, step, stream), self._key)
        # 27 + 26 bits -> 53-bit integer, offset by 1/2 ulp to stay inside (0, 1)
        a = (x0 >> np.uint64(5)) * np.uint64(1 << 26) + (x1 >> np.uint64(6))
        b = (x2 >> np.uint64(5)) * np.uint64(1 << 26) + (x3 >> np.uint64(6))
        scale = 1.0 / 9007199254740992.0
        return np.stack([(a.astype(float) + 0.5) * scale, (b.astype(float) + 0.5) * scale], axis=1)

    def normals(self, paths, step, stream=STREAM_INCREMENTS):
        return ndtri(self.uniforms(paths, step, stream))


@dataclass(frozen=True)
class EnsembleConfig:
    paths: int
    dt: float
    T: float
    seed: int = 0
    chunk: int = 1 << 16

    def __post_init__(self):
        if self.paths < 1000:
            raise DomainError(f"need at least 1000 paths, got {self.paths}")
        if not self.dt > 0.0 or not self.T > 0.0:
            raise DomainError(f"dt and T must be positive, got dt={self.dt}, T={self.T}")

    @property
    def n_steps(self):
        n = int(round(self.T / self.dt))
        if n < 1 or abs(n * self.dt - self.T) > 1e-9 * self.T:
            raise DomainError(f"T={self.T} is not an integer multiple of dt={self.dt}")
        return n


@dataclass(frozen=True)
class EmpiricalMoments:
    mean: MeanState
    cov: CovarianceState
    std_errors: dict

    def as_vector(self):
        return np.concatenate([self.mean.as_vector(), self.cov.as_vector()])


@dataclass(frozen=True)
class InitialDistribution:
    """Gaussian initial law; a zero covariance means a deterministic start."""

    mean: tuple
    cov: tuple = (0.0, 0.0, 0.0)

    @classmethod
    def from_micro(cls, initial_micro):
        m_x, m_y, s_x, s_xy, s_y = (float(v) for v in initial_micro)
        return cls((m_x, m_y), (s_x, s_xy, s_y))

    def sqrt_cov(self):
        s_x, s_xy, s_y = self.cov
        S = np.array([[s_x, s_xy], [s_xy, s_y]])
        w, V = np.linalg.eigh(S)
        if w.min() < -1e-12 * max(1.0, abs(w).max()):
            raise DomainError(f"initial covariance is not positive semidefinite: {self.cov}")
        return V @ np.diag(np.sqrt(np.clip(w, 0.0, None))) @ V.T


def em_step(p, state, dt, noise):
    """One Euler-Maruyama step: ``x + D x dt + sigma diag(1, eps^-1/2) sqrt(dt) xi``.

    ``state`` and ``noise`` may be ``(2,)`` or ``(n, 2)`` arrays.
    """
    x = np.asarray(state, dtype=float)
    xi = np.asarray(noise, dtype=float)
    D = p.drift_matrix()
    diff = p.sigma * math.sqrt(dt) * np.array([1.0, 1.0 / math.sqrt(p.eps)])
    return x + dt * (x @ D.T) + xi * diff


def simulate_ensemble(p, cfg, init):
    """Empirical mean and covariance at time ``cfg.T`` of ``cfg.paths`` EM paths."""
    if cfg.dt > p.eps / 10.0:
        raise StabilityError(
            f"dt/eps = {cfg.dt / p.eps:.3g} exceeds the stability limit 0.1 "
            f"(dt={cfg.dt:g}, eps={p.eps:g})"
        )
    n_steps = cfg.n_steps
    rng = CounterRNG(cfg.seed)
    root = init.sqrt_cov()
    m0 = np.asarray(init.mean, dtype=float)

    finals = np.empty((cfg.paths, 2))
    for start in range(0, cfg.paths, cfg.chunk):
        ids = np.arange(start, min(start + cfg.chunk, cfg.paths), dtype=np.uint64)
        x = m0 + rng.normals(ids, 0, STREAM_INITIAL) @ root.T
        for j in range(n_steps):
            x = em_step(p, x, cfg.dt, rng.normals(ids, j, STREAM_INCREMENTS))
        if not np.all(np.isfinite(x)):
            raise StabilityError(
                f"non-finite path values at T={cfg.T} (dt/eps = {cfg.dt / p.eps:.3g})"
            )
        finals[start:start + len(ids)] = x
    return moments_from_samples(finals)


def moments_from_samples(x):
    """Sample mean/covariance (ddof=1) with standard errors of each estimate."""
    n = x.shape[0]
    mean = x.mean(axis=0)
    dev = x - mean
    cov = dev.T @ dev / (n - 1)
    prods = {
        "s_x": dev[:, 0] * dev[:, 0],
        "s_xy": dev[:, 0] * dev[:, 1],
        "s_y": dev[:, 1] * dev[:, 1],
    }
    se = {
        "m_x": math.sqrt(cov[0, 0] / n),
        "m_y": math.sqrt(cov[1, 1] / n),
    }
    for name, v in prods.items():
        se[name] = float(np.std(v, ddof=1) / math.sqrt(n))
    return EmpiricalMoments(
        MeanState(float(mean[0]), float(mean[1])),
        CovarianceState(float(cov[0, 0]), float(cov[0, 1]), float(cov[1, 1])),
        se,
    )
