"""Micro-macro Parareal with exact affine propagators.

Iteration 0 runs the coarse model serially and lifts every coarse value to
a micro state.  Each later iteration applies the fine propagator to all
micro iterates of the previous iteration (independent, may run
concurrently), then sweeps serially:

    X[k+1, n+1] = C(X[k+1, n]) + R F(u[k, n]) - C(X[k, n])
    u[k+1, n+1] = M(X[k+1, n+1], F(u[k, n]))
"""

import logging
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .coupling import LiftingSpec, SlowFastPartition, lift, match_states, restrict
from .errors import DimensionError, DomainError
from .multiscale import AffineSystem, boundary_layer_time
from . import smalllin

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PropagatorSpec:
    """Exact time-``dt`` flow of an affine system, ``u -> A u + B``."""

    system: AffineSystem
    dt: float

    def __post_init__(self):
        if not self.dt > 0.0:
            raise DomainError(f"dt must be positive, got {self.dt}")

    @cached_property
    def A(self):
        return smalllin.mat_exp(self.system.M, self.dt)

    @cached_property
    def B(self):
        if self.system.homogeneous:
            return np.zeros(self.system.dim)
        shift = smalllin.solve(self.system.M, self.system.b)
        return self.A @ shift - shift

    @property
    def dim(self):
        return self.system.dim

    def __call__(self, u):
        return self.A @ u + self.B


@dataclass(frozen=True)
class PararealConfig:
    T: float
    N: int
    K: int
    lifting: LiftingSpec
    partition: SlowFastPartition

    def __post_init__(self):
        if self.N < 1:
            raise DomainError(f"N must be >= 1, got {self.N}")
        if self.K < 0:
            raise DomainError(f"K must be >= 0, got {self.K}")
        if not self.T > 0.0:
            raise DomainError(f"T must be positive, got {self.T}")

    @property
    def dt(self):
        return self.T / self.N

    def check_boundary_layer(self, eps, mu_minus):
        """Warn (and return False) when the coarse step is inside the boundary layer."""
        t_bl = boundary_layer_time(eps, mu_minus)
        if self.dt <= t_bl:
            warnings.warn(
                f"coarse step {self.dt:g} does not exceed the boundary-layer time {t_bl:.4g} "
                f"(eps={eps:g}, mu_minus={mu_minus:.4g}); convergence orders need not hold",
                RuntimeWarning,
                stacklevel=2,
            )
            return False
        return True


@dataclass(frozen=True, eq=False)
class PararealTrace:
    """Dense iterates: ``macro[k, n]``, ``micro[k, n]`` and the serial ``reference[n]``."""

    macro: np.ndarray
    micro: np.ndarray
    reference: np.ndarray
    partition: SlowFastPartition
    dt: float

    @property
    def K(self):
        return self.macro.shape[0] - 1

    @property
    def N(self):
        return self.macro.shape[1] - 1

    def macro_errors(self):
        ref = self.reference[:, list(self.partition.slow_indices)]
        return self.macro - ref[None, :, :]

    def micro_errors(self):
        return self.micro - self.reference[None, :, :]


@dataclass(frozen=True)
class ErrorSummary:
    macro_sup: tuple
    micro_sup: tuple


def serial_reference(F, u0, N):
    """Fine trajectory ``u_{n+1} = F(u_n)`` for ``n = 0..N-1``."""
    u0 = smalllin.as_vector(u0)
    if u0.shape[0] != F.dim:
        raise DimensionError(f"initial state length {u0.shape[0]} != propagator dimension {F.dim}")
    out = np.empty((N + 1, F.dim))
    out[0] = u0
    for n in range(N):
        out[n + 1] = F(out[n])
    return out


def run_micro_macro(F, C, cfg, u0, X0=None, executor=None):
    """Run ``cfg.K`` micro-macro Parareal iterations and return every iterate.

    ``executor`` is an optional :class:`concurrent.futures.Executor` used for
    the fine propagations within one iteration; results are gathered in
    index order so the trace does not depend on scheduling.
    """
    part = cfg.partition
    u0 = smalllin.as_vector(u0)
    if F.dim != part.dim or u0.shape[0] != part.dim:
        raise DimensionError(
            f"fine propagator ({F.dim}) / initial state ({u0.shape[0]}) do not match partition ({part.dim})"
        )
    if C.dim != part.n_slow:
        raise DimensionError(f"coarse propagator dimension {C.dim} != slow dimension {part.n_slow}")
    if abs(F.dt - cfg.dt) > 1e-12 * cfg.dt or abs(C.dt - cfg.dt) > 1e-12 * cfg.dt:
        raise DomainError(f"propagator steps ({F.dt}, {C.dt}) differ from T/N = {cfg.dt}")
    R_u0 = restrict(u0, part)
    if X0 is None:
        X0 = R_u0
    X0 = smalllin.as_vector(X0)
    if X0.shape != R_u0.shape or not np.array_equal(X0, R_u0):
        raise DimensionError(f"macro initial value {X0} must equal the restricted micro initial value {R_u0}")

    N, K = cfg.N, cfg.K
    macro = np.empty((K + 1, N + 1, part.n_slow))
    micro = np.empty((K + 1, N + 1, part.dim))

    macro[0, 0] = X0
    micro[0, 0] = u0
    coarse_prev = np.empty((N, part.n_slow))
    for n in range(N):
        coarse_prev[n] = C(macro[0, n])
        macro[0, n + 1] = coarse_prev[n]
        micro[0, n + 1] = lift(macro[0, n + 1], cfg.lifting, part)

    for k in range(K):
        states = [micro[k, n] for n in range(N)]
        if executor is None:
            fine = [F(s) for s in states]
        else:
            fine = list(executor.map(F, states))
        macro[k + 1, 0] = X0
        micro[k + 1, 0] = u0
        coarse_new = np.empty_like(coarse_prev)
        for n in range(N):
            coarse_new[n] = C(macro[k + 1, n])
            macro[k + 1, n + 1] = coarse_new[n] + restrict(fine[n], part) - coarse_prev[n]
            micro[k + 1, n + 1] = match_states(macro[k + 1, n + 1], fine[n], part)
        coarse_prev = coarse_new

    reference = serial_reference(F, u0, N)
    return PararealTrace(macro, micro, reference, part, cfg.dt)


def error_summary(trace, part=None):
    """Per-iteration sup over the coarse grid of the macro and micro errors (2-norm)."""
    part = trace.partition if part is None else part
    ref_slow = trace.reference[:, list(part.slow_indices)]
    E = trace.macro - ref_slow[None]
    e = trace.micro - trace.reference[None]
    macro_sup = np.max(np.linalg.norm(E, axis=2), axis=1)
    micro_sup = np.max(np.linalg.norm(e, axis=2), axis=1)
    return ErrorSummary(tuple(float(v) for v in macro_sup), tuple(float(v) for v in micro_sup))


def _as_stack(errors, width):
    arr = np.asarray(errors, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.shape[1] != width:
        raise DimensionError(f"error entries have width {arr.shape[1]}, expected {width}")
    return arr


def error_recursion_oracle(A_F, A_C, part, micro_errors_k, macro_errors_k):
    """Predict the macro errors of iteration k+1 from those of iteration k.

    For affine propagators ``F u = A_F u + B_F`` and ``C X = A_C X + B_C``
    the inhomogeneities cancel and

        E^{k+1}_n = R A_F e^k_{n-1}
                    + sum_{p=1}^{n-1} A_C^{n-p} (R A_F e^k_{p-1} - E^k_p)

    with ``E^{k+1}_0 = 0``.  Evaluated as an explicit sum, independent of
    the sweep in :func:`run_micro_macro`.
    """
    A_F = smalllin.as_matrix(A_F)
    A_C = smalllin.as_matrix(A_C)
    if A_F.shape != (part.dim, part.dim) or A_C.shape != (part.n_slow, part.n_slow):
        raise DimensionError(f"propagator matrices {A_F.shape}, {A_C.shape} do not fit the partition")
    e = _as_stack(micro_errors_k, part.dim)
    E = _as_stack(macro_errors_k, part.n_slow)
    if e.shape[0] != E.shape[0]:
        raise DimensionError(f"micro ({e.shape[0]}) and macro ({E.shape[0]}) error lists differ in length")
    R = part.restriction_matrix()
    RAF = R @ A_F
    n_pts = e.shape[0]
    powers = [np.eye(part.n_slow)]
    for _ in range(n_pts):
        powers.append(powers[-1] @ A_C)
    out = np.zeros_like(E)
    for n in range(1, n_pts):
        acc = RAF @ e[n - 1]
        for p in range(1, n):
            acc = acc + powers[n - p] @ (RAF @ e[p - 1] - E[p])
        out[n] = acc
    return out


def solution_recursion(A_F, B_F, A_C, part, micro_k, macro_k):
    """Macro iterate k+1 written directly in terms of iterate k.

    ``U^{k+1}_n = R F(u^k_{n-1}) + sum_{p=1}^{n-1} A_C^{n-p} (R F(u^k_{p-1}) - U^k_p)``
    with ``F(u) = A_F u + B_F``; the coarse inhomogeneity cancels.
    """
    A_F = smalllin.as_matrix(A_F)
    A_C = smalllin.as_matrix(A_C)
    B_F = smalllin.as_vector(B_F)
    u = _as_stack(micro_k, part.dim)
    U = _as_stack(macro_k, part.n_slow)
    R = part.restriction_matrix()
    RF = (u @ A_F.T + B_F) @ R.T
    out = np.empty_like(U)
    out[0] = U[0]
    power = {0: np.eye(part.n_slow)}
    for j in range(1, U.shape[0]):
        power[j] = power[j - 1] @ A_C
    for n in range(1, U.shape[0]):
        acc = RF[n - 1].copy()
        for p in range(1, n):
            acc = acc + power[n - p] @ (RF[p - 1] - U[p])
        out[n] = acc
    return out


def consistency_gap(trace):
    """Largest ``|X^k_n - R u^k_n|`` over all iterates."""
    slow = trace.micro[:, :, list(trace.partition.slow_indices)]
    return float(np.max(np.abs(trace.macro - slow)))
