"""Linear and affine slow-fast systems, their reduced models and exact flows."""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AssumptionViolation, DimensionError, DomainError
from . import smalllin


@dataclass(frozen=True, eq=False)
class AffineSystem:
    """Constant-coefficient ODE ``du/dt = M u + b``."""

    M: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        M = smalllin.as_matrix(self.M)
        if M.shape[0] != M.shape[1]:
            raise DimensionError(f"system matrix must be square, got {M.shape}")
        b = smalllin.as_vector(self.b)
        if b.shape[0] != M.shape[0]:
            raise DimensionError(f"inhomogeneity length {b.shape[0]} != dimension {M.shape[0]}")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "b", b)

    @property
    def dim(self):
        return self.M.shape[0]

    @property
    def homogeneous(self):
        return not np.any(self.b)

    @classmethod
    def linear(cls, M):
        M = smalllin.as_matrix(M)
        return cls(M, np.zeros(M.shape[0]))


@dataclass(frozen=True, eq=False)
class MultiscaleLinearSystem:
    """Slow-fast system ``x' = a x + p.y``, ``y' = (q x - A y) / eps``.

    ``mu_minus`` is computed at construction as the smallest real part of
    the eigenvalues of ``A``; it must be positive.
    """

    a: float
    p: np.ndarray
    q: np.ndarray
    A: np.ndarray
    eps: float
    mu_minus: float = field(init=False)

    def __post_init__(self):
        p = smalllin.as_vector(self.p)
        q = smalllin.as_vector(self.q)
        A = smalllin.as_matrix(self.A)
        d = p.shape[0]
        if q.shape[0] != d or A.shape != (d, d):
            raise DimensionError(
                f"inconsistent block sizes: p {p.shape}, q {q.shape}, A {A.shape}"
            )
        if not 0.0 < self.eps < 1.0:
            raise DomainError(f"eps must lie in (0, 1), got {self.eps}")
        if d <= 3:
            mu = smalllin.min_real_eigenvalue(A)
        else:
            mu = float(np.min(np.linalg.eigvals(A).real))
        if not mu > 0.0:
            raise AssumptionViolation(
                f"fast block is not dissipative: min Re(eig(A)) = {mu:.6g}"
            )
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "eps", float(self.eps))
        object.__setattr__(self, "mu_minus", float(mu))

    @property
    def fast_dim(self):
        return self.p.shape[0]

    def equilibrium_map(self):
        """The matrix ``A^{-1} q`` (as a column) sending a slow value to its fast equilibrium."""
        return smalllin.solve(self.A, self.q).reshape(-1, 1)

    def as_affine(self):
        return AffineSystem.linear(assemble_full_matrix(self))

    def reduced_model(self):
        return ReducedModel(reduced_coefficient(self), 0.0)


@dataclass(frozen=True)
class ReducedModel:
    """Scalar macro dynamics ``X' = lam X + inhom``."""

    lam: float
    inhom: float = 0.0

    def __post_init__(self):
        if self.inhom != 0.0 and self.lam == 0.0:
            raise DomainError("reduced model with forcing needs a nonzero decay coefficient")

    def as_affine(self):
        return AffineSystem([[self.lam]], [self.inhom])

    def steady_state(self):
        return -self.inhom / self.lam

    def flow(self, X0, t):
        """Closed-form scalar solution at time ``t``."""
        if self.inhom == 0.0:
            return math.exp(self.lam * t) * X0
        ss = self.steady_state()
        return math.exp(self.lam * t) * (X0 - ss) + ss


def reduced_coefficient(sys):
    """Averaged slow coefficient ``a + p^T A^{-1} q``."""
    return float(sys.a + sys.p @ smalllin.solve(sys.A, sys.q))


def assemble_full_matrix(sys):
    d = sys.fast_dim
    M = np.empty((d + 1, d + 1))
    M[0, 0] = sys.a
    M[0, 1:] = sys.p
    M[1:, 0] = sys.q / sys.eps
    M[1:, 1:] = -sys.A / sys.eps
    return M


def exact_flow(sys, u, dt):
    """Exact solution of ``u' = M u + b`` after time ``dt``."""
    u = smalllin.as_vector(u)
    if u.shape[0] != sys.dim:
        raise DimensionError(f"state length {u.shape[0]} != system dimension {sys.dim}")
    if not dt >= 0.0:
        raise DomainError(f"dt must be non-negative, got {dt}")
    E = smalllin.mat_exp(sys.M, dt)
    if sys.homogeneous:
        return E @ u
    shift = smalllin.solve(sys.M, sys.b)
    return E @ (u + shift) - shift


def sample_trajectory(sys, u0, dt, n_steps):
    """States at ``t_n = n dt`` for ``n = 0..n_steps`` as an ``(n_steps+1, dim)`` array."""
    u0 = smalllin.as_vector(u0)
    out = np.empty((n_steps + 1, u0.shape[0]))
    out[0] = u0
    if n_steps == 0:
        return out
    E = smalllin.mat_exp(sys.M, dt)
    if sys.homogeneous:
        for n in range(n_steps):
            out[n + 1] = E @ out[n]
        return out
    shift = smalllin.solve(sys.M, sys.b)
    for n in range(n_steps):
        out[n + 1] = E @ (out[n] + shift) - shift
    return out


def boundary_layer_time(eps, mu_minus):
    """Length ``(2 eps / mu_minus) ln(1/eps)`` of the initial fast transient."""
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    if not mu_minus > 0.0:
        raise DomainError(f"mu_minus must be positive, got {mu_minus}")
    return 2.0 * eps / mu_minus * math.log(1.0 / eps)


def model_error_sup(micro_slow, reduced):
    """Max absolute difference between two trajectories sampled on the same grid."""
    a = np.asarray(micro_slow, dtype=float)
    b = np.asarray(reduced, dtype=float)
    if a.shape != b.shape:
        raise DimensionError(f"trajectory grids differ: {a.shape} vs {b.shape}")
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b)))
