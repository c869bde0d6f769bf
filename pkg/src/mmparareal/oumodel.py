"""Moment equations of the two-dimensional slow-fast Ornstein-Uhlenbeck SDE.

The SDE is

    dx = (alpha x + beta y) dt + sigma dW_1
    dy = (gamma x + zeta y) / eps dt + sigma / sqrt(eps) dW_2

Its mean obeys a homogeneous slow-fast linear ODE; its covariance
``(s_x, s_xy, s_y)`` obeys the affine ODE ``S' = B S + b``.  The helpers
here build both systems, their averaged (reduced) counterparts and the
scalar decay rates that control the reduction error.
"""

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import AssumptionViolation, DomainError, SingularMatrixError
from .multiscale import AffineSystem, MultiscaleLinearSystem, ReducedModel
from . import smalllin

LAMBDA_TOL = 1e-12
COV_SLACK = 1e-12


@dataclass(frozen=True)
class OUParams:
    """Drift/diffusion coefficients of the OU SDE and its scale separation.

    Only cheap sanity checks run here; the dissipativity assumptions are
    checked where they are needed (``validate`` / ``check_assumptions``),
    so that violating parameter sets can still be reported on.
    """

    alpha: float
    beta: float
    gamma: float
    zeta: float
    sigma: float
    eps: float = 0.1

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "zeta", "sigma", "eps"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise DomainError(f"{name} must be finite, got {v}")
            object.__setattr__(self, name, v)
        if self.sigma < 0.0:
            raise DomainError(f"sigma must be non-negative, got {self.sigma}")
        if not 0.0 < self.eps < 1.0:
            raise DomainError(f"eps must lie in (0, 1), got {self.eps}")

    def with_eps(self, eps):
        return replace(self, eps=eps)

    def drift_matrix(self):
        e = self.eps
        return np.array([[self.alpha, self.beta], [self.gamma / e, self.zeta / e]])

    def validate(self):
        """Raise :class:`AssumptionViolation` unless the model assumptions hold at ``eps``."""
        if not self.zeta < 0.0:
            raise AssumptionViolation(f"zeta must be negative for dissipative fast dynamics, got {self.zeta}")
        mu = smalllin.min_real_eigenvalue(a_sigma(self, self.eps))
        if not mu > 0.0:
            raise AssumptionViolation(f"A_sigma({self.eps}) has an eigenvalue with real part {mu:.6g} <= 0")
        lam = lambda_sigma(self)
        lam_eps = lambda_sigma_eps(self, self.eps)
        if abs(lam) <= LAMBDA_TOL or abs(lam_eps) <= LAMBDA_TOL:
            raise AssumptionViolation(
                f"reduced decay rates must be nonzero (lambda_sigma={lam:.6g}, lambda_sigma_eps={lam_eps:.6g})"
            )
        return self


TEST_PARAMS = OUParams(alpha=-1.0, beta=-1.0, gamma=0.1, zeta=-1.0, sigma=0.5, eps=0.1)


@dataclass(frozen=True)
class MeanState:
    m_x: float
    m_y: float

    def as_vector(self):
        return np.array([self.m_x, self.m_y])


@dataclass(frozen=True)
class CovarianceState:
    """Entries of a symmetric 2x2 covariance, checked up to roundoff slack."""

    s_x: float
    s_xy: float
    s_y: float

    def __post_init__(self):
        vals = (self.s_x, self.s_xy, self.s_y)
        if not all(math.isfinite(v) for v in vals):
            raise DomainError(f"covariance entries must be finite, got {vals}")
        if self.s_x < -COV_SLACK or self.s_y < -COV_SLACK:
            raise DomainError(f"variances must be non-negative, got s_x={self.s_x}, s_y={self.s_y}")
        if self.s_xy**2 > self.s_x * self.s_y + COV_SLACK:
            raise DomainError(f"not a covariance: s_xy^2 = {self.s_xy**2:.6g} > s_x s_y = {self.s_x * self.s_y:.6g}")

    def as_vector(self):
        return np.array([self.s_x, self.s_xy, self.s_y])

    def as_matrix(self):
        return np.array([[self.s_x, self.s_xy], [self.s_xy, self.s_y]])


@dataclass(frozen=True)
class ConditionalEquilibrium:
    mean_slope: float
    variance: float

    def __post_init__(self):
        if self.variance < 0.0:
            raise DomainError(f"conditional variance must be non-negative, got {self.variance}")


def conditional_equilibrium(p):
    """Invariant law of the fast variable with the slow variable frozen at ``x``.

    For ``dy = (gamma x + zeta y)/eps dt + sigma/sqrt(eps) dW`` with
    ``zeta < 0`` this is ``N(-gamma x / zeta, sigma^2 / (-2 zeta))``, so
    ``mean_slope = -gamma / zeta``. Averaging ``beta y`` against it gives the
    reduced drift ``alpha - beta gamma / zeta``.
    """
    if not p.zeta < 0.0:
        raise AssumptionViolation(f"zeta must be negative, got {p.zeta}")
    return ConditionalEquilibrium(mean_slope=-p.gamma / p.zeta, variance=p.sigma**2 / (-2.0 * p.zeta))


def mean_system(p):
    """Mean ODE as a slow-fast system: a=alpha, p=(beta), q=(gamma), A=(-zeta)."""
    if not p.zeta < 0.0:
        raise AssumptionViolation(f"zeta must be negative for the mean system, got {p.zeta}")
    return MultiscaleLinearSystem(a=p.alpha, p=[p.beta], q=[p.gamma], A=[[-p.zeta]], eps=p.eps)


def covariance_system(p):
    a, b, g, z, e = p.alpha, p.beta, p.gamma, p.zeta, p.eps
    M = np.array(
        [
            [2 * a, 2 * b, 0.0],
            [g / e, a + z / e, b],
            [0.0, 2 * g / e, 2 * z / e],
        ]
    )
    s2 = p.sigma**2
    return AffineSystem(M, np.array([s2, 0.0, s2 / e]))


def a_sigma(p, eps):
    return -np.array(
        [
            [p.alpha * eps + p.zeta, p.beta * eps],
            [2 * p.gamma, 2 * p.zeta],
        ]
    )


def p_sigma(p):
    return np.array([2 * p.beta, 0.0])


def q_sigma(p):
    return np.array([p.gamma, 0.0])


def lambda_sigma(p):
    """Decay rate ``2(alpha - beta gamma / zeta)`` of the averaged variance."""
    if p.zeta == 0.0:
        raise DomainError("zeta must be nonzero")
    return 2.0 * (p.alpha - p.beta * p.gamma / p.zeta)


def lambda_sigma_eps(p, eps):
    """Schur complement ``2 alpha + p_S^T A_S(eps)^{-1} q_S`` in closed form."""
    den = (eps * p.alpha + p.zeta) * p.zeta - p.gamma * p.beta * eps
    if den == 0.0:
        raise SingularMatrixError(f"A_sigma({eps}) is singular", pivot=0.0)
    return 2.0 * p.alpha - 2.0 * p.beta * p.gamma * p.zeta / den


def lambda_sigma_eps_solve(p, eps):
    """Same quantity as :func:`lambda_sigma_eps`, via a linear solve."""
    return float(2.0 * p.alpha + p_sigma(p) @ smalllin.solve(a_sigma(p, eps), q_sigma(p)))


def delta_lambda(p, eps):
    """``lambda_sigma - lambda_sigma_eps`` written as ``-(2 beta gamma/zeta) A eps / (A eps + B)``."""
    A = p.alpha * p.zeta - p.gamma * p.beta
    B = p.zeta**2
    den = A * eps + B
    if den == 0.0 or p.zeta == 0.0:
        raise SingularMatrixError(f"A_sigma({eps}) is singular", pivot=0.0)
    return -(2.0 * p.beta * p.gamma / p.zeta) * (A * eps) / den


def b_sigma_inverse_schur(p, eps):
    """Inverse of the covariance matrix B assembled from its 2x2 fast block."""
    As = a_sigma(p, eps)
    Ainv = smalllin.inverse(As)
    lam = lambda_sigma_eps(p, eps)
    if abs(lam) <= LAMBDA_TOL:
        raise SingularMatrixError(f"lambda_sigma_eps({eps}) vanishes", pivot=abs(lam))
    ps = p_sigma(p)
    qs = q_sigma(p)
    Aq = Ainv @ qs
    pA = ps @ Ainv
    out = np.empty((3, 3))
    out[0, 0] = 1.0
    out[0, 1:] = eps * pA
    out[1:, 0] = Aq
    out[1:, 1:] = -eps * Ainv * lam + eps * np.outer(Aq, pA)
    return out / lam


def reduced_mean_model(p):
    if p.zeta == 0.0:
        raise DomainError("zeta must be nonzero")
    return ReducedModel(p.alpha - p.beta * p.gamma / p.zeta, 0.0)


def reduced_variance_model(p):
    return ReducedModel(lambda_sigma(p), p.sigma**2)


def steady_state_covariance(p, eps=None):
    eps = p.eps if eps is None else eps
    sys = covariance_system(p.with_eps(eps))
    s = -smalllin.solve(sys.M, sys.b)
    return CovarianceState(*s)


@dataclass(frozen=True)
class AssumptionReport:
    eps_grid: tuple
    min_real_eig_ASigma: tuple
    lambda_sigma_eps: tuple
    lambda_sigma: float
    all_satisfied: bool

    @property
    def mu_sigma_minus(self):
        return min(self.min_real_eig_ASigma)

    def failures(self):
        """Human-readable list of violated conditions."""
        out = []
        if abs(self.lambda_sigma) <= LAMBDA_TOL or not math.isfinite(self.lambda_sigma):
            out.append(f"lambda_sigma = {self.lambda_sigma:.6g}")
        for e, mu, lam in zip(self.eps_grid, self.min_real_eig_ASigma, self.lambda_sigma_eps):
            if not mu > 0.0:
                out.append(f"eps={e:g}: min Re eig(A_sigma) = {mu:.6g}")
            if not abs(lam) > LAMBDA_TOL:
                out.append(f"eps={e:g}: lambda_sigma_eps = {lam:.6g}")
        return out

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["eps", "min_real_eig_a_sigma", "lambda_sigma_eps"])
            for row in zip(self.eps_grid, self.min_real_eig_ASigma, self.lambda_sigma_eps):
                w.writerow([repr(float(v)) for v in row])
            fh.write(f"# lambda_sigma={float(self.lambda_sigma)!r}\n")

    @classmethod
    def from_csv(cls, path):
        eps, mu, lam = [], [], []
        lam_sigma = float("nan")
        with open(path, newline="") as fh:
            lines = fh.read().splitlines()
        for line in lines[1:]:
            if line.startswith("# lambda_sigma="):
                lam_sigma = float(line.split("=", 1)[1])
            elif line:
                a, b, c = line.split(",")
                eps.append(float(a))
                mu.append(float(b))
                lam.append(float(c))
        return _make_report(eps, mu, lam, lam_sigma)


def _make_report(eps, mu, lam, lam_sigma):
    ok = (
        math.isfinite(lam_sigma)
        and abs(lam_sigma) > LAMBDA_TOL
        and all(m > 0.0 for m in mu)
        and all(abs(v) > LAMBDA_TOL for v in lam)
    )
    return AssumptionReport(tuple(eps), tuple(mu), tuple(lam), lam_sigma, bool(ok))


def check_assumptions(p, eps_grid):
    """Evaluate the model assumptions over ``eps_grid`` without raising on violations."""
    grid = [float(e) for e in eps_grid]
    if not grid:
        raise DomainError("eps_grid must be nonempty")
    if any(not 0.0 < e <= 1.0 for e in grid):
        raise DomainError("eps_grid values must lie in (0, 1]")
    mus, lams = [], []
    for e in grid:
        mus.append(smalllin.min_real_eigenvalue(a_sigma(p, e)))
        try:
            lams.append(lambda_sigma_eps(p, e))
        except SingularMatrixError:
            lams.append(float("nan"))
    try:
        lam = lambda_sigma(p)
    except DomainError:
        lam = float("nan")
    lams_ok = [v if math.isfinite(v) else 0.0 for v in lams]
    return _make_report(grid, mus, lams_ok, lam)
