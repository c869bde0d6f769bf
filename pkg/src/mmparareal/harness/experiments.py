"""Epsilon sweeps, slope fits and the Monte-Carlo moment check."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .. import oumodel
from ..coupling import EQUILIBRIUM, LiftingSpec, SlowFastPartition
from ..errors import AssumptionViolation, InsufficientDataError
from ..multiscale import exact_flow, sample_trajectory
from ..parareal import PararealConfig, PropagatorSpec, error_summary, run_micro_macro
from ..sampler import InitialDistribution, simulate_ensemble
from ..smalllin import min_real_eigenvalue, solve

log = logging.getLogger(__name__)

QUANTITIES = ("mean", "variance")
LEVELS = ("macro", "micro")
DEFAULT_FLOOR = 1e-11
MOMENT_NAMES = ("m_x", "m_y", "s_x", "s_xy", "s_y")
SE_ROUNDOFF = 1e-12  # relative size below which a standard error means a degenerate ensemble


@dataclass(frozen=True)
class SweepRow:
    eps: float
    quantity: str
    k: int
    macro_sup: float
    micro_sup: float

    def sort_key(self):
        return (self.eps, QUANTITIES.index(self.quantity), self.k)


@dataclass(frozen=True)
class SlopeFit:
    quantity: str
    level: str
    k: int
    slope: float
    intercept: float
    eps_lo: float
    eps_hi: float
    points_used: int


def quantity_problem(cfg, eps, quantity):
    """Fine/coarse propagators, micro initial state and coupling for one quantity."""
    p = cfg.ou(eps)
    dt = cfg.T / cfg.N
    if quantity == "mean":
        ms = oumodel.mean_system(p)
        fine = ms.as_affine()
        coarse = oumodel.reduced_mean_model(p).as_affine()
        u0 = cfg.mean0
        eq_map = ms.equilibrium_map()
        mu_minus = ms.mu_minus
    elif quantity == "variance":
        fine = oumodel.covariance_system(p)
        coarse = oumodel.reduced_variance_model(p).as_affine()
        u0 = cfg.cov0
        # fast equilibrium of the homogeneous part: A_sigma^{-1} q_sigma
        A_s = oumodel.a_sigma(p, eps)
        eq_map = solve(A_s, oumodel.q_sigma(p)).reshape(-1, 1)
        mu_minus = min_real_eigenvalue(A_s)
    else:
        raise ValueError(f"unknown quantity {quantity!r}")
    part = SlowFastPartition.leading(1, len(u0))
    if cfg.lifting == EQUILIBRIUM:
        lifting = LiftingSpec.from_map(eq_map)
    else:
        lifting = LiftingSpec.from_initial(u0, part)
    pcfg = PararealConfig(cfg.T, cfg.N, cfg.K, lifting, part)
    return PropagatorSpec(fine, dt), PropagatorSpec(coarse, dt), pcfg, u0, mu_minus


def run_quantity(cfg, eps, quantity):
    F, C, pcfg, u0, mu_minus = quantity_problem(cfg, eps, quantity)
    pcfg.check_boundary_layer(eps, mu_minus)
    return run_micro_macro(F, C, pcfg, u0)


def _sweep_one(cfg, eps):
    rows = []
    for quantity in QUANTITIES:
        summary = error_summary(run_quantity(cfg, eps, quantity))
        for k, (E, e) in enumerate(zip(summary.macro_sup, summary.micro_sup)):
            rows.append(SweepRow(eps, quantity, k, E, e))
    return rows


def require_assumptions(cfg):
    report = oumodel.check_assumptions(cfg.ou(cfg.eps_grid[0]), cfg.eps_grid)
    if not report.all_satisfied:
        raise AssumptionViolation(
            "model assumptions violated: " + "; ".join(report.failures()), report=report
        )
    return report


def sweep_epsilon(cfg, workers=1):
    """Micro-macro Parareal errors per (eps, quantity, k), sorted by that key.

    Refuses (raises :class:`AssumptionViolation` carrying the report) before
    any computation when the parameters violate the assumptions anywhere on
    the grid.
    """
    require_assumptions(cfg)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(lambda e: _sweep_one(cfg, e), cfg.eps_grid))
    else:
        chunks = [_sweep_one(cfg, e) for e in cfg.eps_grid]
    rows = [r for chunk in chunks for r in chunk]
    return sorted(rows, key=SweepRow.sort_key)


def fit_power_law(eps, err):
    """Least-squares line through ``(ln eps, ln err)``; returns ``(slope, intercept)``."""
    x = np.log(np.asarray(eps, dtype=float))
    y = np.log(np.asarray(err, dtype=float))
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(slope), float(intercept)


def fit_slopes(rows, floor=DEFAULT_FLOOR, skip_insufficient=False):
    """Log-log slope of error vs eps per (quantity, k, level), using errors above ``floor``.

    Groups with fewer than three usable points raise
    :class:`InsufficientDataError`, or are skipped when ``skip_insufficient``.
    """
    groups = {}
    for r in rows:
        for level in LEVELS:
            groups.setdefault((r.quantity, r.k, level), []).append(
                (r.eps, r.macro_sup if level == "macro" else r.micro_sup)
            )
    fits = []
    order = lambda key: (QUANTITIES.index(key[0]), LEVELS.index(key[2]), key[1])
    for (quantity, k, level) in sorted(groups, key=order):
        pts = groups[(quantity, k, level)]
        used = sorted((e, v) for e, v in pts if v > floor)
        if len(used) < 3:
            if skip_insufficient:
                log.warning("skipping %s/%s/k=%d: %d points above floor %g", quantity, level, k, len(used), floor)
                continue
            raise InsufficientDataError(
                f"group quantity={quantity} level={level} k={k} has {len(used)} points above floor {floor:g}; need 3",
                group=(quantity, level, k),
            )
        eps, err = zip(*used)
        slope, intercept = fit_power_law(eps, err)
        fits.append(SlopeFit(quantity, level, k, slope, intercept, eps[0], eps[-1], len(used)))
    return fits


def model_errors(cfg, eps):
    """Sup over the coarse grid of |slow micro - reduced| for mean and variance."""
    p = cfg.ou(eps)
    dt = cfg.T / cfg.N
    mean_full = sample_trajectory(oumodel.mean_system(p).as_affine(), cfg.mean0, dt, cfg.N)
    mean_red = sample_trajectory(oumodel.reduced_mean_model(p).as_affine(), cfg.mean0[:1], dt, cfg.N)
    cov_full = sample_trajectory(oumodel.covariance_system(p), cfg.cov0, dt, cfg.N)
    cov_red = sample_trajectory(oumodel.reduced_variance_model(p).as_affine(), cfg.cov0[:1], dt, cfg.N)
    return {
        "mean": float(np.max(np.abs(mean_full[:, 0] - mean_red[:, 0]))),
        "variance": float(np.max(np.abs(cov_full[:, 0] - cov_red[:, 0]))),
    }


@dataclass(frozen=True)
class ValidationRow:
    component: str
    empirical: float
    moment_ode: float
    std_error: float
    z: float


@dataclass(frozen=True)
class ValidationReport:
    eps: float
    rows: tuple
    passed: bool
    z_max: float = 5.0

    @property
    def max_abs_z(self):
        zs = [abs(r.z) for r in self.rows if math.isfinite(r.z)]
        return max(zs) if zs else float("nan")


def moment_ode_solution(p, initial_micro, T):
    init = np.asarray(initial_micro, dtype=float)
    mean = exact_flow(oumodel.mean_system(p).as_affine(), init[:2], T)
    cov = exact_flow(oumodel.covariance_system(p), init[2:], T)
    return np.concatenate([mean, cov])


def mc_validate(cfg, ens, eps, sde_params=None, z_max=5.0):
    """Compare Euler-Maruyama ensemble moments at ``ens.T`` with the moment ODEs.

    ``sde_params`` overrides the parameters of the simulated SDE only (the
    moment ODEs always use ``cfg``); used for negative controls.  When a
    standard error is at roundoff level (sigma = 0, deterministic start) the
    component is compared deterministically against a tolerance of
    ``10 dt (1 + |value|)``.
    """
    p = cfg.ou(eps)
    p.validate()
    sim_p = p if sde_params is None else sde_params
    emp = simulate_ensemble(sim_p, ens, InitialDistribution.from_micro(cfg.initial_micro))
    ref = moment_ode_solution(p, cfg.initial_micro, ens.T)
    vals = emp.as_vector()
    rows = []
    ok = True
    for name, e_val, r_val in zip(MOMENT_NAMES, vals, ref):
        se = emp.std_errors[name]
        if se > SE_ROUNDOFF * (1.0 + abs(e_val)):
            z = (e_val - r_val) / se
            ok &= abs(z) <= z_max
        else:
            z = float("nan")
            ok &= abs(e_val - r_val) <= 10.0 * ens.dt * (1.0 + abs(r_val))
        rows.append(ValidationRow(name, float(e_val), float(r_val), float(se), float(z)))
    return ValidationReport(eps, tuple(rows), bool(ok), z_max)
