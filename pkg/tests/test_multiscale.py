import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmparareal import oumodel
from mmparareal.errors import AssumptionViolation, DimensionError, DomainError, SingularMatrixError
from mmparareal.harness.experiments import fit_power_law
from mmparareal.multiscale import (
    AffineSystem,
    MultiscaleLinearSystem,
    ReducedModel,
    assemble_full_matrix,
    boundary_layer_time,
    exact_flow,
    model_error_sup,
    reduced_coefficient,
    sample_trajectory,
)

EPS_GRID = np.geomspace(1e-5, 1e-2, 7)
WIDE_GRID = np.geomspace(1e-5, 1e-1, 9)


def ou_mean(eps):
    return MultiscaleLinearSystem(a=-1.0, p=[-1.0], q=[0.1], A=[[1.0]], eps=eps)


def test_reduced_coefficient_examples():
    assert reduced_coefficient(MultiscaleLinearSystem(3.0, [0.0], [5.0], [[2.0]], 0.5)) == 3.0
    assert reduced_coefficient(ou_mean(0.1)) == pytest.approx(-1.1, abs=1e-15)
    sys = MultiscaleLinearSystem(2.0, [1.0, 0.0], [0.0, 1.0], np.eye(2), 0.3)
    assert reduced_coefficient(sys) == 2.0


def test_construction_checks():
    assert ou_mean(0.1).mu_minus == 1.0
    with pytest.raises(AssumptionViolation):
        MultiscaleLinearSystem(0.0, [1.0], [1.0], [[-1.0]], 0.1)
    with pytest.raises(DomainError):
        ou_mean(1.0)
    with pytest.raises(DimensionError):
        MultiscaleLinearSystem(0.0, [1.0, 2.0], [1.0], [[1.0]], 0.1)
    with pytest.raises(DimensionError):
        AffineSystem(np.eye(2), [1.0])


def test_assemble_full_matrix():
    M = assemble_full_matrix(MultiscaleLinearSystem(0.0, [0.0], [0.0], [[1.0]], 0.5))
    np.testing.assert_array_equal(M, [[0.0, 0.0], [0.0, -2.0]])
    np.testing.assert_allclose(assemble_full_matrix(ou_mean(0.1)), [[-1.0, -1.0], [1.0, -10.0]], rtol=1e-15)
    M1 = assemble_full_matrix(ou_mean(0.2))
    M2 = assemble_full_matrix(ou_mean(0.4))
    np.testing.assert_array_equal(M1[0], M2[0])
    np.testing.assert_allclose(M2[1:], M1[1:] / 2, rtol=1e-15)


def test_exact_flow_examples():
    sys = oumodel.covariance_system(oumodel.TEST_PARAMS)
    u = np.array([1.0, 0.3, 2.0])
    np.testing.assert_array_equal(exact_flow(sys, u, 0.0), u)
    fixed = -np.linalg.solve(sys.M, sys.b)
    np.testing.assert_allclose(exact_flow(sys, fixed, 3.0), fixed, atol=1e-14)
    scalar = AffineSystem([[-2.2]], [0.25])
    # closed form (1 - e^{-2.2}) 0.25 / 2.2 = 0.1010450956...
    expected = (1 - math.exp(-2.2)) * 0.25 / 2.2
    assert exact_flow(scalar, [0.0], 1.0)[0] == pytest.approx(expected, rel=1e-13)
    assert expected == pytest.approx(0.10104509564064387, rel=1e-15)


def test_exact_flow_rejects_singular_forced():
    with pytest.raises(SingularMatrixError):
        exact_flow(AffineSystem([[0.0]], [1.0]), [0.0], 1.0)
    with pytest.raises(DomainError):
        exact_flow(AffineSystem([[0.0]], [0.0]), [0.0], -1.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 3), st.floats(0, 3), st.floats(1e-3, 0.5),
       st.lists(st.floats(-50, 50), min_size=3, max_size=3))
def test_exact_flow_semigroup(s, t, eps, u):
    sys = oumodel.covariance_system(oumodel.TEST_PARAMS.with_eps(eps))
    lhs = exact_flow(sys, exact_flow(sys, u, s), t)
    rhs = exact_flow(sys, u, s + t)
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * (1 + np.max(np.abs(u)))


def test_reduced_model_flow_matches_exact_flow():
    red = ReducedModel(-2.2, 0.25)
    assert red.steady_state() == pytest.approx(0.25 / 2.2)
    assert red.flow(1.0, 0.7) == pytest.approx(exact_flow(red.as_affine(), [1.0], 0.7)[0], rel=1e-13)
    with pytest.raises(DomainError):
        ReducedModel(0.0, 1.0)


def test_boundary_layer_time():
    assert boundary_layer_time(0.1, 1.0) == pytest.approx(0.2 * math.log(10), rel=1e-15)
    assert boundary_layer_time(0.1, 1.0) == pytest.approx(0.460517, abs=1e-6)
    assert boundary_layer_time(0.01, 2.0) == pytest.approx(0.046052, abs=1e-6)
    assert boundary_layer_time(1 - 1e-12, 1.0) < 1e-11
    for bad in (0.0, 1.0, -0.5):
        with pytest.raises(DomainError):
            boundary_layer_time(bad, 1.0)


def test_model_error_sup_examples():
    a = np.linspace(0, 1, 11)
    assert model_error_sup(a, a) == 0.0
    assert model_error_sup(a, a + 0.5) == pytest.approx(0.5)
    with pytest.raises(DimensionError):
        model_error_sup(a, a[:-1])


def _mean_model_error(eps, x0=100.0, y0=100.0, T=10.0, N=10):
    sys = ou_mean(eps)
    full = sample_trajectory(sys.as_affine(), [x0, y0], T / N, N)
    red = sample_trajectory(sys.reduced_model().as_affine(), [x0], T / N, N)
    return model_error_sup(full[:, 0], red[:, 0])


def test_model_error_first_order_ratio():
    ratio = _mean_model_error(1e-2) / _mean_model_error(1e-3)
    assert ratio == pytest.approx(10.0, rel=0.1)


def test_model_error_slope():
    errs = [_mean_model_error(e) for e in EPS_GRID]
    slope, _ = fit_power_law(EPS_GRID, errs)
    assert abs(slope - 1.0) <= 0.15


def _fine_trajectory(eps, x0, y0, n=400, T=10.0):
    sys = ou_mean(eps)
    ts = np.concatenate([np.geomspace(eps * 1e-3, T, n), [0.0]])
    ts.sort()
    traj = np.array([exact_flow(sys.as_affine(), [x0, y0], t) for t in ts])
    return ts, traj


@pytest.mark.parametrize("x0,y0", [(1.0, 0.0), (1.0, 50.0), (0.0, 1.0), (100.0, 100.0)])
def test_slow_variable_and_fast_decay_bounded(x0, y0):
    slow_ratios, fast_ratios = [], []
    for eps in WIDE_GRID:
        ts, traj = _fine_trajectory(eps, x0, y0)
        scale = abs(x0) + eps * abs(y0)
        slow_ratios.append(np.max(np.abs(traj[:, 0])) / scale)
        tbl = boundary_layer_time(eps, 1.0)
        fast_ratios.append(np.max(np.abs(traj[ts >= tbl, 1])) / scale)
    # one constant for the whole grid: spread stays within a small factor
    assert max(slow_ratios) <= 2.0 * min(slow_ratios) + 1.0
    assert max(fast_ratios) <= 3.0
