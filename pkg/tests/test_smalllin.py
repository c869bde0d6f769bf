import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmparareal import smalllin
from mmparareal.errors import DimensionError, DomainError, SingularMatrixError

B_SIGMA_01 = np.array([[-2.0, -2.0, 0.0], [1.0, -11.0, -1.0], [0.0, 2.0, -20.0]])

# exp(0.5 * B_SIGMA_01), 40-digit Taylor/Pade reference, frozen
EXP_B_SIGMA_HALF = np.array([
    [0.33710849591003066628, -0.074930101839261563022, 0.0041637338051104343085],
    [0.037465050919630781511, -0.0042406961717568016235, 8.5533263631272652202e-6],
    [0.0041637338051104343085, -0.00001710665272625453044, 1.7570621778071975048e-8],
])


def taylor_exp(M, t, squarings=8, terms=30):
    """Plain Taylor sum on a scaled matrix, then repeated squaring."""
    X = np.asarray(M, dtype=float) * t / 2**squarings
    out = np.eye(len(X))
    term = np.eye(len(X))
    for j in range(1, terms):
        term = term @ X / j
        out = out + term
    for _ in range(squarings):
        out = out @ out
    return out


finite = st.floats(-3, 3, allow_nan=False, allow_subnormal=False)
mat3 = st.lists(finite, min_size=9, max_size=9).map(lambda v: np.array(v).reshape(3, 3))


def test_exp_of_zero_is_identity():
    np.testing.assert_array_equal(smalllin.mat_exp(np.zeros((2, 2)), 7.0), np.eye(2))


def test_exp_diagonal():
    E = smalllin.mat_exp(np.diag([-1.0, -2.0]), 1.0)
    np.testing.assert_allclose(E, np.diag([math.exp(-1), math.exp(-2)]), rtol=1e-14, atol=0)


def test_exp_covariance_matrix_matches_frozen_reference():
    E = smalllin.mat_exp(B_SIGMA_01, 0.5)
    np.testing.assert_allclose(E, EXP_B_SIGMA_HALF, rtol=1e-12, atol=1e-16)


def test_exp_matches_taylor_oracle():
    np.testing.assert_allclose(smalllin.mat_exp(B_SIGMA_01, 0.5), taylor_exp(B_SIGMA_01, 0.5), rtol=1e-11, atol=1e-15)


def test_exp_scalar_and_jordan_block():
    np.testing.assert_allclose(smalllin.mat_exp([[-2.2]], 1.0), [[math.exp(-2.2)]], rtol=1e-13)
    J = np.array([[-1.0, 1.0], [0.0, -1.0]])
    np.testing.assert_allclose(smalllin.mat_exp(J, 2.0), math.exp(-2) * np.array([[1, 2], [0, 1]]), rtol=1e-13)


def test_exp_rejects_bad_input():
    with pytest.raises(DimensionError):
        smalllin.mat_exp(np.ones((2, 3)))
    with pytest.raises(DomainError):
        smalllin.mat_exp([[np.nan, 0], [0, 1]])
    with pytest.raises(DomainError):
        smalllin.mat_exp(np.eye(2), float("inf"))


def test_exp_semigroup_random_stable(rng):
    from conftest import random_stable
    for _ in range(50):
        M = random_stable(rng, 3)
        s, t = rng.uniform(0, 2, size=2)
        lhs = smalllin.mat_exp(M, s) @ smalllin.mat_exp(M, t)
        np.testing.assert_allclose(lhs, smalllin.mat_exp(M, s + t), atol=1e-10, rtol=0)


@settings(max_examples=60, deadline=None)
@given(mat3, st.floats(0, 2), st.floats(0, 2))
def test_exp_semigroup_property(M, s, t):
    M = M - (np.max(np.linalg.eigvals(M).real) + 0.5) * np.eye(3)
    lhs = smalllin.mat_exp(M, s) @ smalllin.mat_exp(M, t)
    np.testing.assert_allclose(lhs, smalllin.mat_exp(M, s + t), atol=1e-10, rtol=1e-10)


def test_solve_trivial():
    v = np.array([3.0, -1.5, 2.0])
    np.testing.assert_array_equal(smalllin.solve(np.eye(3), v), v)
    np.testing.assert_allclose(smalllin.solve([[2.0, 0.0], [0.0, 4.0]], [2.0, 4.0]), [1.0, 1.0])


def test_solve_matches_adjugate_inverse():
    A = np.array([[1.1, 0.1], [-0.2, 2.0]])
    q = np.array([0.1, 0.0])
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    adj = np.array([[A[1, 1], -A[0, 1]], [-A[1, 0], A[0, 0]]])
    np.testing.assert_allclose(smalllin.solve(A, q), adj @ q / det, rtol=1e-14)


def test_solve_singular_reports_pivot():
    with pytest.raises(SingularMatrixError) as info:
        smalllin.solve([[1.0, 2.0], [2.0, 4.0]], [1.0, 1.0])
    assert info.value.pivot < 1e-12
    with pytest.raises(DimensionError):
        smalllin.solve(np.eye(2), [1.0, 2.0, 3.0])


@settings(max_examples=80, deadline=None)
@given(mat3, st.lists(finite, min_size=3, max_size=3))
def test_solve_round_trip(M, v):
    M = M + 4.0 * np.eye(3)  # diagonally dominant enough to stay well conditioned
    v = np.array(v)
    w = smalllin.solve(M, v)
    bound = 1e-12 * (smalllin.inf_norm(M) * np.max(np.abs(w)) + np.max(np.abs(v))) + 1e-11
    assert np.max(np.abs(M @ w - v)) <= bound


def test_inverse_times_matrix_is_identity():
    np.testing.assert_allclose(smalllin.inverse(B_SIGMA_01) @ B_SIGMA_01, np.eye(3), atol=1e-13)


def _sorted(z):
    return sorted(np.asarray(z, dtype=complex), key=lambda c: (round(c.real, 9), c.imag))


def test_eigenvalues_trivial():
    assert _sorted(smalllin.eigenvalues(np.diag([1.0, 2.0]))) == [1, 2]
    ev = _sorted(smalllin.eigenvalues([[0.0, -1.0], [1.0, 0.0]]))
    np.testing.assert_allclose(ev, [-1j, 1j], atol=1e-15)


def test_eigenvalues_a_sigma_quadratic_oracle():
    A = np.array([[1.1, 0.1], [-0.2, 2.0]])
    tr, det = 3.1, 1.1 * 2.0 + 0.02
    disc = math.sqrt(tr * tr - 4 * det)
    expected = [(tr - disc) / 2, (tr + disc) / 2]
    got = sorted(np.real(smalllin.eigenvalues(A)))
    np.testing.assert_allclose(got, expected, rtol=1e-14)
    assert got[0] == pytest.approx(1.123, abs=1e-3) and got[1] == pytest.approx(1.977, abs=1e-3)


def test_eigenvalues_size_limit():
    with pytest.raises(DimensionError):
        smalllin.eigenvalues(np.eye(4))


def test_eigenvalues_repeated_root():
    ev = smalllin.eigenvalues(np.diag([2.0, 2.0, 2.0]))
    np.testing.assert_allclose(np.asarray(ev), [2, 2, 2], atol=1e-7)


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 3).flatmap(lambda n: st.lists(finite, min_size=n * n, max_size=n * n)))
def test_eigenvalues_trace_det_residual(entries):
    n = int(round(math.sqrt(len(entries))))
    M = np.array(entries).reshape(n, n)
    ev = np.asarray(smalllin.eigenvalues(M), dtype=complex)
    scale = max(smalllin.inf_norm(M), 1.0)
    assert abs(ev.sum() - np.trace(M)) <= 1e-9 * scale
    assert abs(np.prod(ev) - np.linalg.det(M)) <= 1e-9 * scale**n
    for lam in ev:
        assert abs(np.linalg.det(M - lam * np.eye(n))) <= 1e-9 * scale**n
