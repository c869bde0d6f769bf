import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmparareal import oumodel
from mmparareal.coupling import (
    LiftingSpec,
    SlowFastPartition,
    fast_part,
    lift,
    match_states,
    restrict,
)
from mmparareal.errors import DimensionError, DomainError

vals = st.floats(-1e3, 1e3, allow_nan=False)


@st.composite
def partitions(draw, max_dim=5):
    dim = draw(st.integers(1, max_dim))
    perm = draw(st.permutations(range(dim)))
    n_slow = draw(st.integers(1, dim))
    return SlowFastPartition(tuple(perm[:n_slow]), tuple(perm[n_slow:]))


@st.composite
def part_and_states(draw):
    part = draw(partitions())
    u = np.array(draw(st.lists(vals, min_size=part.dim, max_size=part.dim)))
    X = np.array(draw(st.lists(vals, min_size=part.n_slow, max_size=part.n_slow)))
    return part, X, u


def test_partition_validation():
    with pytest.raises(DimensionError):
        SlowFastPartition((0, 1), (1, 2))
    with pytest.raises(DimensionError):
        SlowFastPartition((0,), (2,))
    part = SlowFastPartition.leading(1, 3)
    assert part.slow_indices == (0,) and part.fast_indices == (1, 2)
    np.testing.assert_array_equal(part.restriction_matrix(), [[1, 0, 0]])


def test_restrict_examples():
    assert restrict([3.0, 4.0], SlowFastPartition.leading(1, 2)).tolist() == [3.0]
    assert restrict([5.0, 6.0, 7.0], SlowFastPartition.leading(1, 3)).tolist() == [5.0]
    assert restrict([1, 2, 3, 4], SlowFastPartition((2, 0), (1, 3))).tolist() == [3.0, 1.0]
    with pytest.raises(DimensionError):
        restrict([1.0, 2.0, 3.0], SlowFastPartition.leading(1, 2))


def test_lift_equilibrium_mean_system():
    part = SlowFastPartition.leading(1, 2)
    spec = LiftingSpec.from_map(oumodel.mean_system(oumodel.TEST_PARAMS).equilibrium_map())
    np.testing.assert_allclose(lift([2.5], spec, part), [2.5, 0.25], rtol=1e-15)


def test_lift_initial_condition():
    part = SlowFastPartition.leading(1, 3)
    spec = LiftingSpec.from_initial([9.0, 0.3, 0.7], part)
    assert lift([1.5], spec, part).tolist() == [1.5, 0.3, 0.7]
    zero = LiftingSpec.from_initial([0.0, 0.0], SlowFastPartition.leading(1, 2))
    assert lift([0.0], zero, SlowFastPartition.leading(1, 2)).tolist() == [0.0, 0.0]


def test_lift_errors():
    part = SlowFastPartition.leading(1, 3)
    with pytest.raises(DimensionError):
        lift([1.0, 2.0], LiftingSpec.from_initial([0, 0, 0], part), part)
    with pytest.raises(DimensionError):
        lift([1.0], LiftingSpec.from_map([[1.0]]), part)
    with pytest.raises(DimensionError):
        LiftingSpec("equilibrium")
    with pytest.raises(DomainError):
        LiftingSpec("midpoint", initial_fast=[0.0])


def test_match_examples():
    part = SlowFastPartition.leading(1, 3)
    assert match_states([9.0], [1.0, 2.0, 3.0], part).tolist() == [9.0, 2.0, 3.0]
    u = np.array([0.2, 0.01, 0.05])
    np.testing.assert_array_equal(match_states(restrict(u, part), u, part), u)
    with pytest.raises(DimensionError):
        match_states([1.0, 2.0], u, part)


@settings(max_examples=200, deadline=None)
@given(part_and_states())
def test_restrict_match_identities(data):
    part, X, u = data
    np.testing.assert_array_equal(restrict(match_states(X, u, part), part), X)
    np.testing.assert_array_equal(match_states(restrict(u, part), u, part), u)
    np.testing.assert_array_equal(fast_part(match_states(X, u, part), part), fast_part(u, part))


def test_matching_continuity_random_pairs(rng):
    for _ in range(1000):
        dim = rng.integers(2, 6)
        part = SlowFastPartition.leading(int(rng.integers(1, dim)), int(dim))
        X = rng.normal(scale=10 ** rng.uniform(-3, 3), size=part.n_slow)
        u = rng.normal(scale=10 ** rng.uniform(-3, 3), size=part.dim)
        lhs = np.linalg.norm(match_states(X, u, part))
        assert lhs <= np.linalg.norm(X) + np.linalg.norm(fast_part(u, part)) + 1e-12 * lhs


@settings(max_examples=100, deadline=None)
@given(part_and_states(), st.floats(-10, 10))
def test_linearity(data, c):
    part, X, u = data
    X2, u2 = X[::-1] * 0.5 + 1.0, u * 0.3 - 2.0
    tol = 1e-14 * (1 + np.max(np.abs(u)) + np.max(np.abs(X))) * (1 + abs(c)) * 1e3
    np.testing.assert_allclose(restrict(u + u2, part), restrict(u, part) + restrict(u2, part), atol=tol, rtol=0)
    np.testing.assert_allclose(restrict(c * u, part), c * restrict(u, part), atol=tol, rtol=0)
    np.testing.assert_allclose(
        match_states(X + X2, u + u2, part),
        match_states(X, u, part) + match_states(X2, u2, part), atol=tol, rtol=0,
    )
    np.testing.assert_allclose(match_states(c * X, c * u, part), c * match_states(X, u, part), atol=tol, rtol=0)
