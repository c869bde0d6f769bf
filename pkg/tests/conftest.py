import numpy as np
import pytest

from mmparareal.oumodel import TEST_PARAMS


@pytest.fixture
def params():
    return TEST_PARAMS


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_stable(rng, n):
    """Random n x n matrix with spectrum pushed into the left half plane."""
    X = rng.normal(size=(n, n))
    shift = np.max(np.linalg.eigvals(X).real) + rng.uniform(0.1, 2.0)
    return X - shift * np.eye(n)


# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


def record(number, passed, detail):
    ACCEPTANCE[number] = (bool(passed), detail)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
