"""Dense solvers against numpy.linalg as the oracle."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from random_collect.errors import SingularSystemError
from random_collect.linalg import gauss_solve, jacobi_eigenvalues, solve_checked


@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_gauss_matches_numpy(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n)) + n * np.eye(n)
    b = rng.normal(size=n)
    assert np.allclose(gauss_solve(a, b), np.linalg.solve(a, b), atol=1e-10)


def test_gauss_block_rhs_and_pivoting():
    a = np.array([[0.0, 1.0], [2.0, 3.0]])  # zero leading pivot
    b = np.eye(2)
    assert np.allclose(a @ gauss_solve(a, b), np.eye(2), atol=1e-14)


def test_gauss_singular():
    with pytest.raises(SingularSystemError):
        gauss_solve(np.array([[1.0, 2.0], [2.0, 4.0]]), np.ones(2))
    with pytest.raises(SingularSystemError):
        gauss_solve(np.zeros((3, 3)), np.ones(3))


def test_gauss_shape_mismatch():
    with pytest.raises(ValueError):
        gauss_solve(np.eye(3), np.ones(2))


def test_solve_checked_residual():
    a = np.array([[4.0, 1.0], [1.0, 3.0]])
    x = solve_checked(a, [1.0, 2.0], residual_tol=1e-12)
    assert np.allclose(a @ x, [1.0, 2.0])


@given(st.integers(1, 15), st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_jacobi_matches_numpy(n, seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(n, n))
    s = m + m.T
    ours = jacobi_eigenvalues(s)
    ref = np.sort(np.linalg.eigvalsh(s))[::-1]
    assert np.all(np.diff(ours) <= 1e-12)
    assert np.allclose(ours, ref, atol=1e-10)


def test_jacobi_diagonal_and_repeated():
    assert np.allclose(jacobi_eigenvalues(np.diag([3.0, -1.0, 2.0])), [3.0, 2.0, -1.0])
    j = np.ones((5, 5))
    assert np.allclose(jacobi_eigenvalues(j), [5, 0, 0, 0, 0], atol=1e-12)
