"""Transition matrices, stationary laws, spectra, hitting times and the Cheeger constant."""
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import random_collect as rc
from random_collect.errors import NonReversibleError
from random_collect.walk import (
    TransitionMatrix,
    check_reversible,
    cheeger_closed_form,
    make_lazy,
    mc_hitting_time,
    mixing_hitting_bound,
)
from test_graph import connected_graphs


def test_row_sums_validated():
    with pytest.raises(ValueError):
        TransitionMatrix(np.array([[0.5, 0.4], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        TransitionMatrix(np.array([[1.2, -0.2], [0.0, 1.0]]))


def test_srw_entries(family):
    g = family("star_outer_sink", 5)
    p = rc.srw_matrix(g, 0.1).matrix
    assert p[0, 3] == pytest.approx(0.9 / 4)
    assert p[3, 0] == pytest.approx(0.9)
    assert np.allclose(np.diag(p), 0.1)
    with pytest.raises(ValueError):
        rc.srw_matrix(g, 1.0)


@given(connected_graphs(), st.floats(0.0, 0.9))
@settings(max_examples=40, deadline=None)
def test_srw_stationary_and_detailed_balance(g, eps):
    tm = rc.srw_matrix(g, eps)
    pi = rc.stationary_dist(tm, g)
    assert np.allclose(pi, g.degrees / (2 * g.m))
    # the generic solve agrees with the degree formula
    assert np.allclose(rc.stationary_dist(tm), pi, atol=1e-10)
    assert check_reversible(tm, pi) <= 1e-12


@given(connected_graphs(), st.floats(0.01, 0.9))
@settings(max_examples=40, deadline=None)
def test_lazy_shifts_spectrum(g, eps):
    tm = rc.srw_matrix(g)
    pi = rc.stationary_dist(tm, g)
    base = rc.second_eigenvalue(tm, pi).eigenvalues
    lazy = make_lazy(tm, eps)
    assert lazy.eps == pytest.approx(eps)
    shifted = rc.second_eigenvalue(lazy, pi).eigenvalues
    assert np.allclose(shifted, eps + (1 - eps) * base, atol=1e-10)
    assert shifted[0] == pytest.approx(1.0)


def test_non_reversible_rejected():
    p = 0.7 * np.roll(np.eye(3), 1, axis=1) + 0.3 * np.roll(np.eye(3), -1, axis=1)
    tm = TransitionMatrix(p)
    pi = rc.stationary_dist(tm)
    assert np.allclose(pi, 1 / 3)
    with pytest.raises(NonReversibleError):
        rc.second_eigenvalue(tm, pi)


@pytest.mark.parametrize("n", [4, 5, 10])
def test_complete_spectrum(family, n):
    g = family("complete", n)
    tm = rc.srw_matrix(g)
    res = rc.second_eigenvalue(tm, rc.stationary_dist(tm, g))
    assert res.lambda2 == pytest.approx(-1 / (n - 1), abs=1e-12)
    assert res.spectral_gap == pytest.approx(n / (n - 1))


def test_cycle_spectrum_against_cosines(family):
    n = 10
    g = family("cycle", n)
    tm = rc.srw_matrix(g)
    eig = rc.second_eigenvalue(tm, rc.stationary_dist(tm, g)).eigenvalues
    ref = np.sort(np.cos(2 * np.pi * np.arange(n) / n))[::-1]
    assert np.allclose(eig, ref, atol=1e-12)


@pytest.mark.parametrize("x", [3, 4])
def test_hypercube_spectrum(family, x):
    g = family("hypercube", x)
    tm = rc.srw_matrix(g)
    eig = rc.second_eigenvalue(tm, rc.stationary_dist(tm, g)).eigenvalues
    # Krawtchouk spectrum 1 - 2j/x with multiplicity C(x, j)
    ref = np.sort(np.repeat([1 - 2 * j / x for j in range(x + 1)], [math.comb(x, j) for j in range(x + 1)]))[::-1]
    assert np.allclose(eig, ref, atol=1e-12)
    lazy = rc.srw_matrix(g, 0.5)
    assert rc.second_eigenvalue(lazy, rc.stationary_dist(lazy, g)).lambda2 == pytest.approx(1 - 1 / x)


@pytest.mark.parametrize("n", [6, 8, 11])
def test_cycle_hitting_times(family, n):
    h = rc.hitting_times_to(rc.srw_matrix(family("cycle", n)), 0)
    j = np.arange(n)
    assert np.allclose(h, j * (n - j), atol=1e-9)


@pytest.mark.parametrize("n", [3, 5, 9])
def test_complete_hitting_times(family, n):
    tm = rc.srw_matrix(family("complete", n))
    h = rc.hitting_times_to(tm, 2)
    assert h[2] == 0
    assert np.allclose(np.delete(h, 2), n - 1)
    assert rc.worst_case_hitting_time(tm) == pytest.approx(n - 1)


def test_lazy_hitting_scales(family):
    g = family("cycle", 8)
    eps = 0.25
    plain = rc.hitting_times_to(rc.srw_matrix(g), 0)
    lazy = rc.hitting_times_to(rc.srw_matrix(g, eps), 0)
    assert np.allclose(lazy, plain / (1 - eps))


def test_mc_hitting_agrees_with_solve(family):
    tm = rc.srw_matrix(family("cycle", 8))
    rng = np.random.default_rng(11)
    mean, se = mc_hitting_time(tm, 3, 0, 4000, rng)
    assert abs(mean - 15.0) <= 4 * se


def test_worst_hitting_within_mixing_bound_order(family):
    g = family("hypercube", 4)
    tm = rc.srw_matrix(g, 0.5)
    lam2 = rc.second_eigenvalue(tm, rc.stationary_dist(tm, g)).lambda2
    assert math.isfinite(mixing_hitting_bound(g.n, lam2))
    assert rc.worst_case_hitting_time(tm) > 0


def brute_cheeger(p, sink):
    n = p.shape[0]
    others = [u for u in range(n) if u != sink]
    best = math.inf
    for r in range(1, len(others) + 1):
        for U in itertools.combinations(others, r):
            out = [v for v in range(n) if v not in U]
            best = min(best, p[np.ix_(U, out)].sum() / len(U))
    return best


@pytest.mark.parametrize("kind,size,eps", [
    ("cycle", 7, 0.0), ("complete", 6, 0.0), ("hypercube", 3, 0.0),
    ("star_center_sink", 6, 0.01), ("star_outer_sink", 6, 0.0), ("complete", 5, 0.3),
])
def test_cheeger_against_itertools(family, kind, size, eps):
    g = family(kind, size)
    tm = rc.srw_matrix(g, eps)
    h = rc.cheeger_hat(tm, g.sink)
    assert h == pytest.approx(brute_cheeger(tm.matrix, g.sink), rel=1e-12)
    assert h == pytest.approx(cheeger_closed_form(g, eps), rel=1e-12)


@given(connected_graphs())
@settings(max_examples=30, deadline=None)
def test_cheeger_property(g):
    tm = rc.srw_matrix(g)
    h = rc.cheeger_hat(tm, g.sink)
    assert h == pytest.approx(brute_cheeger(tm.matrix, g.sink), rel=1e-12)
    sink_col = tm.matrix[:, g.sink].sum() - tm.matrix[g.sink, g.sink]
    assert h <= sink_col / (g.n - 1) + 1e-12
