"""Rate lower/upper bounds, the latency bound and rate reports."""
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings

import random_collect as rc
from random_collect.bounds import rc_sink_term, table1_closed_forms
from test_graph import connected_graphs


def test_srw_lower_bound_values():
    # complete n=5: gap 5/4, regular, k=4
    assert rc.srw_rate_lower_bound(-0.25, 4, 4, 4) == pytest.approx(1.25 / math.sqrt(40))
    with pytest.raises(ValueError):
        rc.srw_rate_lower_bound(0.5, 3, 2, 1)
    with pytest.raises(ValueError):
        rc.srw_rate_lower_bound(0.5, 2, 2, 0)


def test_general_lower_bound_complete_example(family):
    # uniform pi, sources at 0.8, sink at 0: Var = 0.1024, denominator 4, gap 5/4
    g = family("complete", 5)
    tm = rc.srw_matrix(g)
    occ = rc.solve_occupancy(tm, g.sources, g.sink, 0.2)
    pi = rc.stationary_dist(tm, g)
    val = rc.general_rate_lower_bound(pi, occ.eta, g.sources, g.sink, -0.25)
    assert val == pytest.approx(0.2, rel=1e-12)


def test_latency_bound():
    b = rc.latency_upper_bound(1, 0.5, 0.5, 0.5)
    assert b.value == pytest.approx(3 * math.e)
    assert rc.latency_upper_bound(4, 0.1, 3.0, 0.0, alpha=2.0).value == pytest.approx(
        2 * math.log(4 * math.e) * (10 + 3))
    assert rc.latency_upper_bound(2, 0.1, 3.0, 1.0).value == math.inf
    for bad in [(0, 0.1, 1, 0), (2, 0.0, 1, 0), (2, 0.1, 1, -0.1)]:
        with pytest.raises(ValueError):
            rc.latency_upper_bound(*bad)
    with pytest.raises(ValueError):
        rc.latency_upper_bound(2, 0.1, 1, 0.1, alpha=1.0)


def test_latency_bound_monotone_in_k_and_c():
    vals = [rc.latency_upper_bound(k, 0.1, 5.0, 0.2).value for k in (1, 2, 4, 8)]
    assert vals == sorted(vals)
    vals = [rc.latency_upper_bound(3, 0.1, 5.0, c).value for c in (0.0, 0.3, 0.6, 0.9)]
    assert vals == sorted(vals)


@pytest.mark.parametrize("kind,size,eps,upper", [
    ("cycle", 8, 0.0, 2 / 7),
    ("complete", 6, 0.0, 1.0),
    ("star_center_sink", 6, 0.01, 1.0),
    ("star_outer_sink", 6, 0.0, 1 / 5),
    ("hypercube", 3, 0.0, 3 / 7),
])
def test_general_upper_matches_closed_forms(family, kind, size, eps, upper):
    g = family(kind, size)
    assert rc.general_upper_bound(g) == pytest.approx(upper)
    short = kind.replace("_sink", "")
    assert table1_closed_forms(short, g.n, eps)["upper"] == pytest.approx(
        upper if kind != "cycle" else 2 / (g.n - 1))


def test_rc_upper_complete(family):
    g = family("complete", 6)
    tm = rc.srw_matrix(g)
    assert rc_sink_term(tm, g.sink) == pytest.approx(1 / 5)
    assert rc.rc_upper_bound(tm, g.sink) == pytest.approx(1 / 5)


@given(connected_graphs())
@settings(max_examples=40, deadline=None)
def test_upper_bound_chain(g):
    tm = rc.srw_matrix(g)
    exact = rc.critical_rate(tm, g.sources, g.sink)
    rc_up = rc.rc_upper_bound(tm, g.sink)
    gen_up = rc.general_upper_bound(g)
    assert exact <= rc_up * (1 + 1e-9)
    assert rc_up <= gen_up * (1 + 1e-9)


def test_report_fields_and_serialisation(family):
    g = family("cycle", 8)
    r = rc.build_rate_report(g, rc.srw_matrix(g))
    assert r.ordering_holds()
    assert r.exact_rate == pytest.approx(4 / 64)
    assert r.lambda2 == pytest.approx(math.cos(2 * math.pi / 8))
    assert r.general_lower_beta == pytest.approx(0.5 * r.exact_rate)
    d = json.loads(r.to_json())
    assert d["n"] == 8 and d["notes"] == []
    lines = r.to_csv().splitlines()
    assert lines[0].split(",")[0] == "topology" and len(lines) == 2


def test_report_partial_sources_skips_upper_bounds():
    g = rc.build_topology({"kind": "cycle", "n": 8, "sources": [3, 4]})
    r = rc.build_rate_report(g, rc.srw_matrix(g))
    assert r.rc_upper is None and r.general_upper is None and r.notes
    assert not r.ordering_holds()


def test_report_large_n_uses_closed_forms(family):
    g = family("cycle", 30)
    r = rc.build_rate_report(g, rc.srw_matrix(g))
    assert r.general_upper == pytest.approx(2 / 29)
    assert r.rc_upper == pytest.approx(min(1 / 29, 1 / 29))


def test_report_large_rgg_leaves_bounds_empty():
    g = rc.build_topology({"kind": "rgg", "n": 30, "seed": 2})
    r = rc.build_rate_report(g, rc.srw_matrix(g))
    assert r.rc_upper is None and r.general_upper is None
    assert len(r.notes) == 2


def test_star_outer_general_lower_flagged(family, caplog):
    g = family("star_outer_sink", 10)
    r = rc.build_rate_report(g, rc.srw_matrix(g))
    assert r.general_lower > r.general_lower_beta
    assert any("general_lower" in note for note in r.notes)


def test_closed_form_lower_bounds(family):
    # regular families: the listed lower bound is the spectral formula with the listed gap;
    # for the hypercube that gap (1/x) belongs to the half-lazy walk
    for kind, size, eps in [("complete", 10, 0.0), ("hypercube", 3, 0.5), ("hypercube", 4, 0.5)]:
        g = family(kind, size)
        r = rc.build_rate_report(g, rc.srw_matrix(g, eps))
        assert table1_closed_forms(kind, g.n)["lower"] == pytest.approx(r.srw_lower, rel=1e-9)
    with pytest.raises(ValueError):
        table1_closed_forms("rgg", 10)


@given(connected_graphs())
@settings(max_examples=40, deadline=None)
def test_upper_bounds_differ_by_degree_factors(g):
    tm = rc.srw_matrix(g)
    ratio = rc.general_upper_bound(g) / rc.rc_upper_bound(tm, g.sink)
    d_min, d_max, _ = rc.degree_stats(g)
    assert d_min * (1 - 1e-9) <= ratio <= d_max * (1 + 1e-9)


@pytest.mark.parametrize("n", [6, 8, 10, 16])
@pytest.mark.parametrize("kind,eps", [("cycle", 0.0), ("complete", 0.0), ("star_center_sink", 0.01)])
def test_ordering_on_families(family, kind, eps, n):
    g = family(kind, n)
    r = rc.build_rate_report(g, rc.srw_matrix(g, eps))
    assert r.ordering_holds()
    if kind == "complete":
        assert r.exact_rate / r.srw_lower <= 2


@pytest.mark.parametrize("n", [6, 8, 10, 16])
def test_star_outer_lower_bound_exceeds_exact(family, n):
    # the spectral lower bound 1/sqrt(2n(n-1)^2) sits above the exact rate 1/(n-1)^2 for n >= 4,
    # so the ordering cannot hold on this family; this pins the computed values to both closed forms
    g = family("star_outer_sink", n)
    r = rc.build_rate_report(g, rc.srw_matrix(g))
    assert r.srw_lower == pytest.approx(1 / math.sqrt(2 * n * (n - 1) ** 2), rel=1e-9)
    assert r.exact_rate == pytest.approx(1 / (n - 1) ** 2, rel=1e-9)
    assert r.srw_lower > r.exact_rate and not r.ordering_holds()
