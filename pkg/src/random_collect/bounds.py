"""Throughput and latency bounds for Random-Collect, and per-family rate reports."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable

import numpy as np

from .errors import BruteForceLimitError
from .graph import BRUTE_FORCE_LIMIT, Graph, degree_stats, edge_expansion_hat
from .steady_state import critical_rate, sink_inflow, solve_occupancy
from .walk import (
    TransitionMatrix,
    cheeger_closed_form,
    cheeger_hat,
    second_eigenvalue,
    srw_matrix,
    stationary_dist,
)

log = logging.getLogger(__name__)


def srw_rate_lower_bound(lambda2: float, d_min: int, d_max: int, k: int) -> float:
    """Spectral-gap lower bound on the stable rate for the simple random walk."""
    if k < 1:
        raise ValueError("need at least one source")
    if d_min > d_max:
        raise ValueError("d_min exceeds d_max")
    return (1.0 - lambda2) * math.sqrt(d_min / (d_max * 2.0 * k * (k + 1)))


def general_rate_lower_bound(
    pi: np.ndarray,
    eta: np.ndarray,
    sources: Iterable[int],
    sink: int,
    lambda2: float,
) -> float:
    """Lower bound for a general reversible walk, evaluated at a given occupancy vector.

    ``(1 - lambda2) * sqrt(Var_pi(eta) / (sum_{sources} pi + k^2 pi_sink))``
    """
    pi = np.asarray(pi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    sources = list(sources)
    k = len(sources)
    mean = pi @ eta
    var = pi @ (eta - mean) ** 2
    denom = pi[sources].sum() + k * k * pi[sink]
    return float((1.0 - lambda2) * math.sqrt(var / denom))


def general_upper_bound(g: Graph, limit: int = BRUTE_FORCE_LIMIT) -> float:
    """``min(alpha_hat(G), d_sink / (n - 1))``: no algorithm is stable above it."""
    alpha = edge_expansion_hat(g, limit=limit)
    return float(min(alpha, g.degrees[g.sink] / (g.n - 1)))


def rc_sink_term(tm: TransitionMatrix, sink: int) -> float:
    """Probability mass flowing into the sink per slot when every other queue is busy, over ``n - 1``."""
    return sink_inflow(tm, np.ones(tm.n), sink) / (tm.n - 1)


def rc_upper_bound(
    tm: TransitionMatrix,
    sink: int,
    limit: int = BRUTE_FORCE_LIMIT,
    h_hat: float | None = None,
) -> float:
    """``min(h_hat(G), sum_{u ~ sink} P[u, sink] / (n - 1))`` for Random-Collect.

    ``h_hat`` may be supplied (e.g. a registered closed form) to skip the
    exhaustive search.
    """
    if h_hat is None:
        h_hat = cheeger_hat(tm, sink, limit=limit)
    return min(h_hat, rc_sink_term(tm, sink))


@dataclass(frozen=True)
class LatencyBound:
    k: int
    beta: float
    t_hit: float
    c: float
    alpha: float
    value: float


def latency_upper_bound(k: int, beta: float, t_hit: float, c: float, alpha: float = math.e) -> LatencyBound:
    """Average collection time bound ``alpha log(e k) (1/beta + t_hit / (1 - c))``.

    Returns an infinite value when ``c >= 1`` (the unstable regime).
    """
    if k < 1 or beta <= 0 or c < 0 or alpha <= 1:
        raise ValueError("need k >= 1, beta > 0, c >= 0, alpha > 1")
    if c >= 1:
        value = math.inf
    else:
        value = alpha * math.log(math.e * k) * (1.0 / beta + t_hit / (1.0 - c))
    return LatencyBound(k, beta, t_hit, c, alpha, value)


@dataclass
class RateReport:
    """Rate summary row: bounds and exact rate for a topology with its walk."""

    topology: str
    n: int
    eps: float
    k: int
    srw_lower: float
    exact_rate: float
    general_lower: float | None
    general_lower_beta: float | None
    rc_upper: float | None
    general_upper: float | None
    rc_sink_term: float
    general_sink_term: float
    lambda2: float
    d_min: int
    d_max: int
    notes: list[str] = field(default_factory=list)

    FIELDS = (
        "topology", "n", "eps", "k", "srw_lower", "general_lower", "general_lower_beta",
        "exact_rate", "rc_upper", "general_upper", "rc_sink_term", "general_sink_term",
        "lambda2", "d_min", "d_max",
    )

    def ordering_holds(self, rtol: float = 1e-9) -> bool:
        """``srw_lower <= exact_rate <= rc_upper <= general_upper`` (up to ``rtol``)."""
        chain = [self.srw_lower, self.exact_rate, self.rc_upper, self.general_upper]
        if any(v is None for v in chain):
            return False
        return all(a <= b * (1 + rtol) for a, b in zip(chain, chain[1:]))

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=_json_default)

    def csv_row(self) -> list[str]:
        return [_fmt(getattr(self, f)) for f in self.FIELDS]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.FIELDS)
        w.writerow(self.csv_row())
        return buf.getvalue()


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def _json_default(v):
    if isinstance(v, np.generic):
        return v.item()
    raise TypeError(type(v))


def build_rate_report(
    g: Graph,
    tm: TransitionMatrix,
    pi: np.ndarray | None = None,
    sources: Iterable[int] | None = None,
    check_fraction: float = 0.5,
    limit: int = BRUTE_FORCE_LIMIT,
) -> RateReport:
    """Assemble every rate quantity for ``g`` under walk ``tm``.

    The general lower bound needs an occupancy vector, so it is evaluated at
    ``check_fraction`` times the exact critical rate. Upper bounds whose
    subset search would exceed ``limit`` fall back to registered closed forms
    and are left empty when none exists.
    """
    sources = tuple(g.sources if sources is None else sorted(sources))
    if pi is None:
        pi = stationary_dist(tm, g)
    notes = []
    d_min, d_max, _ = degree_stats(g)
    spectrum = second_eigenvalue(tm, pi)
    k = len(sources)
    exact = critical_rate(tm, sources, g.sink)
    srw_lower = srw_rate_lower_bound(spectrum.lambda2, d_min, d_max, k)

    beta_check = check_fraction * exact
    occ = solve_occupancy(tm, sources, g.sink, beta_check)
    general_lower = general_rate_lower_bound(pi, occ.eta, sources, g.sink, spectrum.lambda2)
    if general_lower > beta_check * (1 + 1e-9):
        log.warning("general lower bound %.6g exceeds stable rate %.6g", general_lower, beta_check)
        notes.append("general_lower exceeds the checked stable rate")

    all_sources = k == g.n - 1
    rc_upper = general_upper = None
    if not all_sources:
        notes.append("upper bounds assume every non-sink node is a source; not reported")
    else:
        h_hat = None
        if g.n > limit:
            h_hat = cheeger_closed_form(g, tm.eps) if _is_srw(g, tm) else None
        if g.n <= limit or h_hat is not None:
            rc_upper = rc_upper_bound(tm, g.sink, limit=limit, h_hat=h_hat)
        else:
            notes.append("rc_upper needs subset enumeration beyond the node cap")
        try:
            general_upper = general_upper_bound(g, limit=limit)
        except BruteForceLimitError:
            notes.append("general_upper needs subset enumeration beyond the node cap")
    return RateReport(
        topology=g.kind,
        n=g.n,
        eps=tm.eps,
        k=k,
        srw_lower=srw_lower,
        exact_rate=exact,
        general_lower=general_lower,
        general_lower_beta=beta_check,
        rc_upper=rc_upper,
        general_upper=general_upper,
        rc_sink_term=rc_sink_term(tm, g.sink),
        general_sink_term=float(g.degrees[g.sink]) / (g.n - 1),
        lambda2=spectrum.lambda2,
        d_min=d_min,
        d_max=d_max,
        notes=notes,
    )


def _is_srw(g: Graph, tm: TransitionMatrix) -> bool:
    return bool(np.allclose(tm.matrix, srw_matrix(g, tm.eps).matrix, atol=1e-15))


def table1_closed_forms(kind: str, n: int, eps: float = 0.0) -> dict:
    """Closed-form lower and general upper bounds listed for the standard families.

    The cycle's lower bound uses the asymptotic gap ``1/n^2`` and the
    hypercube's uses ``log2 n`` for the dimension.
    """
    root = math.sqrt(2.0 * n * (n - 1))
    if kind == "cycle":
        return {"lower": 1.0 / (n**2 * root), "upper": 2.0 / (n - 1)}
    if kind in ("star_center", "star_center_sink"):
        return {"lower": 1.0 / math.sqrt(2.0 * n * (n - 1) ** 2), "upper": 1.0}
    if kind in ("star_outer", "star_outer_sink"):
        return {"lower": 1.0 / math.sqrt(2.0 * n * (n - 1) ** 2), "upper": 1.0 / (n - 1)}
    if kind == "complete":
        return {"lower": n / math.sqrt(2.0 * n * (n - 1) ** 3), "upper": 1.0}
    if kind == "hypercube":
        x = math.log2(n)
        return {"lower": 1.0 / (x * root), "upper": x / (n - 1)}
    raise ValueError(f"no closed forms for {kind!r}")
