"""Steady-state queue occupancy of Random-Collect and the critical data rate.

The sink never transmits, so its occupancy is pinned to zero and the balance
equations are solved on the remaining nodes only::

    eta_u - sum_{v != sink} P[v, u] eta_v = beta * [u is a source]

The system is linear in ``beta``; the critical rate is the largest ``beta``
keeping every occupancy at or below one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np

from .errors import SingularSystemError
from .linalg import solve_checked
from .walk import TransitionMatrix

RESIDUAL_TOL = 1e-10
SINK_BALANCE_TOL = 1e-9


def _source_indicator(n: int, sources: Iterable[int], sink: int) -> np.ndarray:
    j = np.zeros(n)
    for s in sources:
        j[s] = 1.0
    if j[sink]:
        raise ValueError("sink cannot be a source")
    return j


@dataclass(frozen=True)
class OccupancySystem:
    """``eta (I - P) = beta (J - k e_sink)`` with the sink's occupancy grounded at zero."""

    tm: TransitionMatrix
    sources: tuple[int, ...]
    sink: int

    @property
    def indicator(self) -> np.ndarray:
        return _source_indicator(self.tm.n, self.sources, self.sink)

    @property
    def k(self) -> int:
        return len(self.sources)

    def unit_solution(self) -> np.ndarray:
        """Occupancy vector at ``beta = 1`` (entries may exceed one)."""
        n = self.tm.n
        rest = [u for u in range(n) if u != self.sink]
        a = (np.eye(n) - self.tm.matrix)[np.ix_(rest, rest)].T
        x = np.zeros(n)
        try:
            x[rest] = solve_checked(a, self.indicator[rest], residual_tol=RESIDUAL_TOL)
        except SingularSystemError as exc:
            raise SingularSystemError(f"occupancy system is singular: {exc}") from exc
        return x


@dataclass(frozen=True)
class OccupancyVector:
    eta: np.ndarray
    beta: float
    sink: int
    sources: tuple[int, ...]

    @property
    def k(self) -> int:
        return len(self.sources)

    def to_csv(self, path) -> None:
        lines = ["node,eta"] + [f"{u},{x:.12g}" for u, x in enumerate(self.eta)]
        Path(path).write_text("\n".join(lines) + "\n")


def sink_inflow(tm: TransitionMatrix, eta: np.ndarray, sink: int) -> float:
    """Expected packets absorbed per slot: ``sum_v P[v, sink] eta_v`` over ``v != sink``."""
    col = tm.matrix[:, sink].copy()
    col[sink] = 0.0
    return float(col @ eta)


def solve_occupancy(
    tm: TransitionMatrix, sources: Iterable[int], sink: int, beta: float
) -> OccupancyVector:
    """Steady-state occupancy probabilities at rate ``beta``.

    Beyond the critical rate the returned values exceed one; they are then
    the solution of the linear system, not probabilities.
    """
    system = OccupancySystem(tm, tuple(sorted(sources)), sink)
    eta = beta * system.unit_solution()
    inflow = sink_inflow(tm, eta, sink)
    if abs(inflow - system.k * beta) > SINK_BALANCE_TOL * max(1.0, system.k * beta):
        raise SingularSystemError(f"sink balance off: inflow {inflow!r} vs k*beta {system.k * beta!r}")
    return OccupancyVector(eta, beta, sink, system.sources)


def critical_rate(tm: TransitionMatrix, sources: Iterable[int], sink: int) -> float:
    """Largest ``beta`` with every steady-state occupancy at most one."""
    x = OccupancySystem(tm, tuple(sorted(sources)), sink).unit_solution()
    return 1.0 / float(x.max())


def expected_drift(tm: TransitionMatrix, occ: OccupancyVector, u: int) -> float:
    """Conditional one-slot queue change at ``u`` given a nonempty queue.

    Arrivals (own Bernoulli plus neighbours' forwarding at their occupancy)
    minus the probability of sending a packet off ``u``. Self-loops move
    nothing, so they count on neither side.
    """
    p = tm.matrix
    arrivals = occ.beta if u in occ.sources else 0.0
    incoming = p[:, u].copy()
    incoming[[u, occ.sink]] = 0.0
    return float(arrivals + incoming @ occ.eta - (1.0 - p[u, u]))


class ReferenceRate(NamedTuple):
    value: float
    exact: bool


def table1_reference(kind: str, n: int, eps: float = 0.0) -> ReferenceRate:
    """Closed-form critical rate for the families with all non-sink nodes as sources.

    For the hypercube ``n`` is the node count ``2**x`` and the value is an
    upper bound on the true rate, flagged with ``exact=False``.
    """
    if kind == "cycle":
        return ReferenceRate(4.0 / n**2, True)
    if kind in ("star_center", "star_center_sink"):
        return ReferenceRate(1.0 - eps, True)
    if kind in ("star_outer", "star_outer_sink"):
        return ReferenceRate(1.0 / (n - 1) ** 2, True)
    if kind == "complete":
        return ReferenceRate(1.0 / (n - 1), True)
    if kind == "hypercube":
        x = math.log2(n)
        if x != int(x):
            raise ValueError(f"hypercube size {n} is not a power of two")
        return ReferenceRate(5.0 / (x * 1.5**x), False)
    raise ValueError(f"no closed-form rate for {kind!r}")
