"""Slot-synchronous Monte Carlo simulation of Random-Collect.

Each slot, in order:

1. every non-sink node with a nonempty start-of-slot queue picks one queued
   packet uniformly at random and a destination from its transition row
   (a self-loop keeps the packet but still uses the node's one transmission);
2. packets are delivered, and those reaching the sink are absorbed;
3. each source receives a new packet with probability ``beta``.

Occupancy, delay probability and drift are measured on the start-of-slot
state after ``burn_in``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _engine
from .graph import Graph
from .walk import TransitionMatrix, srw_matrix


@dataclass
class SimConfig:
    graph: Graph
    beta: float
    horizon: int
    burn_in: int = 0
    seed: int = 0
    eps: float = 0.0
    tm: TransitionMatrix | None = None
    round_cap: int = 500
    n_batches: int = 20
    trajectory_points: int = 2000

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")
        if not 0 <= self.burn_in < self.horizon:
            raise ValueError("need 0 <= burn_in < horizon")
        if self.n_batches < 2 or self.horizon - self.burn_in < self.n_batches:
            raise ValueError("measurement window too short for the batch count")
        if self.tm is not None and self.tm.n != self.graph.n:
            raise ValueError("transition matrix does not match the graph")

    @property
    def matrix(self) -> TransitionMatrix:
        return self.tm if self.tm is not None else srw_matrix(self.graph, self.eps)

    @property
    def sample_every(self) -> int:
        return max(1, self.horizon // self.trajectory_points)


@dataclass
class Metrics:
    """Statistics of one simulation run.

    ``eta_hat[u]`` is the fraction of measured slots with a nonempty queue at
    ``u``; ``p_ge2`` the same for two or more packets. Per-batch counterparts
    (``eta_batches``, ``ge2_batches``) support batch-means confidence intervals.
    Round statistics cover the first ``round_cap`` rounds whose packets are all
    generated after burn-in.
    """

    beta: float
    sink: int
    sources: tuple[int, ...]
    burn_in: int
    horizon: int
    eta_hat: np.ndarray
    p_ge2: np.ndarray
    eta_batches: np.ndarray
    ge2_batches: np.ndarray
    drift_hat: np.ndarray
    drift_samples: np.ndarray
    throughput_hat: float
    generated: int
    absorbed: int
    queued: int
    round_times: np.ndarray
    rounds_completed: int
    tau_bar_hat: float
    trajectory: np.ndarray
    conservation_failures: int
    multi_tx_failures: int
    final_queues: np.ndarray = field(repr=False)

    @property
    def k(self) -> int:
        return len(self.sources)

    @property
    def non_sink(self) -> np.ndarray:
        return np.array([u for u in range(self.eta_hat.size) if u != self.sink])

    @property
    def c_hat(self) -> float:
        """Largest per-node probability of holding at least two packets."""
        return float(self.p_ge2[self.non_sink].max())

    @property
    def eps_hat(self) -> float:
        """Smallest per-node probability of an empty queue."""
        return float(1.0 - self.eta_hat[self.non_sink].max())

    @property
    def mean_round_time(self) -> float:
        return float(self.round_times.mean()) if self.round_times.size else math.nan

    def round_time_ci(self) -> tuple[float, float]:
        """Mean per-round collection time and its 95% half-width."""
        r = self.round_times
        if r.size < 2:
            return self.mean_round_time, math.inf
        return float(r.mean()), float(1.96 * r.std(ddof=1) / math.sqrt(r.size))

    def _batch_ci(self, per_batch: np.ndarray) -> tuple[float, float]:
        nb = per_batch.size
        return float(per_batch.mean()), float(1.96 * per_batch.std(ddof=1) / math.sqrt(nb))

    def eta_ci(self, u: int) -> tuple[float, float]:
        return self._batch_ci(self.eta_batches[:, u])

    def c_ci(self) -> tuple[float, float]:
        u = self.non_sink[np.argmax(self.p_ge2[self.non_sink])]
        return self._batch_ci(self.ge2_batches[:, u])

    def eps_ci(self) -> tuple[float, float]:
        u = self.non_sink[np.argmax(self.eta_hat[self.non_sink])]
        mean, half = self._batch_ci(1.0 - self.eta_batches[:, u])
        return mean, half

    def queue_slope(self) -> float:
        """Least-squares slope of the max-queue trajectory after burn-in, in packets per slot."""
        tr = self.trajectory[self.trajectory[:, 0] >= self.burn_in]
        if tr.shape[0] < 3:
            return 0.0
        x = tr[:, 0].astype(float)
        y = tr[:, 1].astype(float)
        x -= x.mean()
        return float((x @ (y - y.mean())) / (x @ x))

    def write_node_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["node", "eta_hat", "p_ge2", "drift_hat"])
            for u in range(self.eta_hat.size):
                w.writerow([u, _g(self.eta_hat[u]), _g(self.p_ge2[u]), _g(self.drift_hat[u])])

    def summary_row(self, verdict: str) -> dict:
        return {
            "beta": _g(self.beta),
            "throughput_hat": _g(self.throughput_hat),
            "c_hat": _g(self.c_hat),
            "eps_hat": _g(self.eps_hat),
            "tau_bar_hat": _g(self.tau_bar_hat),
            "mean_round_time": _g(self.mean_round_time),
            "rounds_completed": str(self.rounds_completed),
            "verdict": verdict,
        }

    def write_trajectory_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["slot", "max_queue", "total_queue"])
            w.writerows(self.trajectory.tolist())


SUMMARY_FIELDS = (
    "beta", "throughput_hat", "c_hat", "eps_hat", "tau_bar_hat",
    "mean_round_time", "rounds_completed", "verdict",
)


def _g(x) -> str:
    return f"{float(x):.12g}"


def write_summary_csv(path, rows: Sequence[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SUMMARY_FIELDS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


def _csr_rows(tm: TransitionMatrix):
    p = tm.matrix
    row_ptr = [0]
    idx, cdf = [], []
    for u in range(tm.n):
        nz = np.nonzero(p[u] > 0)[0]
        idx.extend(nz.tolist())
        c = np.cumsum(p[u, nz])
        c[-1] = 1.0
        cdf.extend(c.tolist())
        row_ptr.append(len(idx))
    return (
        np.array(row_ptr, dtype=np.int64),
        np.array(idx, dtype=np.int64),
        np.array(cdf, dtype=np.float64),
    )


def _block_len(n: int, k: int) -> int:
    return max(1024, (1 << 22) // (2 * n + k))


def run(config: SimConfig) -> Metrics:
    """Simulate ``config.horizon`` slots and collect :class:`Metrics`."""
    g = config.graph
    tm = config.matrix
    n, k = g.n, g.k
    sources = np.array(g.sources, dtype=np.int64)
    row_ptr, dest_idx, dest_cdf = _csr_rows(tm)
    streams = [np.random.default_rng(s) for s in np.random.SeedSequence(config.seed).spawn(3)]
    arrivals_rng, pick_rng, dest_rng = streams

    nb = config.n_batches
    R = config.round_cap
    qbuf = np.zeros((n, 64), dtype=np.int64)
    qlen = np.zeros(n, dtype=np.int64)
    next_round = np.zeros(k, dtype=np.int64)
    counters = np.zeros(_engine.N_COUNTERS, dtype=np.int64)
    occ = np.zeros((nb, n), dtype=np.int64)
    occ2 = np.zeros((nb, n), dtype=np.int64)
    drift_sum = np.zeros(n, dtype=np.int64)
    drift_cnt = np.zeros(n, dtype=np.int64)
    round_births = np.zeros(R, dtype=np.int64)
    round_last_birth = np.full(R, -1, dtype=np.int64)
    round_absorbed = np.zeros(R, dtype=np.int64)
    round_last_absorb = np.full(R, -1, dtype=np.int64)
    every = config.sample_every
    traj = np.full(((config.horizon - 1) // every + 1, 3), -1, dtype=np.int64)

    block = _block_len(n, k)
    t0 = 0
    while t0 < config.horizon:
        m = min(block, config.horizon - t0)
        arr_u = arrivals_rng.random((m, k))
        pick_u = pick_rng.random((m, n))
        dest_u = dest_rng.random((m, n))
        offset = 0
        while offset < m:
            offset = _engine.run_block(
                t0, m, offset, config.horizon, config.burn_in, config.beta, g.sink, sources,
                row_ptr, dest_idx, dest_cdf, arr_u, pick_u, dest_u, qbuf, qlen, next_round,
                counters, occ, occ2, drift_sum, drift_cnt, round_births, round_last_birth,
                round_absorbed, round_last_absorb, traj, every, nb,
            )
            if offset < m:
                grown = np.zeros((n, 2 * qbuf.shape[1] + n + 1), dtype=np.int64)
                grown[:, : qbuf.shape[1]] = qbuf
                qbuf = grown
        t0 += m

    measured = config.horizon - config.burn_in
    edges = (np.arange(nb + 1) * measured) // nb
    batch_len = np.diff(edges).astype(float)[:, None]
    eta_batches = occ / batch_len
    ge2_batches = occ2 / batch_len
    with np.errstate(invalid="ignore", divide="ignore"):
        drift_hat = np.where(drift_cnt > 0, drift_sum / np.maximum(drift_cnt, 1), np.nan)

    complete = (round_births == k) & (round_absorbed == k)
    ell = int(np.argmin(complete)) if not complete.all() else R
    if ell:
        round_times = (round_last_absorb[:ell] - round_last_birth[:ell]).astype(float)
        tau_col = float(round_last_absorb[:ell].max() + 1 - config.burn_in)
        tau_bar = tau_col / ell
    else:
        round_times = np.zeros(0)
        tau_bar = math.nan

    return Metrics(
        beta=config.beta,
        sink=g.sink,
        sources=g.sources,
        burn_in=config.burn_in,
        horizon=config.horizon,
        eta_hat=occ.sum(axis=0) / measured,
        p_ge2=occ2.sum(axis=0) / measured,
        eta_batches=eta_batches,
        ge2_batches=ge2_batches,
        drift_hat=drift_hat,
        drift_samples=drift_cnt,
        throughput_hat=counters[_engine.ABSORBED_POST] / measured,
        generated=int(counters[_engine.GENERATED]),
        absorbed=int(counters[_engine.ABSORBED]),
        queued=int(qlen.sum()),
        round_times=round_times,
        rounds_completed=ell,
        tau_bar_hat=tau_bar,
        trajectory=traj[traj[:, 0] >= 0],
        conservation_failures=int(counters[_engine.CONSERVATION_FAIL]),
        multi_tx_failures=int(counters[_engine.MULTI_TX_FAIL]),
        final_queues=qlen.copy(),
    )


STABLE, UNSTABLE, INCONCLUSIVE = "stable", "unstable", "inconclusive"


def stability_probe(
    metrics: Metrics,
    delta: float = 0.01,
    slope_tol: float = 1e-3,
    min_samples: int = 100,
) -> str:
    """Classify a run from its conditional drifts and max-queue growth.

    Stable: every node with at least ``min_samples`` busy slots drifts below
    ``-delta`` and the max queue does not grow faster than ``slope_tol``.
    Unstable: some drift above ``+delta`` or queue growth above ``slope_tol``.
    """
    d = metrics.drift_hat[metrics.drift_samples >= min_samples]
    slope = metrics.queue_slope()
    if (d.size and d.max() > delta) or slope > slope_tol:
        return UNSTABLE
    if (d.size == 0 or d.max() < -delta) and slope <= slope_tol:
        return STABLE
    return INCONCLUSIVE


@dataclass
class SweepResult:
    betas: list[float]
    metrics: list[Metrics]
    verdicts: list[str]
    last_stable: float | None
    first_unstable: float | None

    @property
    def degenerate(self) -> bool:
        """True when the grid lacks a stable or an unstable point."""
        return self.last_stable is None or self.first_unstable is None

    @property
    def estimate(self) -> float | None:
        if self.degenerate:
            return None
        return 0.5 * (self.last_stable + self.first_unstable)

    def contains(self, value: float, rtol: float = 1e-9) -> bool:
        lo = self.last_stable if self.last_stable is not None else 0.0
        hi = self.first_unstable if self.first_unstable is not None else math.inf
        return lo * (1 - rtol) <= value <= hi * (1 + rtol)

    @property
    def c_curve(self) -> list[float]:
        return [m.c_hat for m in self.metrics]

    @property
    def eps_curve(self) -> list[float]:
        return [m.eps_hat for m in self.metrics]

    def summary_rows(self) -> list[dict]:
        return [m.summary_row(v) for m, v in zip(self.metrics, self.verdicts)]


def derived_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1, dtype=np.uint64)[0])


def beta_sweep(base: SimConfig, grid: Sequence[float], **probe_kw) -> SweepResult:
    """Run ``base`` at every rate in ``grid`` (ascending) with independent derived seeds.

    The bracket is the largest stable rate below the smallest unstable rate.
    """
    grid = list(grid)
    if grid != sorted(grid):
        raise ValueError("beta grid must be ascending")
    results, verdicts = [], []
    for i, beta in enumerate(grid):
        cfg = SimConfig(
            graph=base.graph, beta=beta, horizon=base.horizon, burn_in=base.burn_in,
            seed=derived_seed(base.seed, i), eps=base.eps, tm=base.tm,
            round_cap=base.round_cap, n_batches=base.n_batches,
            trajectory_points=base.trajectory_points,
        )
        m = run(cfg)
        results.append(m)
        verdicts.append(stability_probe(m, **probe_kw))
    first_unstable = next((b for b, v in zip(grid, verdicts) if v == UNSTABLE), None)
    stable_below = [
        b for b, v in zip(grid, verdicts)
        if v == STABLE and (first_unstable is None or b < first_unstable)
    ]
    last_stable = stable_below[-1] if stable_below else None
    return SweepResult(grid, results, verdicts, last_stable, first_unstable)


def write_outputs(metrics: Metrics, verdict: str, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    metrics.write_node_csv(out / "nodes.csv")
    write_summary_csv(out / "summary.csv", [metrics.summary_row(verdict)])
    metrics.write_trajectory_csv(out / "trajectory.csv")
