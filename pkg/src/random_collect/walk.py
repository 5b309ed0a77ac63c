"""Random-walk transition matrices and the spectral / hitting-time quantities built on them."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import NonReversibleError, SingularSystemError
from .graph import BRUTE_FORCE_LIMIT, Graph, min_ratio_over_sink_free_sets
from .linalg import gauss_solve, jacobi_eigenvalues, solve_checked

ROW_SUM_TOL = 1e-12
BALANCE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Row-stochastic matrix over the nodes of a graph.

    ``eps`` is the self-loop mass added uniformly to every node. Analysis code
    always treats the sink as an ordinary (non-absorbing) state; the simulator
    absorbs at the sink regardless of the sink's row.
    """

    matrix: np.ndarray
    eps: float = 0.0
    sink_absorbing: bool = False

    def __post_init__(self):
        p = np.asarray(self.matrix, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValueError("transition matrix must be square")
        if np.any(p < 0):
            raise ValueError("negative transition probability")
        if np.max(np.abs(p.sum(axis=1) - 1.0)) > ROW_SUM_TOL:
            raise ValueError("rows must sum to 1")
        p.setflags(write=False)
        object.__setattr__(self, "matrix", p)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def __getitem__(self, idx):
        return self.matrix[idx]

    def to_csv(self, path) -> None:
        rows = [",".join(f"{x:.12g}" for x in row) for row in self.matrix]
        Path(path).write_text("\n".join(rows) + "\n")


def srw_matrix(g: Graph, eps: float = 0.0) -> TransitionMatrix:
    """Simple random walk on ``g`` with self-loop probability ``eps`` at every node."""
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"laziness must lie in [0, 1), got {eps}")
    p = np.zeros((g.n, g.n))
    for u in range(g.n):
        nbrs = g.adjacency[u]
        p[u, list(nbrs)] = (1.0 - eps) / len(nbrs)
        p[u, u] = eps
    return TransitionMatrix(p, eps=eps)


def make_lazy(tm: TransitionMatrix, eps: float) -> TransitionMatrix:
    """``eps * I + (1 - eps) * P``."""
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"laziness must lie in [0, 1), got {eps}")
    p = eps * np.eye(tm.n) + (1.0 - eps) * tm.matrix
    return TransitionMatrix(p, eps=1.0 - (1.0 - eps) * (1.0 - tm.eps))


def stationary_dist(tm: TransitionMatrix, g: Graph | None = None) -> np.ndarray:
    """Stationary distribution of ``tm``.

    When ``g`` is given and ``tm`` is a (possibly lazy) simple random walk on it,
    the degree formula ``d(u) / 2m`` is used; otherwise ``pi P = pi`` is solved
    with one balance equation replaced by normalisation.
    """
    p = tm.matrix
    n = tm.n
    if g is not None and g.n == n and np.allclose(p, srw_matrix(g, tm.eps).matrix, atol=1e-15):
        return g.degrees / (2.0 * g.m)
    a = (np.eye(n) - p).T
    a[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    try:
        pi = gauss_solve(a, rhs)
    except SingularSystemError as exc:
        raise SingularSystemError(f"no unique stationary distribution: {exc}") from exc
    if np.any(pi < -1e-12) or np.max(np.abs(pi @ p - pi)) > BALANCE_TOL:
        raise SingularSystemError("stationary solve did not produce a distribution")
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def check_reversible(tm: TransitionMatrix, pi: np.ndarray, tol: float = BALANCE_TOL) -> float:
    """Largest detailed-balance violation; raises :class:`NonReversibleError` above ``tol``."""
    flow = pi[:, None] * tm.matrix
    worst = float(np.max(np.abs(flow - flow.T)))
    if worst > tol:
        raise NonReversibleError(f"detailed balance violated by {worst:.3e}")
    return worst


@dataclass(frozen=True)
class SpectrumResult:
    lambda2: float
    spectral_gap: float
    eigenvalues: np.ndarray

    @property
    def smallest(self) -> float:
        return float(self.eigenvalues[-1])


def second_eigenvalue(tm: TransitionMatrix, pi: np.ndarray) -> SpectrumResult:
    """Spectrum of a reversible chain via its symmetrisation ``D^1/2 P D^-1/2``."""
    check_reversible(tm, pi)
    root = np.sqrt(pi)
    sym = root[:, None] * tm.matrix / root[None, :]
    sym = 0.5 * (sym + sym.T)
    eig = jacobi_eigenvalues(sym)
    lam2 = float(eig[1]) if eig.size > 1 else float("nan")
    return SpectrumResult(lam2, 1.0 - lam2, eig)


def hitting_times_to(tm: TransitionMatrix, target: int) -> np.ndarray:
    """Expected steps to first reach ``target`` from every start node."""
    n = tm.n
    rest = [u for u in range(n) if u != target]
    a = np.eye(n - 1) - tm.matrix[np.ix_(rest, rest)]
    h = np.zeros(n)
    if rest:
        h[rest] = solve_checked(a, np.ones(n - 1), residual_tol=1e-9)
    return h


def worst_case_hitting_time(tm: TransitionMatrix) -> float:
    """``max_{x,y} E_x[tau_y]`` over all ordered pairs."""
    return max(float(hitting_times_to(tm, y).max()) for y in range(tm.n))


def mc_hitting_time(
    tm: TransitionMatrix,
    start: int,
    target: int,
    walks: int,
    rng: np.random.Generator,
    max_steps: int = 10**7,
) -> tuple[float, float]:
    """Monte Carlo mean and standard error of the hitting time from ``start`` to ``target``.

    Independent of the linear-solve path: walkers are advanced in lockstep by
    inverse-CDF sampling on the rows of ``tm``.
    """
    cdf = np.cumsum(tm.matrix, axis=1)
    cdf[:, -1] = 1.0
    pos = np.full(walks, start, dtype=np.int64)
    steps = np.zeros(walks, dtype=np.int64)
    alive = pos != target
    t = 0
    while alive.any():
        t += 1
        if t > max_steps:
            raise RuntimeError("walkers failed to reach the target")
        idx = np.nonzero(alive)[0]
        u = rng.random(idx.size)
        rows = cdf[pos[idx]]
        pos[idx] = (rows < u[:, None]).sum(axis=1)
        steps[idx] += 1
        alive[idx] = pos[idx] != target
    return float(steps.mean()), float(steps.std(ddof=1) / math.sqrt(walks))


def cheeger_hat(tm: TransitionMatrix, sink: int, limit: int = BRUTE_FORCE_LIMIT) -> float:
    """Minimum of ``rho(boundary U) / rho(U)`` over nonempty U avoiding the sink.

    ``rho(U)`` sums row masses (``|U|`` for a stochastic matrix) and
    ``rho(boundary U)`` sums ``P[u, v]`` for ``u`` in U, ``v`` outside.
    """
    p = tm.matrix
    n = tm.n
    arcs = [(u, v, float(p[u, v])) for u in range(n) for v in range(n) if u != v and p[u, v] > 0]
    boundary, volume, _ = min_ratio_over_sink_free_sets(n, sink, arcs, p.sum(axis=1), limit=limit)
    return boundary / volume


def cheeger_closed_form(g: Graph, eps: float = 0.0) -> float | None:
    """Registered sink-excluding Cheeger value for the simple random walk on named families."""
    n = g.n
    scale = 1.0 - eps
    if g.kind in ("cycle", "complete", "hypercube"):
        return scale / (n - 1)
    if g.kind == "star_center_sink":
        return scale
    if g.kind == "star_outer_sink":
        return scale / (n - 1) ** 2
    return None


def mixing_hitting_bound(n: int, lambda2: float) -> float:
    """``log n / (1 - lambda2)``, the mixing-time ceiling on the worst hitting time."""
    gap = 1.0 - lambda2
    return math.log(n) / gap if gap > 0 else math.inf
