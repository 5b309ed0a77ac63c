"""Network topologies: construction, degree statistics and sink-excluding expansion.

Nodes are dense integers ``0..n-1``. A :class:`Graph` carries the sink and the
source set alongside its edges so that every downstream computation (walks,
occupancy, bounds, simulation) sees one consistent network description.
"""
from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import BruteForceLimitError, TopologyError

BRUTE_FORCE_LIMIT = 22
RGG_MAX_ATTEMPTS = 100

KINDS = (
    "cycle",
    "path",
    "star_center_sink",
    "star_outer_sink",
    "complete",
    "hypercube",
    "rgg",
    "edge_list_file",
)


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph with a designated sink and source set.

    ``kind`` records the family the graph was built from so that registered
    closed forms can stand in for brute-force constants at large ``n``.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    sink: int
    sources: tuple[int, ...]
    kind: str = "custom"
    positions: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        edges = tuple(sorted((min(u, v), max(u, v)) for u, v in self.edges))
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "sources", tuple(sorted(set(self.sources))))
        self._validate()

    def _validate(self):
        n = self.n
        if n < 2:
            raise TopologyError(f"need at least 2 nodes, got {n}")
        seen = set()
        for u, v in self.edges:
            if not (0 <= u < n and 0 <= v < n):
                raise TopologyError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise TopologyError(f"self-loop at node {u}")
            if (u, v) in seen:
                raise TopologyError(f"duplicate edge ({u}, {v})")
            seen.add((u, v))
        if not 0 <= self.sink < n:
            raise TopologyError(f"sink {self.sink} out of range")
        for s in self.sources:
            if not 0 <= s < n:
                raise TopologyError(f"source {s} out of range")
        if self.sink in self.sources:
            raise TopologyError("sink cannot be a source")
        if not self.sources:
            raise TopologyError("source set is empty")
        if min(self.degrees) < 1 or not is_connected(n, self.adjacency):
            raise TopologyError("graph is not connected")

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        return tuple(tuple(sorted(a)) for a in nbrs)

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def k(self) -> int:
        return len(self.sources)

    def neighbors(self, u: int) -> tuple[int, ...]:
        return self.adjacency[u]

    def all_sources(self) -> bool:
        """True when every non-sink node is a source."""
        return self.k == self.n - 1

    def with_sources(self, sources: Iterable[int]) -> "Graph":
        return Graph(self.n, self.edges, self.sink, tuple(sources), self.kind, self.positions)

    def write_edge_list(self, path) -> None:
        lines = [f"sink {self.sink}", "sources " + " ".join(map(str, self.sources))]
        lines += [f"{u} {v}" for u, v in self.edges]
        Path(path).write_text("\n".join(lines) + "\n")


def is_connected(n: int, adjacency: Sequence[Sequence[int]]) -> bool:
    seen = [False] * n
    seen[0] = True
    todo = deque([0])
    count = 1
    while todo:
        u = todo.popleft()
        for v in adjacency[u]:
            if not seen[v]:
                seen[v] = True
                count += 1
                todo.append(v)
    return count == n


@dataclass
class TopologySpec:
    """Serializable description of a topology; see :func:`build_topology`."""

    kind: str
    n: int | None = None
    x: int | None = None
    r: float | None = None
    seed: int = 0
    sink: int | None = None
    sources: list[int] | None = None
    path: str | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "TopologySpec":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise TopologyError(f"unknown topology keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def validate(self) -> None:
        kind = self.kind
        if kind not in KINDS:
            raise TopologyError(f"unknown topology kind {kind!r}")
        if kind == "hypercube":
            if self.x is None and self.n is None:
                raise TopologyError("hypercube needs x or n")
            if self.x is not None and self.x < 1:
                raise TopologyError("hypercube dimension must be >= 1")
            if self.n is not None and (self.n < 2 or self.n & (self.n - 1)):
                raise TopologyError(f"hypercube n={self.n} is not a power of two")
            if self.x is not None and self.n is not None and self.n != 2 ** self.x:
                raise TopologyError("hypercube n must equal 2**x")
        elif kind == "edge_list_file":
            if not self.path:
                raise TopologyError("edge_list_file needs a path")
        else:
            if self.n is None:
                raise TopologyError(f"{kind} needs n")
            minimum = {"cycle": 3, "star_center_sink": 2, "star_outer_sink": 3}.get(kind, 2)
            if self.n < minimum:
                raise TopologyError(f"{kind} needs n >= {minimum}, got {self.n}")
        if kind == "rgg" and self.r is not None and self.r <= 0:
            raise TopologyError("rgg radius must be positive")


def build_topology(spec: TopologySpec | dict) -> Graph:
    """Construct the connected graph described by ``spec``."""
    if isinstance(spec, dict):
        spec = TopologySpec.from_dict(spec)
    spec.validate()
    kind = spec.kind
    positions = None
    if kind == "edge_list_file":
        return read_edge_list(spec.path)
    if kind == "hypercube":
        x = spec.x if spec.x is not None else int(round(math.log2(spec.n)))
        n = 2 ** x
        edges = [(u, u ^ (1 << b)) for u in range(n) for b in range(x) if u < u ^ (1 << b)]
        default_sink = 0
    else:
        n = spec.n
        if kind == "cycle":
            edges = [(i, (i + 1) % n) for i in range(n)]
            default_sink = 0
        elif kind == "path":
            edges = [(i, i + 1) for i in range(n - 1)]
            default_sink = 0
        elif kind == "complete":
            edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
            default_sink = 0
        elif kind == "star_center_sink":
            edges = [(0, i) for i in range(1, n)]
            default_sink = 0
            if spec.sink not in (None, 0):
                raise TopologyError("star_center_sink places the sink at the center (node 0)")
        elif kind == "star_outer_sink":
            edges = [(0, i) for i in range(1, n)]
            default_sink = 1
            if spec.sink == 0:
                raise TopologyError("star_outer_sink needs the sink on a leaf, not the center")
        elif kind == "rgg":
            r = spec.r if spec.r is not None else default_rgg_radius(n)
            positions, edges = _connected_rgg(n, r, spec.seed)
            default_sink = 0
        else:  # pragma: no cover - validate() rejects unknown kinds
            raise TopologyError(kind)
    sink = default_sink if spec.sink is None else spec.sink
    if not 0 <= sink < n:
        raise TopologyError(f"sink {sink} out of range for n={n}")
    sources = spec.sources if spec.sources is not None else [u for u in range(n) if u != sink]
    return Graph(n, tuple(edges), sink, tuple(sources), kind, positions)


def default_rgg_radius(n: int) -> float:
    return 2.0 * math.sqrt(math.log(n) / n)


def random_geometric_edges(points: np.ndarray, r: float) -> list[tuple[int, int]]:
    diff = points[:, None, :] - points[None, :, :]
    close = np.einsum("ijk,ijk->ij", diff, diff) <= r * r
    iu, ju = np.nonzero(np.triu(close, k=1))
    return list(zip(iu.tolist(), ju.tolist()))


def _connected_rgg(n: int, r: float, seed: int):
    for attempt in range(RGG_MAX_ATTEMPTS):
        rng = np.random.default_rng(np.random.SeedSequence([seed, attempt]))
        radius = np.sqrt(rng.random(n))
        theta = 2.0 * np.pi * rng.random(n)
        pts = np.column_stack([radius * np.cos(theta), radius * np.sin(theta)])
        edges = random_geometric_edges(pts, r)
        adj: list[list[int]] = [[] for _ in range(n)]
        for u, v in edges:
            adj[u].append(v)
            adj[v].append(u)
        if is_connected(n, adj):
            return pts, edges
    raise TopologyError(
        f"rgg with n={n}, r={r:.4g} not connected after {RGG_MAX_ATTEMPTS} attempts"
    )


def read_edge_list(path) -> Graph:
    """Parse the edge-list text format.

    Header lines ``sink <id>`` (required), ``sources <ids>`` and ``nodes <n>``
    (optional) may appear anywhere; every other non-blank, non-``#`` line is
    a ``u v`` pair. Default sources are all non-sink nodes.
    """
    sink = None
    sources = None
    n = None
    edges = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.replace(",", " ").split()
        head = tokens[0].lower()
        try:
            if head == "sink":
                sink = int(tokens[1])
            elif head == "sources":
                sources = [int(t) for t in tokens[1:]]
            elif head == "nodes":
                n = int(tokens[1])
            elif len(tokens) == 2:
                edges.append((int(tokens[0]), int(tokens[1])))
            else:
                raise ValueError
        except (ValueError, IndexError):
            raise TopologyError(f"{path}:{lineno}: cannot parse {raw!r}") from None
    if sink is None:
        raise TopologyError(f"{path}: missing 'sink <id>' header")
    if n is None:
        n = 1 + max([sink] + [max(e) for e in edges] + (sources or []))
    if sources is None:
        sources = [u for u in range(n) if u != sink]
    return Graph(n, tuple(edges), sink, tuple(sources), "edge_list_file")


def degree_stats(g: Graph) -> tuple[int, int, np.ndarray]:
    deg = g.degrees
    return int(deg.min()), int(deg.max()), deg.copy()


def _as_member_mask(g: Graph, U: Iterable[int]) -> np.ndarray:
    mask = np.zeros(g.n, dtype=bool)
    for u in U:
        if not 0 <= u < g.n:
            raise ValueError(f"node {u} out of range")
        mask[u] = True
    return mask


def edge_boundary_size(g: Graph, U: Iterable[int]) -> int:
    """Number of edges with exactly one endpoint in ``U``."""
    inside = _as_member_mask(g, U)
    size = int(inside.sum())
    if size == 0 or size == g.n:
        raise ValueError("U must be a nonempty proper subset of V")
    return sum(1 for u, v in g.edges if inside[u] != inside[v])


def min_ratio_over_sink_free_sets(
    n: int,
    sink: int,
    arcs: Sequence[tuple[int, int, float]],
    volume: np.ndarray,
    limit: int = BRUTE_FORCE_LIMIT,
    chunk: int = 1 << 16,
) -> tuple[float, float, tuple[int, ...]]:
    """Exhaustively minimise ``boundary(U) / volume(U)`` over nonempty U not holding the sink.

    ``arcs`` are directed ``(a, b, w)`` terms counted when ``a in U`` and
    ``b not in U``. Returns ``(boundary, volume, U)`` of a minimiser.
    """
    if n > limit:
        raise BruteForceLimitError(f"n={n} exceeds brute-force limit {limit}")
    others = [u for u in range(n) if u != sink]
    total = 1 << len(others)
    best = (math.inf, 1.0, 0)
    for start in range(1, total, chunk):
        masks = np.arange(start, min(start + chunk, total), dtype=np.int64)
        member = np.zeros((n, masks.size), dtype=bool)
        for bit, u in enumerate(others):
            member[u] = (masks >> bit) & 1
        outside = ~member
        num = np.zeros(masks.size)
        for a, b, w in arcs:
            num += w * (member[a] & outside[b])
        den = volume @ member
        ratio = num / den
        j = int(np.argmin(ratio))
        if ratio[j] < best[0] / best[1]:
            best = (float(num[j]), float(den[j]), int(masks[j]))
    mask = best[2]
    chosen = tuple(u for bit, u in enumerate(others) if mask >> bit & 1)
    return best[0], best[1], chosen


def expansion_closed_form(g: Graph) -> Fraction | None:
    """Registered value of the sink-excluding edge expansion for named families.

    Only valid when the sources are ``V \\ {sink}``; returns None otherwise or
    for families without a registered value.
    """
    n = g.n
    if g.kind == "cycle":
        return Fraction(2, n - 1)
    if g.kind in ("complete", "star_center_sink"):
        return Fraction(1)
    if g.kind == "star_outer_sink":
        return Fraction(1, n - 1)
    if g.kind == "hypercube":
        return Fraction(int(round(math.log2(n))), n - 1)
    return None


def edge_expansion_hat(g: Graph, limit: int = BRUTE_FORCE_LIMIT) -> Fraction:
    """Minimum of ``|boundary(U)| / |U|`` over nonempty U avoiding the sink.

    Exhaustive below ``limit`` nodes; above it falls back to the registered
    closed form for the graph's family.
    """
    if g.n > limit:
        value = expansion_closed_form(g)
        if value is None:
            raise BruteForceLimitError(
                f"n={g.n} exceeds brute-force limit {limit} and {g.kind!r} has no closed form"
            )
        return value
    arcs = [(u, v, 1.0) for u, v in g.edges] + [(v, u, 1.0) for u, v in g.edges]
    boundary, size, _ = min_ratio_over_sink_free_sets(
        g.n, g.sink, arcs, np.ones(g.n), limit=limit
    )
    return Fraction(int(round(boundary)), int(round(size)))
