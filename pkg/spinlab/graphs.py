"""Simple undirected graphs: structure queries, edge-list I/O and generators.

Vertices are the integers ``0..n-1``. Graph values are immutable; derived
data (adjacency lists, the networkx view) is computed once and cached on the
instance.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping

import networkx as nx
import numpy as np

from spinlab import conf
from spinlab.bounds import ceil_guarded
from spinlab.exceptions import GraphFormatError, UsageError

logger = logging.getLogger(__name__)

Edge = tuple[int, int]

# girth of a forest
UNBOUNDED = float("inf")

GENERATOR_KINDS = (
    "cycle",
    "path",
    "complete",
    "complete_bipartite",
    "grid",
    "random_regular",
    "gnp",
    "star",
    "empty",
)


def _normalize(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    n: int
    edges: frozenset[Edge]

    def __post_init__(self) -> None:
        if self.n < 0:
            raise UsageError("vertex count must be non-negative")
        for u, v in self.edges:
            if u == v:
                raise UsageError(f"self-loop at vertex {u}")
            if not (0 <= u < v < self.n):
                raise UsageError(f"edge ({u}, {v}) is not a normalized pair over 0..{self.n - 1}")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        """Build a graph, rejecting self-loops, duplicates and bad ids."""
        seen: set[Edge] = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise UsageError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise UsageError(f"vertex out of range in edge ({u}, {v}) for n={n}")
            edge = _normalize(u, v)
            if edge in seen:
                raise UsageError(f"duplicate edge ({edge[0]}, {edge[1]})")
            seen.add(edge)
        return cls(n=n, edges=frozenset(seen))

    @cached_property
    def edge_list(self) -> tuple[Edge, ...]:
        return tuple(sorted(self.edges))

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        neighbors: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            neighbors[u].append(v)
            neighbors[v].append(u)
        return tuple(tuple(sorted(nbrs)) for nbrs in neighbors)

    @property
    def m(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(nbrs) for nbrs in self.adjacency)

    def has_edge(self, u: int, v: int) -> bool:
        return _normalize(u, v) in self.edges

    def closed_neighborhood(self, v: int) -> frozenset[int]:
        return frozenset(self.adjacency[v]) | {v}

    def remove_closed_neighborhood(
        self, v: int, alive: frozenset[int] | None = None
    ) -> frozenset[int]:
        """Vertex set of ``G[alive] \\ N[v]``, in original ids."""
        alive = frozenset(range(self.n)) if alive is None else alive
        if v not in alive:
            raise UsageError(f"vertex {v} is not present")
        return alive - self.closed_neighborhood(v)

    def induced(self, vertices: Iterable[int]) -> tuple["Graph", tuple[int, ...]]:
        """Return ``G[vertices]`` relabeled to ``0..k-1`` and the map new id -> old id."""
        kept = tuple(sorted(set(vertices)))
        index = {old: new for new, old in enumerate(kept)}
        edges = [
            (index[u], index[v]) for u, v in self.edges if u in index and v in index
        ]
        return Graph.from_edges(len(kept), edges), kept

    @cached_property
    def nx_graph(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n))
        graph.add_edges_from(self.edge_list)
        return graph


@dataclass(frozen=True)
class BipartitePartition:
    left: frozenset[int]
    right: frozenset[int]

    def validate(self, g: Graph) -> None:
        """Raise :class:`UsageError` unless this is a bipartition of *g*."""
        if self.left & self.right:
            raise UsageError("bipartition sides overlap")
        if self.left | self.right != frozenset(range(g.n)):
            raise UsageError("bipartition sides do not cover the vertex set")
        for u, v in g.edges:
            if (u in self.left) == (v in self.left):
                raise UsageError(f"edge ({u}, {v}) does not cross the bipartition")

    def swapped(self) -> "BipartitePartition":
        return BipartitePartition(left=self.right, right=self.left)


class NotBipartite:
    """Returned by :func:`bipartite_partition` for graphs with an odd cycle."""

    def __repr__(self) -> str:
        return "NOT_BIPARTITE"


NOT_BIPARTITE = NotBipartite()


# --- edge-list documents -------------------------------------------------


def load_graph(text: str) -> Graph:
    """Parse an edge-list document.

    ``#`` lines are comments, the first data line is ``n m`` and exactly
    ``m`` lines ``u v`` follow (0-indexed, whitespace separated).
    """
    header: tuple[int, int] | None = None
    edges: list[Edge] = []
    seen: set[Edge] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 2:
            raise GraphFormatError(f"expected two integers, got {line!r}", lineno)
        try:
            a, b = int(fields[0]), int(fields[1])
        except ValueError:
            raise GraphFormatError(f"expected two integers, got {line!r}", lineno) from None
        if header is None:
            if a < 0 or b < 0:
                raise GraphFormatError("negative vertex or edge count", lineno)
            header = (a, b)
            continue
        n, m = header
        if len(edges) == m:
            raise GraphFormatError(f"more than the declared {m} edges", lineno)
        if not (0 <= a < n and 0 <= b < n):
            raise GraphFormatError(f"vertex out of range in {line!r} (n={n})", lineno)
        if a == b:
            raise GraphFormatError(f"self-loop at vertex {a}", lineno)
        edge = _normalize(a, b)
        if edge in seen:
            raise GraphFormatError(f"duplicate edge {edge[0]} {edge[1]}", lineno)
        seen.add(edge)
        edges.append(edge)
    if header is None:
        raise GraphFormatError("missing 'n m' header line")
    if len(edges) != header[1]:
        raise GraphFormatError(f"declared {header[1]} edges, found {len(edges)}")
    return Graph(n=header[0], edges=frozenset(edges))


def serialize_graph(g: Graph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{u} {v}" for u, v in g.edge_list)
    return "\n".join(lines) + "\n"


def read_graph(path: Path | str) -> Graph:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read graph file {path}: {exc}") from exc
    return load_graph(text)


def write_graph(g: Graph, path: Path | str) -> None:
    Path(path).write_text(serialize_graph(g), encoding="utf-8")


# --- structure -------------------------------------------------------------


def max_degree(g: Graph) -> int:
    return max(g.degrees, default=0)


def girth(g: Graph) -> float:
    """Length of a shortest cycle, :data:`UNBOUNDED` for forests."""
    best = nx.girth(g.nx_graph)
    return UNBOUNDED if best == UNBOUNDED else int(best)


def line_graph(g: Graph) -> tuple[Graph, tuple[Edge, ...]]:
    """Line graph of *g* and the map from its vertex ids to edges of *g*.

    Line-graph vertex ``i`` is the ``i``-th edge of ``g.edge_list``.
    """
    edge_map = g.edge_list
    index = {edge: i for i, edge in enumerate(edge_map)}
    line = nx.line_graph(g.nx_graph)
    edges = ((index[_normalize(*a)], index[_normalize(*b)]) for a, b in line.edges())
    return Graph.from_edges(len(edge_map), edges), edge_map


def component_of(g: Graph, s: Iterable[int], v: int) -> frozenset[int]:
    """S_v: the connected component of ``G[s]`` containing *v*."""
    members = frozenset(s)
    if v not in members:
        raise UsageError(f"vertex {v} is not in the given set")
    return frozenset(nx.node_connected_component(g.nx_graph.subgraph(members), v))


def components(g: Graph, s: Iterable[int]) -> list[frozenset[int]]:
    """C(S): the components of ``G[s]``, ordered by smallest vertex."""
    sub = g.nx_graph.subgraph(frozenset(s))
    return sorted((frozenset(c) for c in nx.connected_components(sub)), key=min)


def sample_component_sizes(
    g: Graph, theta: float, v: int, samples: int, seed: int
) -> np.ndarray:
    """Counts of ``|S_v| = k`` (index k) for uniform S of size ``ceil(theta n)``.

    Samples where ``v`` is not drawn contribute to index 0.
    """
    size = ceil_guarded(theta * g.n)
    if not (1 <= size <= g.n):
        raise UsageError(f"theta={theta} gives block size {size} outside 1..{g.n}")
    rng = np.random.default_rng(seed)
    counts = np.zeros(size + 1, dtype=np.int64)
    for _ in range(samples):
        chosen = rng.choice(g.n, size=size, replace=False)
        members = set(chosen.tolist())
        if v in members:
            counts[len(component_of(g, members, v))] += 1
        else:
            counts[0] += 1
    return counts


def bipartite_partition(g: Graph) -> BipartitePartition | NotBipartite:
    """2-colour *g*; each component's lowest vertex goes to the left side.

    Isolated vertices are placed on the left.
    """
    graph = g.nx_graph
    if not nx.is_bipartite(graph):
        return NOT_BIPARTITE
    colour = nx.bipartite.color(graph)
    left: set[int] = set()
    for comp in nx.connected_components(graph):
        root = min(comp)
        left.update(v for v in comp if colour[v] == colour[root])
    return BipartitePartition(left=frozenset(left), right=frozenset(range(g.n)) - frozenset(left))


# --- generators ------------------------------------------------------------


def _int_param(params: Mapping[str, object], key: str, minimum: int = 0) -> int:
    if key not in params:
        raise UsageError(f"missing parameter {key!r}")
    raw = params[key]
    if isinstance(raw, float) and not raw.is_integer():
        raise UsageError(f"parameter {key!r} must be an integer, got {raw}")
    try:
        value = int(raw)  # type: ignore[arg-type]
    except (TypeError, ValueError):
        raise UsageError(f"parameter {key!r} must be an integer") from None
    if value < minimum:
        raise UsageError(f"parameter {key!r} must be at least {minimum}")
    return value


def _random_regular(n: int, d: int, rng: np.random.Generator, attempts: int) -> Graph:
    """Pairing model: shuffle ``n*d`` stubs, pair consecutive ones, reject loops/multi-edges."""
    if (n * d) % 2:
        raise UsageError("random_regular needs n*d even")
    if not 0 <= d < n:
        raise UsageError("random_regular needs 0 <= d < n")
    stubs = np.repeat(np.arange(n), d)
    for attempt in range(1, attempts + 1):
        paired = rng.permutation(stubs).reshape(-1, 2)
        edges: set[Edge] = set()
        for u, v in paired.tolist():
            if u == v:
                break
            edge = _normalize(u, v)
            if edge in edges:
                break
            edges.add(edge)
        else:
            logger.debug("random_regular(n=%d, d=%d) accepted on attempt %d", n, d, attempt)
            return Graph(n=n, edges=frozenset(edges))
    raise UsageError(f"random_regular rejection budget of {attempts} attempts exceeded")


def generate(kind: str, params: Mapping[str, object], seed: int = 0) -> Graph:
    """Build a graph of family *kind*; random families are pure functions of the seed."""
    if kind == "cycle":
        n = _int_param(params, "n", 3)
        return Graph.from_edges(n, ((i, (i + 1) % n) for i in range(n)))
    if kind == "path":
        n = _int_param(params, "n", 1)
        return Graph.from_edges(n, ((i, i + 1) for i in range(n - 1)))
    if kind == "complete":
        n = _int_param(params, "n", 1)
        return Graph.from_edges(n, combinations(range(n), 2))
    if kind == "complete_bipartite":
        a = _int_param(params, "a", 0)
        b = _int_param(params, "b", 0)
        return Graph.from_edges(a + b, ((i, a + j) for i in range(a) for j in range(b)))
    if kind == "star":
        m = _int_param(params, "m", 0)
        return Graph.from_edges(m + 1, ((0, i) for i in range(1, m + 1)))
    if kind == "empty":
        return Graph.from_edges(_int_param(params, "n", 0), ())
    if kind == "grid":
        rows = _int_param(params, "rows", 1)
        cols = _int_param(params, "cols", 1)
        grid = nx.convert_node_labels_to_integers(
            nx.grid_2d_graph(rows, cols), ordering="sorted"
        )
        return Graph.from_edges(rows * cols, grid.edges())
    if kind == "random_regular":
        n = _int_param(params, "n", 1)
        d = _int_param(params, "d", 0)
        attempts = int(params.get("attempts", conf.get("REGULAR_MAX_ATTEMPTS")))
        return _random_regular(n, d, np.random.default_rng(seed), attempts)
    if kind == "gnp":
        n = _int_param(params, "n", 1)
        try:
            d = float(params["d"])  # type: ignore[arg-type]
        except (KeyError, TypeError, ValueError):
            raise UsageError("gnp needs a numeric average degree 'd'") from None
        if not 0 <= d <= n:
            raise UsageError("gnp needs 0 <= d <= n")
        graph = nx.gnp_random_graph(n, d / n, seed=seed)
        return Graph.from_edges(n, graph.edges())
    raise UsageError(f"unknown graph family {kind!r}; choose from {', '.join(GENERATOR_KINDS)}")
