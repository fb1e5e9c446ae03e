"""q-spin systems on graphs: the hardcore, coloring and monomer-dimer models.

A :class:`SpinSystem` is a graph plus an interaction matrix ``A`` and a field
vector ``h``; the Gibbs weight of a configuration is
``prod_{uv in E} A[s_u, s_v] * prod_v h[s_v]``. Weights are carried in log
space with an exact zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from spinlab import conf
from spinlab.exceptions import CapExceededError, UsageError
from spinlab.graphs import Edge, Graph, line_graph

Configuration = tuple[int, ...]

MODELS = ("hardcore", "coloring", "matching")

# hardcore spin labels
UNOCCUPIED, OCCUPIED = 0, 1


@dataclass(frozen=True)
class Weight:
    """A non-negative weight stored as its logarithm; ``-inf`` is an exact zero."""

    log_value: float

    @property
    def is_zero(self) -> bool:
        return self.log_value == -math.inf

    @property
    def value(self) -> float:
        return 0.0 if self.is_zero else math.exp(self.log_value)


ZERO = Weight(-math.inf)


@dataclass(frozen=True)
class SpinSystem:
    graph: Graph
    q: int
    interaction: tuple[tuple[float, ...], ...]
    fields: tuple[float, ...]
    name: str = "custom"

    def __post_init__(self) -> None:
        if self.q < 2:
            raise UsageError(f"spin count q must be at least 2, got {self.q}")
        if len(self.interaction) != self.q or any(len(row) != self.q for row in self.interaction):
            raise UsageError("interaction matrix must be q x q")
        if len(self.fields) != self.q:
            raise UsageError("field vector must have length q")
        for i in range(self.q):
            for j in range(self.q):
                if self.interaction[i][j] < 0:
                    raise UsageError("interaction entries must be non-negative")
                if self.interaction[i][j] != self.interaction[j][i]:
                    raise UsageError("interaction matrix must be symmetric")
        if any(h <= 0 for h in self.fields):
            raise UsageError("external fields must be positive")

    @property
    def n(self) -> int:
        return self.graph.n

    @cached_property
    def A(self) -> np.ndarray:
        return np.array(self.interaction, dtype=float)

    @cached_property
    def h(self) -> np.ndarray:
        return np.array(self.fields, dtype=float)

    @cached_property
    def log_A(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.A)

    @cached_property
    def log_h(self) -> np.ndarray:
        return np.log(self.h)

    @cached_property
    def neighbor_arrays(self) -> tuple[np.ndarray, ...]:
        return tuple(np.array(nbrs, dtype=np.int64) for nbrs in self.graph.adjacency)

    def conditional_weights(self, spins: np.ndarray, v: int) -> np.ndarray:
        """Unnormalized weights of each spin at *v* given the other spins."""
        nbrs = self.neighbor_arrays[v]
        return self.h * self.A[:, spins[nbrs]].prod(axis=1)


@dataclass(frozen=True)
class Pinning:
    """A partial configuration: sorted ``(vertex, spin)`` pairs over Lambda."""

    pairs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        vertices = [v for v, _ in self.pairs]
        if len(set(vertices)) != len(vertices):
            raise UsageError("a pinning fixes each vertex at most once")
        if list(self.pairs) != sorted(self.pairs):
            object.__setattr__(self, "pairs", tuple(sorted(self.pairs)))

    @classmethod
    def from_mapping(cls, pinned: Mapping[int, int]) -> "Pinning":
        return cls(tuple(sorted((int(v), int(c)) for v, c in pinned.items())))

    @cached_property
    def pinned(self) -> dict[int, int]:
        return dict(self.pairs)

    @cached_property
    def vertices(self) -> frozenset[int]:
        return frozenset(self.pinned)

    def __len__(self) -> int:
        return len(self.pairs)

    def validate(self, system: SpinSystem) -> None:
        for v, c in self.pairs:
            if not 0 <= v < system.n:
                raise UsageError(f"pinned vertex {v} out of range")
            if not 0 <= c < system.q:
                raise UsageError(f"pinned spin {c} out of range at vertex {v}")

    def extends(self, configuration: Sequence[int]) -> bool:
        """True when *configuration* agrees with this pinning."""
        return all(configuration[v] == c for v, c in self.pairs)

    def unpinned(self, n: int) -> tuple[int, ...]:
        return tuple(v for v in range(n) if v not in self.pinned)


NO_PINNING = Pinning()


# --- named models ----------------------------------------------------------


def hardcore_system(g: Graph, lam: float) -> SpinSystem:
    """Hardcore model at fugacity *lam*; spin 1 is an occupied vertex."""
    if not lam > 0:
        raise UsageError(f"fugacity must be positive, got {lam}")
    return SpinSystem(
        graph=g,
        q=2,
        interaction=((1.0, 1.0), (1.0, 0.0)),
        fields=(1.0, float(lam)),
        name="hardcore",
    )


def coloring_system(g: Graph, k: int) -> SpinSystem:
    """Uniform proper k-colorings: ``A = J - I``, ``h = 1``."""
    if k < 2:
        raise UsageError(f"need at least 2 colours, got {k}")
    interaction = tuple(tuple(0.0 if i == j else 1.0 for j in range(k)) for i in range(k))
    return SpinSystem(graph=g, q=k, interaction=interaction, fields=(1.0,) * k, name="coloring")


def monomer_dimer_system(g: Graph, lam: float) -> tuple[SpinSystem, tuple[Edge, ...]]:
    """Hardcore model on the line graph; returns the system and its vertex -> edge map."""
    if g.m == 0:
        raise UsageError("the monomer-dimer model needs at least one edge")
    lg, edge_map = line_graph(g)
    system = hardcore_system(lg, lam)
    return SpinSystem(lg, system.q, system.interaction, system.fields, name="matching"), edge_map


def build_system(
    g: Graph, model: str, lam: float | None = None, k: int | None = None
) -> tuple[SpinSystem, tuple[Edge, ...] | None]:
    """Construct *model* on *g*; the edge map is only set for ``matching``."""
    if model == "hardcore":
        return hardcore_system(g, 1.0 if lam is None else lam), None
    if model == "coloring":
        if k is None:
            raise UsageError("the coloring model needs k")
        return coloring_system(g, k), None
    if model == "matching":
        return monomer_dimer_system(g, 1.0 if lam is None else lam)
    raise UsageError(f"unknown model {model!r}; choose from {', '.join(MODELS)}")


# --- weights and feasibility ----------------------------------------------


def weight(system: SpinSystem, sigma: Sequence[int]) -> Weight:
    """Gibbs weight of *sigma*, exactly zero when any factor vanishes."""
    if len(sigma) != system.n:
        raise UsageError(f"configuration has length {len(sigma)}, expected {system.n}")
    if any(not 0 <= c < system.q for c in sigma):
        raise UsageError("configuration spin out of range")
    total = 0.0
    for u, v in system.graph.edges:
        factor = system.log_A[sigma[u], sigma[v]]
        if factor == -math.inf:
            return ZERO
        total += factor
    total += sum(system.log_h[c] for c in sigma)
    return Weight(float(total))


def is_feasible_pinning(system: SpinSystem, p: Pinning, cap: int | None = None) -> bool:
    """True when some extension of *p* has positive weight.

    Decided by a pruned search over the unpinned vertices; the search is
    refused when ``q^(n - |Lambda|)`` exceeds the enumeration cap.
    """
    p.validate(system)
    free = p.unpinned(system.n)
    limit = conf.cap(cap)
    if system.q ** len(free) > limit:
        raise CapExceededError(
            f"feasibility search over q^{len(free)} = {system.q ** len(free)} extensions exceeds cap {limit}"
        )
    spins = np.zeros(system.n, dtype=np.int64)
    assigned = np.zeros(system.n, dtype=bool)
    for v, c in p.pairs:
        spins[v] = c
        assigned[v] = True
    # pinned pairs must already be compatible with each other
    for u, v in system.graph.edges:
        if assigned[u] and assigned[v] and system.A[spins[u], spins[v]] == 0:
            return False

    def compatible(v: int, c: int) -> bool:
        for u in system.graph.adjacency[v]:
            if assigned[u] and system.A[c, spins[u]] == 0:
                return False
        return True

    def search(i: int) -> bool:
        if i == len(free):
            return True
        v = free[i]
        for c in range(system.q):
            if compatible(v, c):
                spins[v], assigned[v] = c, True
                if search(i + 1):
                    return True
                assigned[v] = False
        return False

    return search(0)


def parse_configuration(text: str, n: int) -> Configuration:
    """Parse ``"0,1,0"`` or ``"0 1 0"`` into a configuration of length *n*."""
    try:
        spins = tuple(int(tok) for tok in text.replace(",", " ").split())
    except ValueError:
        raise UsageError(f"cannot parse configuration {text!r}") from None
    if len(spins) != n:
        raise UsageError(f"configuration has length {len(spins)}, expected {n}")
    return spins


def parse_pinning(text: str) -> Pinning:
    """Parse ``"v:c,v:c"`` into a :class:`Pinning`; an empty string is no pinning."""
    pairs: list[tuple[int, int]] = []
    for token in filter(None, (tok.strip() for tok in text.split(","))):
        try:
            v, c = token.split(":")
            pairs.append((int(v), int(c)))
        except ValueError:
            raise UsageError(f"cannot parse pinning entry {token!r}; use vertex:spin") from None
    return Pinning(tuple(pairs))
