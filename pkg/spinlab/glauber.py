"""Sampling engines: single-site Glauber dynamics and the s <-> r down-up walk.

Every chain owns a Philox stream derived from ``(seed, chain)``, so runs are
reproducible and chains are independent of one another. Multi-stage runs
(telescoping steps, annealing levels) add the stage index to the key.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from spinlab import conf
from spinlab.exact import enumerate_states
from spinlab.exceptions import ChainInvariantError, InfeasibleError, UsageError
from spinlab.levels import Level, Subset
from spinlab.systems import NO_PINNING, Configuration, Pinning, SpinSystem, weight

logger = logging.getLogger(__name__)

# random draws are taken in batches of this many steps
BATCH = 1 << 15


class InitialState(enum.Enum):
    """Initial-state strategies besides an explicit configuration."""

    WARM_START = "warm"
    GREEDY_FEASIBLE = "greedy"


Init = Union[Sequence[int], InitialState]


def chain_rng(seed: int, chain: int = 0, stage: int | None = None) -> np.random.Generator:
    """Philox stream keyed by ``(seed, chain)``, or ``(seed, stage, chain)`` inside a multi-stage run."""
    key = (chain,) if stage is None else (stage, chain)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


@dataclass
class ChainState:
    configuration: np.ndarray
    rng: np.random.Generator
    step: int = 0

    @property
    def spins(self) -> Configuration:
        return tuple(int(c) for c in self.configuration)


@dataclass(frozen=True)
class SubsetState:
    """An element of a level: a set of ``(vertex, spin)`` pairs, kept sorted."""

    elements: Subset

    def __post_init__(self) -> None:
        ordered = tuple(sorted(self.elements))
        if len(set(ordered)) != len(ordered):
            raise UsageError("subset state has repeated elements")
        object.__setattr__(self, "elements", ordered)

    @classmethod
    def from_configuration(cls, configuration: Sequence[int]) -> "SubsetState":
        return cls(tuple((v, int(c)) for v, c in enumerate(configuration)))

    def as_configuration(self, n: int) -> Configuration:
        """The configuration this n-level element encodes."""
        vertices = [v for v, _ in self.elements]
        if vertices != list(range(n)):
            raise UsageError("only an n-subset with one pair per vertex encodes a configuration")
        return tuple(c for _, c in self.elements)


@dataclass
class TrajectorySummary:
    initial: Configuration
    final: Configuration
    steps: int
    burnin: int
    seed: int
    chain: int
    # n x q fraction of post-burnin steps spent in each spin
    frequencies: np.ndarray
    samples: list[Configuration] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "initial": list(self.initial),
            "final": list(self.final),
            "steps": self.steps,
            "burnin": self.burnin,
            "seed": self.seed,
            "chain": self.chain,
            "frequencies": self.frequencies.tolist(),
            "samples": [list(s) for s in self.samples],
        }


@dataclass
class MarginalEstimate:
    value: float
    standard_error: float
    chains: int
    per_chain: list[float]

    def to_dict(self) -> dict:
        return {
            "estimate": self.value,
            "standard_error": self.standard_error,
            "chains": self.chains,
            "per_chain": self.per_chain,
        }


def _free_vertices(system: SpinSystem, p: Pinning) -> np.ndarray:
    p.validate(system)
    return np.array(p.unpinned(system.n), dtype=np.int64)


def _check_state(system: SpinSystem, configuration: Sequence[int], p: Pinning) -> None:
    if not p.extends(configuration):
        raise InfeasibleError("initial configuration disagrees with the pinning")
    if weight(system, configuration).is_zero:
        raise InfeasibleError(f"initial configuration {tuple(configuration)} has zero weight")


def _resample(system: SpinSystem, configuration: np.ndarray, v: int, u: float) -> int:
    w = system.conditional_weights(configuration, v)
    total = w.sum()
    if not total > 0:
        raise ChainInvariantError(f"conditional at vertex {v} has zero total weight")
    c = int(np.searchsorted(np.cumsum(w), u * total, side="right"))
    return min(c, system.q - 1)


def _assert_feasible(system: SpinSystem, configuration: np.ndarray) -> None:
    if weight(system, configuration.tolist()).is_zero:
        raise ChainInvariantError("Glauber update left the feasible set")


def greedy_feasible(system: SpinSystem, p: Pinning = NO_PINNING) -> Configuration:
    """Scan vertices in order and give each the first spin compatible with its assigned neighbours."""
    p.validate(system)
    spins = [-1] * system.n
    for v, c in p.pairs:
        spins[v] = c
    for v in range(system.n):
        if spins[v] >= 0:
            continue
        for c in range(system.q):
            if all(
                spins[u] < 0 or system.A[c, spins[u]] > 0 for u in system.graph.adjacency[v]
            ):
                spins[v] = c
                break
        else:
            raise InfeasibleError(f"greedy scan found no feasible spin at vertex {v}; use a warm start")
    _check_state(system, spins, p)
    return tuple(spins)


def warm_start(system: SpinSystem, rng: np.random.Generator, p: Pinning = NO_PINNING) -> Configuration:
    """Draw an exact sample from the (pinned) Gibbs distribution; desk scale only."""
    space = enumerate_states(system).condition(p)
    index = rng.choice(space.size, p=space.probabilities)
    return tuple(int(c) for c in space.states[index])


def resolve_initial(
    system: SpinSystem, init: Init, rng: np.random.Generator, p: Pinning = NO_PINNING
) -> Configuration:
    if init is InitialState.WARM_START:
        return warm_start(system, rng, p)
    if init is InitialState.GREEDY_FEASIBLE:
        return greedy_feasible(system, p)
    configuration = tuple(int(c) for c in init)
    if len(configuration) != system.n:
        raise UsageError(f"initial configuration has length {len(configuration)}, expected {system.n}")
    _check_state(system, configuration, p)
    return configuration


def glauber_step(system: SpinSystem, st: ChainState, p: Pinning = NO_PINNING) -> ChainState:
    """One heat-bath update at a uniform unpinned vertex; updates *st* in place and returns it."""
    free = _free_vertices(system, p)
    if not len(free):
        raise UsageError("every vertex is pinned")
    v = int(free[st.rng.integers(len(free))])
    st.configuration[v] = _resample(system, st.configuration, v, st.rng.random())
    st.step += 1
    if conf.get("CHECK_FEASIBILITY"):
        _assert_feasible(system, st.configuration)
    return st


def run_chain(
    system: SpinSystem,
    init: Init,
    steps: int,
    seed: int,
    p: Pinning = NO_PINNING,
    *,
    burnin: int = 0,
    thin: int = 0,
    chain: int = 0,
    stage: int | None = None,
) -> TrajectorySummary:
    """Run *steps* Glauber updates from *init*.

    Spin frequencies count the states ``X_t`` for ``burnin < t <= steps``;
    with ``thin > 0`` every ``thin``-th of those states is kept as a sample.
    """
    if steps < 0 or burnin < 0 or thin < 0:
        raise UsageError("steps, burnin and thin must be non-negative")
    rng = chain_rng(seed, chain, stage)
    initial = resolve_initial(system, init, rng, p)
    free = _free_vertices(system, p)
    if steps and not len(free):
        raise UsageError("every vertex is pinned")
    configuration = np.array(initial, dtype=np.int64)
    check = bool(conf.get("CHECK_FEASIBILITY"))
    counts = np.zeros((system.n, system.q))
    since = np.zeros(system.n, dtype=np.int64)
    first = burnin + 1
    samples: list[Configuration] = []
    t = 0
    while t < steps:
        size = min(BATCH, steps - t)
        vertices = free[rng.integers(len(free), size=size)]
        uniforms = rng.random(size)
        for v, u in zip(vertices.tolist(), uniforms.tolist()):
            t += 1
            old = configuration[v]
            new = _resample(system, configuration, v, u)
            if new != old:
                counts[v, old] += max(0, t - max(since[v], first))
                since[v] = t
                configuration[v] = new
                if check:
                    _assert_feasible(system, configuration)
            if thin and t >= first and (t - burnin) % thin == 0:
                samples.append(tuple(configuration.tolist()))
    for v in range(system.n):
        counts[v, configuration[v]] += max(0, steps + 1 - max(since[v], first))
    counted = steps - burnin
    frequencies = counts / counted if counted > 0 else np.full_like(counts, math.nan)
    logger.debug("chain %d (seed %d) ran %d steps on %s", chain, seed, steps, system.name)
    return TrajectorySummary(
        initial=initial,
        final=tuple(configuration.tolist()),
        steps=steps,
        burnin=burnin,
        seed=seed,
        chain=chain,
        frequencies=frequencies,
        samples=samples,
    )


def jackknife_standard_error(per_chain: Sequence[float]) -> float:
    """Leave-one-chain-out standard error of the mean; ``nan`` for a single chain."""
    values = np.asarray(per_chain, dtype=float)
    k = len(values)
    if k < 2:
        return math.nan
    leave_one_out = (values.sum() - values) / (k - 1)
    return float(math.sqrt((k - 1) / k * ((leave_one_out - leave_one_out.mean()) ** 2).sum()))


def estimate_marginal(
    system: SpinSystem,
    p: Pinning,
    v: int,
    spin: int,
    steps: int,
    burnin: int,
    chains: int,
    seed: int,
    init: Init = InitialState.GREEDY_FEASIBLE,
    stage: int | None = None,
) -> MarginalEstimate:
    """Monte Carlo ``mu(sigma_v = spin | tau)`` from independent chains."""
    if v in p.vertices:
        raise UsageError(f"vertex {v} is pinned")
    if not 0 <= v < system.n or not 0 <= spin < system.q:
        raise UsageError(f"no vertex {v} or spin {spin} in this system")
    if chains < 1 or steps <= burnin:
        raise UsageError("need at least one chain and steps > burnin")
    per_chain = [
        float(
            run_chain(system, init, steps, seed, p, burnin=burnin, chain=c, stage=stage).frequencies[v, spin]
        )
        for c in range(chains)
    ]
    return MarginalEstimate(
        value=float(np.mean(per_chain)),
        standard_error=jackknife_standard_error(per_chain),
        chains=chains,
        per_chain=per_chain,
    )


# --- down-up walk on a level -------------------------------------------------


def down_up_step(level: Level, st: SubsetState, r: int, rng: np.random.Generator) -> SubsetState:
    """Drop to a uniform r-subset, then re-extend proportionally to the level masses."""
    s = len(st.elements)
    if s != level.size:
        raise UsageError(f"state has {s} elements but the level is {level.size}")
    if not 0 <= r <= s:
        raise UsageError(f"need 0 <= r <= {s}, got {r}")
    if r == s:
        return st
    kept = np.sort(rng.choice(s, size=r, replace=False))
    lower = tuple(st.elements[i] for i in kept)
    candidates = level.superset_index(r).get(lower)
    if candidates is None or not len(candidates):
        raise ChainInvariantError(f"no support element extends {lower}")
    weights = level.masses[candidates]
    j = candidates[rng.choice(len(candidates), p=weights / weights.sum())]
    return SubsetState(level.subsets[j])


def run_down_up(
    level: Level, start: SubsetState, r: int, steps: int, seed: int, chain: int = 0
) -> tuple[SubsetState, np.ndarray]:
    """Run the walk; returns the final state and the visit counts per level element."""
    rng = chain_rng(seed, chain)
    level.index_of(start.elements)
    visits = np.zeros(len(level), dtype=np.int64)
    st = start
    for _ in range(steps):
        st = down_up_step(level, st, r, rng)
        visits[level.index[st.elements]] += 1
    return st, visits
