"""Brute-force ground truth for small spin systems.

Feasible configurations are enumerated in lexicographic order by a
vectorized backtracking search that prunes every partial assignment with a
zero interaction factor. All probability arithmetic stays in log space
until the final normalization.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import combinations
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.special import comb, logsumexp

from spinlab import conf
from spinlab.exceptions import CapExceededError, InfeasibleError, UsageError
from spinlab.levels import level_distribution
from spinlab.systems import NO_PINNING, Pinning, SpinSystem

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class StateSpace:
    """Feasible configurations of a system (optionally under a pinning) and their Gibbs law."""

    system: SpinSystem
    states: np.ndarray
    log_weights: np.ndarray
    probabilities: np.ndarray
    log_z: float
    pinning: Pinning = field(default=NO_PINNING)

    @property
    def size(self) -> int:
        return len(self.states)

    @property
    def z(self) -> float:
        return math.exp(self.log_z)

    @property
    def n(self) -> int:
        return self.system.n

    @cached_property
    def codes(self) -> np.ndarray:
        """Base-q integer code of every state; increasing in state order."""
        q, n = self.system.q, self.system.n
        if q**n >= 2**63:
            raise CapExceededError(f"state codes q^n = {q}^{n} do not fit in 64 bits")
        powers = q ** np.arange(n - 1, -1, -1, dtype=np.int64)
        return self.states @ powers

    def index_of(self, configuration: Sequence[int]) -> int:
        """Position of *configuration* in the state list; :class:`InfeasibleError` if absent."""
        q = self.system.q
        code = 0
        for c in configuration:
            code = code * q + int(c)
        pos = int(np.searchsorted(self.codes, code))
        if pos == self.size or self.codes[pos] != code:
            raise InfeasibleError(f"configuration {tuple(configuration)} is not a feasible state")
        return pos

    @cached_property
    def one_hot(self) -> np.ndarray:
        """``N x (n q)`` indicator of ``sigma_v = c`` at column ``v q + c``."""
        n, q = self.system.n, self.system.q
        table = np.zeros((self.size, n * q))
        columns = np.arange(n) * q + self.states
        table[np.arange(self.size)[:, None], columns] = 1.0
        return table

    def marginals(self) -> np.ndarray:
        """``n x q`` table of single-site marginals."""
        return (self.probabilities @ self.one_hot).reshape(self.system.n, self.system.q)

    def marginal(self, v: int, spin: int) -> float:
        return float(self.probabilities[self.states[:, v] == spin].sum())

    def mask(self, pinning: Pinning) -> np.ndarray:
        keep = np.ones(self.size, dtype=bool)
        for v, c in pinning.pairs:
            keep &= self.states[:, v] == c
        return keep

    def condition(self, pinning: Pinning) -> "StateSpace":
        """The conditional law given *pinning*, as a new state space."""
        if not pinning.pairs:
            return self
        pinning.validate(self.system)
        keep = self.mask(pinning)
        if not keep.any():
            raise InfeasibleError(f"pinning {pinning.pinned} has no feasible extension")
        log_weights = self.log_weights[keep]
        log_z = float(logsumexp(log_weights))
        merged = Pinning(tuple(sorted(set(self.pinning.pairs) | set(pinning.pairs))))
        return StateSpace(
            system=self.system,
            states=self.states[keep],
            log_weights=log_weights,
            probabilities=_normalize(log_weights, log_z),
            log_z=log_z,
            pinning=merged,
        )


@dataclass(frozen=True, eq=False)
class FunctionTable:
    """A real function on the feasible states of *space*, aligned with its state order."""

    space: StateSpace
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.values.shape != (self.space.size,):
            raise UsageError(
                f"function table has shape {self.values.shape}, expected ({self.space.size},)"
            )

    @classmethod
    def from_callable(cls, space: StateSpace, fn: Callable[[np.ndarray], float]) -> "FunctionTable":
        return cls(space, np.array([fn(row) for row in space.states], dtype=float))

    @classmethod
    def random(cls, space: StateSpace, rng: np.random.Generator) -> "FunctionTable":
        """Non-negative random function."""
        return cls(space, rng.random(space.size))

    @classmethod
    def constant(cls, space: StateSpace, value: float = 1.0) -> "FunctionTable":
        return cls(space, np.full(space.size, float(value)))


def _normalize(log_weights: np.ndarray, log_z: float) -> np.ndarray:
    probabilities = np.exp(log_weights - log_z)
    return probabilities / probabilities.sum()


def _feasible_states(system: SpinSystem, pinning: Pinning, limit: int) -> np.ndarray:
    """Pruned level-by-level extension of partial assignments, in lex order."""
    pinned = pinning.pinned
    A = system.A
    partial = np.zeros((1, 0), dtype=np.int64)
    for v in range(system.n):
        spins = np.array([pinned[v]] if v in pinned else range(system.q), dtype=np.int64)
        rows = np.repeat(partial, len(spins), axis=0)
        column = np.tile(spins, len(partial))
        keep = np.ones(len(rows), dtype=bool)
        for u in system.graph.adjacency[v]:
            if u < v:
                keep &= A[column, rows[:, u]] > 0
        partial = np.column_stack([rows[keep], column[keep]])
        if len(partial) > limit:
            raise CapExceededError(
                f"{len(partial)} partial configurations on {v + 1} vertices exceed cap {limit}"
            )
        if not len(partial):
            break
    return partial


@lru_cache(maxsize=128)
def enumerate_states(
    system: SpinSystem, pinning: Pinning = NO_PINNING, cap: int | None = None
) -> StateSpace:
    """Exact Omega, mu and log Z of *system*, conditioned on *pinning* if given."""
    pinning.validate(system)
    limit = conf.cap(cap)
    states = _feasible_states(system, pinning, limit)
    if len(states) == 0 or states.shape[1] != system.n:
        raise InfeasibleError("no configuration has positive weight")
    log_weights = system.log_h[states].sum(axis=1)
    for u, v in system.graph.edge_list:
        log_weights = log_weights + system.log_A[states[:, u], states[:, v]]
    log_z = float(logsumexp(log_weights))
    logger.debug("enumerated %d feasible states of %s (n=%d)", len(states), system.name, system.n)
    states.setflags(write=False)
    return StateSpace(
        system=system,
        states=states,
        log_weights=log_weights,
        probabilities=_normalize(log_weights, log_z),
        log_z=log_z,
        pinning=pinning,
    )


def marginal(system: SpinSystem, p: Pinning, v: int, spin: int, cap: int | None = None) -> float:
    """``mu(sigma_v = spin | sigma_Lambda = tau)``."""
    if v in p.vertices:
        raise UsageError(f"vertex {v} is pinned")
    if not 0 <= spin < system.q:
        raise UsageError(f"spin {spin} out of range")
    return enumerate_states(system, cap=cap).condition(p).marginal(v, spin)


# --- variance functionals --------------------------------------------------


def _weighted_variance(probs: np.ndarray, values: np.ndarray) -> float:
    total = probs.sum()
    mean = probs @ values / total
    return float(probs @ (values - mean) ** 2 / total)


def expected_block_variance(
    f: FunctionTable, block: Iterable[int], pinning: Pinning = NO_PINNING
) -> float:
    """``mu^tau[Var_U(f)]``: the expected variance of f over U given everything outside U.

    The pinning must fix only vertices outside the block.
    """
    space = f.space
    block = sorted(set(block))
    if pinning.vertices & set(block):
        raise UsageError("pinning overlaps the block")
    keep = space.mask(pinning)
    if not keep.any():
        raise InfeasibleError(f"pinning {pinning.pinned} has no feasible extension")
    probs, values = space.probabilities[keep], f.values[keep]
    outside = [v for v in range(space.n) if v not in set(block)]
    if not outside:
        return _weighted_variance(probs, values)
    _, groups = np.unique(space.states[keep][:, outside], axis=0, return_inverse=True)
    groups = groups.reshape(-1)
    mass = np.bincount(groups, weights=probs)
    first = np.bincount(groups, weights=probs * values)
    second = np.bincount(groups, weights=probs * values**2)
    # sum_g (second_g - first_g^2 / mass_g), normalized by the pinned mass
    within = second - first**2 / mass
    return float(max(within.sum(), 0.0) / probs.sum())


def var_s_tau(f: FunctionTable, S: Iterable[int], p: Pinning) -> float:
    """``Var_S^tau(f)`` for a pinning of exactly ``V \\ S``."""
    S = set(S)
    if p.vertices != frozenset(range(f.space.n)) - S:
        raise UsageError("the pinning must fix exactly the vertices outside S")
    keep = f.space.mask(p)
    if not keep.any():
        raise InfeasibleError(f"pinning {p.pinned} has no feasible extension")
    return _weighted_variance(f.space.probabilities[keep], f.values[keep])


def var_s(f: FunctionTable, S: Iterable[int]) -> float:
    """``Var_S(f) = E_tau[Var_S^tau(f)]`` with ``tau ~ mu_{V \\ S}``."""
    return expected_block_variance(f, S)


def variance(f: FunctionTable) -> float:
    return _weighted_variance(f.space.probabilities, f.values)


def local_variance_sum(f: FunctionTable, U: Iterable[int], pinning: Pinning = NO_PINNING) -> float:
    """``sum_{u in U} mu_U^tau[Var_u^tau(f)]``."""
    return sum(expected_block_variance(f, [u], pinning) for u in U)


def block_variance_sum(f: FunctionTable, blocks: Iterable[Iterable[int]], pinning: Pinning = NO_PINNING) -> float:
    """``sum_{U in blocks} mu^tau[Var_U(f)]``; with blocks = C(S) this bounds ``Var_S^tau(f)``."""
    return sum(expected_block_variance(f, block, pinning) for block in blocks)


def tv_distance(p1: Sequence[float] | np.ndarray, p2: Sequence[float] | np.ndarray) -> float:
    """Total variation distance of two distributions over the same ordered support."""
    a, b = np.asarray(p1, dtype=float), np.asarray(p2, dtype=float)
    if a.shape != b.shape:
        raise UsageError(f"distribution shapes differ: {a.shape} vs {b.shape}")
    return float(min(1.0, max(0.0, 0.5 * np.abs(a - b).sum())))


def variance_decomposition_check(f: FunctionTable, ell: int) -> float:
    """Residual of ``Var(f) - Var_{mu^(n-l)}(f^(n-l)) = mean_{|S|=l} Var_S(f)``.

    The left side is built on the subset encoding of configurations; the
    right side from block variances of the configuration space.
    """
    space = f.space
    n = space.n
    if space.pinning.pairs:
        raise UsageError("the decomposition identity is checked on the unpinned law")
    if not 1 <= ell <= n:
        raise UsageError(f"need 1 <= ell <= n, got {ell}")
    level = level_distribution(space, n - ell)
    projected = level.up(f.values)
    lhs = variance(f) - _weighted_variance(level.masses, projected)
    blocks = list(combinations(range(n), ell))
    rhs = sum(var_s(f, S) for S in blocks) / comb(n, ell, exact=True)
    return abs(lhs - rhs)
