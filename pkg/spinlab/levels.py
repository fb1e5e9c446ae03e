"""Subset encoding of configurations and the level distributions it induces.

A configuration ``sigma`` is the n-subset ``{(v, sigma_v)}`` of the ground
set ``V x [q]``. The level-s distribution picks a uniform s-subset of that
set: ``mu^(s)({(v, tau_v) : v in Lambda}) = mu_Lambda(tau) / C(n, s)``.
Functions lift to a level by conditional expectation,
``f^(s)(S) = E[f | sigma extends S]``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import TYPE_CHECKING

import numpy as np
from scipy import sparse
from scipy.special import comb

from spinlab import conf
from spinlab.exceptions import CapExceededError, UsageError

if TYPE_CHECKING:
    from spinlab.exact import StateSpace

logger = logging.getLogger(__name__)

Element = tuple[int, int]
Subset = tuple[Element, ...]


@dataclass(frozen=True, eq=False)
class Level:
    """``mu^(s)`` on the s-subsets of ``V x [q]`` with positive mass, in lex order."""

    space: "StateSpace"
    size: int
    subsets: tuple[Subset, ...]
    masses: np.ndarray
    # states x subsets, 1 where the state extends the subset
    membership: sparse.csr_matrix
    _superset_cache: dict[int, dict[Subset, np.ndarray]] = field(
        default_factory=dict, repr=False
    )

    def __len__(self) -> int:
        return len(self.subsets)

    @cached_property
    def index(self) -> dict[Subset, int]:
        return {subset: i for i, subset in enumerate(self.subsets)}

    def index_of(self, subset: Subset) -> int:
        try:
            return self.index[tuple(sorted(subset))]
        except KeyError:
            raise UsageError(f"{subset} is not in the support of level {self.size}") from None

    def up(self, values: np.ndarray) -> np.ndarray:
        """``f^(s)`` for a function table *values* on the configuration space."""
        probs = self.space.probabilities
        weighted = self.membership.T @ (probs * values)
        mass = self.membership.T @ probs
        return np.asarray(weighted / mass)

    def superset_index(self, r: int) -> dict[Subset, np.ndarray]:
        """Map every r-subset of a support element to the support elements containing it."""
        if not 0 <= r <= self.size:
            raise UsageError(f"need 0 <= r <= {self.size}, got {r}")
        if r not in self._superset_cache:
            table: dict[Subset, list[int]] = {}
            for j, subset in enumerate(self.subsets):
                for lower in combinations(subset, r):
                    table.setdefault(lower, []).append(j)
            self._superset_cache[r] = {
                lower: np.array(members, dtype=np.int64) for lower, members in table.items()
            }
        return self._superset_cache[r]


def level_distribution(space: "StateSpace", s: int, cap: int | None = None) -> Level:
    """Build ``mu^(s)`` for an unpinned state space."""
    n = space.n
    if not 0 <= s <= n:
        raise UsageError(f"level must lie in 0..{n}, got {s}")
    limit = conf.cap(cap)
    blocks = comb(n, s, exact=True)
    if space.size * blocks > limit:
        raise CapExceededError(
            f"level {s} needs {space.size} x C({n},{s}) = {space.size * blocks} entries, cap {limit}"
        )
    states, N = space.states, space.size
    subsets: list[Subset] = []
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    for block in combinations(range(n), s):
        if block:
            projected, inverse = np.unique(states[:, block], axis=0, return_inverse=True)
            inverse = inverse.reshape(-1)
        else:
            projected, inverse = np.zeros((1, 0), dtype=np.int64), np.zeros(N, dtype=np.int64)
        offset = len(subsets)
        subsets.extend(tuple(zip(block, map(int, row))) for row in projected)
        rows.append(np.arange(N))
        cols.append(inverse + offset)
    order = sorted(range(len(subsets)), key=subsets.__getitem__)
    position = np.empty(len(order), dtype=np.int64)
    position[order] = np.arange(len(order))
    membership = sparse.csr_matrix(
        (np.ones(N * blocks), (np.concatenate(rows), position[np.concatenate(cols)])),
        shape=(N, len(subsets)),
    )
    masses = np.asarray(membership.T @ space.probabilities) / blocks
    logger.debug("level %d of n=%d has %d support elements", s, n, len(subsets))
    return Level(
        space=space,
        size=s,
        subsets=tuple(subsets[i] for i in order),
        masses=masses,
        membership=membership,
    )


def containment(lower: Level, upper: Level) -> sparse.csr_matrix:
    """``B[R, S] = 1`` when the lower-level element R is contained in S."""
    if lower.space is not upper.space or lower.size > upper.size:
        raise UsageError("containment needs two levels of one space with r <= s")
    rows, cols = [], []
    for j, subset in enumerate(upper.subsets):
        for part in combinations(subset, lower.size):
            rows.append(lower.index[part])
            cols.append(j)
    return sparse.csr_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(len(lower), len(upper))
    )


def down_operator(lower: Level, upper: Level) -> np.ndarray:
    """``D_{s,r}``: from S to a uniform r-subset of S."""
    B = containment(lower, upper)
    return np.asarray(B.T.todense()) / comb(upper.size, lower.size, exact=True)


def up_operator(lower: Level, upper: Level) -> np.ndarray:
    """``U_{r,s}``: from R to a superset S with probability proportional to ``mu^(s)(S)``."""
    B = np.asarray(containment(lower, upper).todense())
    weighted = B * upper.masses[None, :]
    return weighted / weighted.sum(axis=1, keepdims=True)
