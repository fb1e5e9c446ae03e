"""Exact spectral computations on enumerable instances.

Transition matrices are indexed by the lexicographic state order of
:mod:`spinlab.exact`; every reversible kernel is symmetrized as
``D^(1/2) P D^(-1/2)`` before a dense symmetric eigensolve.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Iterator, Sequence

import numpy as np
from scipy import linalg
from scipy.sparse.csgraph import connected_components
from scipy.special import logsumexp

from spinlab import conf
from spinlab.exact import StateSpace, enumerate_states
from spinlab.exceptions import CapExceededError, ChainInvariantError, InfeasibleError, UsageError
from spinlab.levels import down_operator, level_distribution, up_operator
from spinlab.systems import NO_PINNING, Pinning, SpinSystem

logger = logging.getLogger(__name__)

# gaps at or below this are reported as a reducible chain
REDUCIBLE_GAP = 1e-12
# largest tolerated imaginary part in an influence spectrum
IMAGINARY_TOLERANCE = 1e-8
# local-walk vs influence diagnostic threshold
LOCAL_WALK_TOLERANCE = 1e-8


# --- Glauber kernel and spectra ---------------------------------------------


def _matrix_space(system: SpinSystem, p: Pinning, cap: int | None) -> StateSpace:
    space = enumerate_states(system, cap=cap).condition(p)
    limit = int(conf.get("MATRIX_CAP"))
    if space.size > limit:
        raise CapExceededError(f"{space.size} states exceed the matrix cap {limit}")
    return space


def glauber_matrix(system: SpinSystem, p: Pinning = NO_PINNING, cap: int | None = None) -> np.ndarray:
    """Exact heat-bath Glauber kernel over the feasible states consistent with *p*."""
    space = _matrix_space(system, p, cap)
    free = p.unpinned(system.n)
    N, q, n = space.size, system.q, system.n
    P = np.zeros((N, N))
    if not free:
        return np.eye(N)
    rows = np.arange(N)
    for v in free:
        place = q ** (n - 1 - v)
        targets = np.full((N, q), -1, dtype=np.int64)
        log_w = np.full((N, q), -math.inf)
        for c in range(q):
            codes = space.codes + (c - space.states[:, v]) * place
            pos = np.minimum(np.searchsorted(space.codes, codes), N - 1)
            found = space.codes[pos] == codes
            targets[found, c] = pos[found]
            log_w[found, c] = space.log_weights[pos[found]]
        conditional = np.exp(log_w - logsumexp(log_w, axis=1, keepdims=True))
        for c in range(q):
            hit = targets[:, c] >= 0
            np.add.at(P, (rows[hit], targets[hit, c]), conditional[hit, c] / len(free))
    return P


@dataclass
class SpectrumReport:
    eigenvalues: list[float]
    gap: float
    relaxation_time: float
    state_count: int
    reducible: bool = False
    diagnosis: dict[str, Any] | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "eigenvalues": self.eigenvalues,
            "gap": self.gap,
            "tau_rel": self.relaxation_time,
            "state_count": self.state_count,
            "reducible": self.reducible,
            "diagnosis": self.diagnosis,
        }


def reversibility_residual(P: np.ndarray, mu: np.ndarray) -> float:
    flow = mu[:, None] * P
    return float(np.abs(flow - flow.T).max()) if len(mu) else 0.0


def _symmetrized(P: np.ndarray, mu: np.ndarray) -> np.ndarray:
    root = np.sqrt(mu)
    S = root[:, None] * P / root[None, :]
    return (S + S.T) / 2


def _diagnose(P: np.ndarray) -> dict[str, Any]:
    count, labels = connected_components(P > 0, directed=True, connection="strong")
    sizes = np.bincount(labels).tolist()
    return {"communicating_classes": int(count), "class_sizes": sizes}


def spectral_gap(P: np.ndarray, mu: np.ndarray) -> SpectrumReport:
    """Spectrum and absolute gap of a kernel reversible with respect to *mu*."""
    P, mu = np.asarray(P, dtype=float), np.asarray(mu, dtype=float)
    if P.shape != (len(mu), len(mu)):
        raise UsageError(f"kernel shape {P.shape} does not match {len(mu)} states")
    tolerance = float(conf.get("TOLERANCE"))
    residual = reversibility_residual(P, mu)
    if residual > tolerance:
        raise ChainInvariantError(f"kernel is not reversible (residual {residual:.3g})")
    try:
        eigenvalues = linalg.eigh(_symmetrized(P, mu), eigvals_only=True)[::-1]
    except linalg.LinAlgError as exc:
        raise ChainInvariantError(f"eigensolve did not converge: {exc}") from exc
    logger.debug("eigensolve over %d states", len(mu))
    if len(mu) == 1:
        gap = 1.0
    else:
        gap = 1.0 - max(abs(eigenvalues[1]), abs(eigenvalues[-1]))
        gap = min(max(gap, 0.0), 2.0)
    report = SpectrumReport(
        eigenvalues=[float(x) for x in eigenvalues],
        gap=float(gap),
        relaxation_time=1.0 / gap if gap > 0 else math.inf,
        state_count=len(mu),
    )
    if gap <= REDUCIBLE_GAP:
        report.reducible = True
        report.diagnosis = _diagnose(P)
        logger.warning(
            "chain has no spectral gap: %d communicating classes",
            report.diagnosis["communicating_classes"],
        )
    return report


def glauber_spectrum(system: SpinSystem, p: Pinning = NO_PINNING, cap: int | None = None) -> SpectrumReport:
    space = _matrix_space(system, p, cap)
    return spectral_gap(glauber_matrix(system, p, cap), space.probabilities)


# --- influence matrices and spectral independence ----------------------------


@dataclass
class InfluenceMatrix:
    index: list[tuple[int, int]]
    entries: np.ndarray
    pinning: Pinning = NO_PINNING

    def lambda_max(self) -> float:
        return largest_real_eigenvalue(self.entries)

    def to_dict(self) -> dict[str, Any]:
        return {
            "index": [list(pair) for pair in self.index],
            "entries": self.entries.tolist(),
            "pinning": [list(pair) for pair in self.pinning.pairs],
            "lambda_max": self.lambda_max(),
        }


def _top_eigenvalue(matrix: np.ndarray) -> tuple[float, float]:
    """Largest real part and largest |imaginary part| of the spectrum of *matrix*."""
    if not matrix.size:
        return 0.0, 0.0
    eigenvalues = linalg.eigvals(matrix)
    imaginary = float(np.abs(eigenvalues.imag).max())
    if imaginary > IMAGINARY_TOLERANCE:
        raise ChainInvariantError(f"influence spectrum has imaginary part {imaginary:.3g}")
    return float(eigenvalues.real.max()), imaginary


def largest_real_eigenvalue(matrix: np.ndarray) -> float:
    """Largest eigenvalue of a matrix whose spectrum is real up to rounding."""
    return _top_eigenvalue(matrix)[0]


def _joint(space: StateSpace, keep: np.ndarray, free: Sequence[int]):
    """Index, marginals and pair joint of the conditional law on the rows in *keep*."""
    q = space.system.q
    probs = space.probabilities[keep]
    probs = probs / probs.sum()
    columns = np.array([v * q + c for v in free for c in range(q)], dtype=np.int64)
    X = space.one_hot[keep][:, columns]
    marg = probs @ X
    present = marg > 0
    X, marg = X[:, present], marg[present]
    index = [(int(c // q), int(c % q)) for c in columns[present]]
    joint = X.T @ (probs[:, None] * X)
    return index, marg, joint


def _same_vertex(index: list[tuple[int, int]]) -> np.ndarray:
    vertices = np.array([v for v, _ in index])
    return vertices[:, None] == vertices[None, :]


def _influence(space: StateSpace, keep: np.ndarray, free: Sequence[int]) -> tuple[list, np.ndarray]:
    index, marg, joint = _joint(space, keep, free)
    entries = joint / marg[:, None] - marg[None, :]
    entries[_same_vertex(index)] = 0.0
    return index, entries


def _check_pinning_size(system: SpinSystem, p: Pinning) -> None:
    if len(p) > system.n - 2:
        raise UsageError(f"need |Lambda| <= n - 2 = {system.n - 2}, got {len(p)}")


def _pinned_rows(space: StateSpace, p: Pinning) -> np.ndarray:
    p.validate(space.system)
    keep = space.mask(p)
    if not keep.any():
        raise InfeasibleError(f"pinning {p.pinned} has no feasible extension")
    return keep


def influence_matrix(system: SpinSystem, p: Pinning = NO_PINNING, cap: int | None = None) -> InfluenceMatrix:
    """``Psi(u,i; v,j) = mu(v=j | u=i, tau) - mu(v=j | tau)`` over the unpinned pairs with positive marginal."""
    _check_pinning_size(system, p)
    space = enumerate_states(system, cap=cap)
    index, entries = _influence(space, _pinned_rows(space, p), p.unpinned(system.n))
    return InfluenceMatrix(index=index, entries=entries, pinning=p)


def _local_walk(space: StateSpace, keep: np.ndarray, free: Sequence[int]) -> float:
    index, marg, joint = _joint(space, keep, free)
    m = len(free)
    P = joint / marg[:, None] / (m - 1)
    P[_same_vertex(index)] = 0.0
    pi = marg / m
    eigenvalues = linalg.eigh(_symmetrized(P, pi), eigvals_only=True)
    return float(eigenvalues[-2]) if len(eigenvalues) > 1 else 0.0


def local_walk_second_eigenvalue(system: SpinSystem, p: Pinning = NO_PINNING, cap: int | None = None) -> float:
    """Second eigenvalue of the non-lazy walk on unpinned ``(vertex, spin)`` pairs.

    From ``(u, i)`` the walk moves to ``(v, j)`` with probability
    ``mu(v=j | u=i, tau) / (m - 1)`` for each of the other ``m - 1``
    unpinned vertices ``v``.
    """
    _check_pinning_size(system, p)
    space = enumerate_states(system, cap=cap)
    return _local_walk(space, _pinned_rows(space, p), p.unpinned(system.n))


def _pinnings(
    space: StateSpace, sizes: range, exhaustive: bool, samples: int, rng: np.random.Generator
) -> Iterator[tuple[int, Pinning]]:
    """Feasible pinnings: all of them, or pinnings projected from Gibbs samples."""
    n = space.n
    if exhaustive:
        for k in sizes:
            for block in combinations(range(n), k):
                if not block:
                    yield 0, NO_PINNING
                    continue
                for row in np.unique(space.states[:, block], axis=0):
                    yield k, Pinning(tuple(zip(block, map(int, row))))
        return
    seen: set[Pinning] = set()
    for _ in range(samples):
        k = int(rng.choice(sizes))
        block = tuple(sorted(rng.choice(n, size=k, replace=False).tolist()))
        row = space.states[rng.choice(space.size, p=space.probabilities)]
        pinning = Pinning(tuple((v, int(row[v])) for v in block))
        if pinning not in seen:
            seen.add(pinning)
            yield k, pinning


@dataclass
class SIProfile:
    etas: list[float]
    witnesses: list[Pinning | None]
    fitted_C: float
    fitted_eta: float
    mode: str = "exhaustive"
    coverage: list[int] = field(default_factory=list)
    max_imaginary: float = 0.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "eta_k": self.etas,
            "witnesses": [None if w is None else [list(p) for p in w.pairs] for w in self.witnesses],
            "C": self.fitted_C,
            "eta": self.fitted_eta,
            "mode": self.mode,
            "coverage": self.coverage,
            "max_imaginary": self.max_imaginary,
        }

    def table(self) -> list[dict[str, Any]]:
        return [
            {"k": k, "eta_k": eta, "pinnings": self.coverage[k] if self.coverage else None}
            for k, eta in enumerate(self.etas)
        ]


def _use_exhaustive(n: int, mode: str | None) -> bool:
    if mode not in (None, "exhaustive", "sampled"):
        raise UsageError(f"unknown SI mode {mode!r}")
    if mode is None:
        return n <= int(conf.get("SI_EXHAUSTIVE_MAX_VERTICES"))
    return mode == "exhaustive"


def fit_constants(etas: Sequence[float], n: int) -> tuple[float, float]:
    """``C = max eta_k`` and ``eta = max eta_k / (n - k - 1)``, both clamped at 0.

    Sizes with no examined pinning (``nan``) are skipped.
    """
    known = [(k, e) for k, e in enumerate(etas) if not math.isnan(e)]
    c = max([0.0] + [e for _, e in known])
    eta = max([0.0] + [e / (n - k - 1) for k, e in known])
    return c, eta


def si_profile(
    system: SpinSystem,
    mode: str | None = None,
    samples: int | None = None,
    seed: int = 0,
    cap: int | None = None,
) -> SIProfile:
    """``eta_k`` = max of ``lambda_max(Psi^tau)`` over feasible pinnings of size k."""
    n = system.n
    space = enumerate_states(system, cap=cap)
    exhaustive = _use_exhaustive(n, mode)
    samples = int(conf.get("SI_SAMPLED_PINNINGS")) if samples is None else samples
    if not exhaustive:
        logger.warning("sampled SI mode over %d pinnings: eta_k are lower estimates", samples)
    etas = [-math.inf] * max(n - 1, 0)
    witnesses: list[Pinning | None] = [None] * max(n - 1, 0)
    coverage = [0] * max(n - 1, 0)
    max_imaginary = 0.0
    rng = np.random.default_rng(seed)
    for k, pinning in _pinnings(space, range(max(n - 1, 0)), exhaustive, samples, rng):
        _, entries = _influence(space, space.mask(pinning), pinning.unpinned(n))
        value, imaginary = _top_eigenvalue(entries)
        max_imaginary = max(max_imaginary, imaginary)
        coverage[k] += 1
        if value > etas[k]:
            etas[k], witnesses[k] = value, pinning
    logger.debug("SI sweep examined %d pinnings", sum(coverage))
    etas = [e if e > -math.inf else math.nan for e in etas]
    fitted_c, fitted_eta = fit_constants(etas, n)
    return SIProfile(
        etas=etas,
        witnesses=witnesses,
        fitted_C=fitted_c,
        fitted_eta=fitted_eta,
        mode="exhaustive" if exhaustive else "sampled",
        coverage=coverage,
        max_imaginary=max_imaginary,
    )


@dataclass
class LocalSpectralProfile:
    zetas: list[float]
    scaled_etas: list[float]
    max_deviation: float
    flagged: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "zeta_k": self.zetas,
            "eta_k_scaled": self.scaled_etas,
            "max_deviation": self.max_deviation,
            "flagged": self.flagged,
        }


def local_spectral_profile(
    system: SpinSystem, mode: str | None = None, samples: int | None = None, seed: int = 0, cap: int | None = None
) -> LocalSpectralProfile:
    """Per size k, the largest local-walk eigenvalue and ``lambda_max(Psi^tau) / (n - k - 1)``.

    The two are compared pinning by pinning; differences above
    :data:`LOCAL_WALK_TOLERANCE` are counted and logged.
    """
    n = system.n
    space = enumerate_states(system, cap=cap)
    exhaustive = _use_exhaustive(n, mode)
    samples = int(conf.get("SI_SAMPLED_PINNINGS")) if samples is None else samples
    zetas = [-math.inf] * max(n - 1, 0)
    scaled = [-math.inf] * max(n - 1, 0)
    max_deviation, flagged = 0.0, 0
    rng = np.random.default_rng(seed)
    for k, pinning in _pinnings(space, range(max(n - 1, 0)), exhaustive, samples, rng):
        keep, free = space.mask(pinning), pinning.unpinned(n)
        zeta = _local_walk(space, keep, free)
        ratio = largest_real_eigenvalue(_influence(space, keep, free)[1]) / (n - k - 1)
        zetas[k], scaled[k] = max(zetas[k], zeta), max(scaled[k], ratio)
        deviation = abs(zeta - ratio)
        max_deviation = max(max_deviation, deviation)
        if deviation > LOCAL_WALK_TOLERANCE:
            flagged += 1
    if flagged:
        logger.warning(
            "local walk and scaled influence eigenvalues differ at %d pinnings (max %.3g)",
            flagged,
            max_deviation,
        )
    return LocalSpectralProfile(
        zetas=[z if z > -math.inf else math.nan for z in zetas],
        scaled_etas=[s if s > -math.inf else math.nan for s in scaled],
        max_deviation=max_deviation,
        flagged=flagged,
    )


# --- down-up walks ----------------------------------------------------------


@dataclass
class DownUpKernel:
    s_level: int
    r_level: int
    kernel: np.ndarray
    masses: np.ndarray
    spectrum: SpectrumReport


def _level_space(system: SpinSystem, cap: int | None) -> StateSpace:
    limit = int(conf.get("LEVEL_MAX_VERTICES"))
    if system.n > limit:
        raise CapExceededError(f"level encodings are limited to n <= {limit}, got n = {system.n}")
    return enumerate_states(system, cap=cap)


def down_up_matrix(system: SpinSystem, s_level: int, r_level: int, cap: int | None = None) -> DownUpKernel:
    """Exact ``D_{s,r} U_{r,s}`` kernel on ``mu^(s)`` and its spectrum."""
    if not 0 <= r_level <= s_level <= system.n:
        raise UsageError(f"need 0 <= r <= s <= n, got r={r_level}, s={s_level}")
    space = _level_space(system, cap)
    upper = level_distribution(space, s_level, cap)
    lower = level_distribution(space, r_level, cap)
    kernel = down_operator(lower, upper) @ up_operator(lower, upper)
    return DownUpKernel(
        s_level=s_level,
        r_level=r_level,
        kernel=kernel,
        masses=upper.masses,
        spectrum=spectral_gap(kernel, upper.masses),
    )


def variance_contraction_check(
    system: SpinSystem, s_level: int, r_level: int, f: np.ndarray, cap: int | None = None
) -> float:
    """``Var_{mu^(r)}(f^(r)) / Var_{mu^(s)}(f^(s))`` for *f* on the configuration space."""
    if not 0 <= r_level <= s_level <= system.n:
        raise UsageError(f"need 0 <= r <= s <= n, got r={r_level}, s={s_level}")
    space = _level_space(system, cap)
    f = np.asarray(f, dtype=float)
    if f.shape != (space.size,):
        raise UsageError(f"function table has shape {f.shape}, expected ({space.size},)")
    upper = level_distribution(space, s_level, cap)
    lower = level_distribution(space, r_level, cap)
    f_upper = upper.up(f)
    f_lower = up_operator(lower, upper) @ f_upper

    def var(masses: np.ndarray, values: np.ndarray) -> float:
        mean = masses @ values
        return float(masses @ (values - mean) ** 2)

    denominator = var(upper.masses, f_upper)
    return var(lower.masses, f_lower) / denominator if denominator > 0 else 0.0


# --- approximate tensorization ------------------------------------------------


def _site_variance_form(space: StateSpace) -> np.ndarray:
    """``B`` with ``f^T B f = sum_v mu[Var_v(f)]``."""
    N = space.size
    B = np.zeros((N, N))
    mu = space.probabilities
    for v in range(space.n):
        others = [u for u in range(space.n) if u != v]
        if others:
            _, groups = np.unique(space.states[:, others], axis=0, return_inverse=True)
            groups = groups.reshape(-1)
        else:
            groups = np.zeros(N, dtype=np.int64)
        mass = np.bincount(groups, weights=mu)
        B += np.diag(mu)
        same = groups[:, None] == groups[None, :]
        B -= same * np.outer(mu, mu) / mass[groups][:, None]
    return B


def tensorization_ratio_search(
    space: StateSpace, trials: int = 1000, iterations: int = 300, seed: int = 0
) -> float:
    """Largest ``Var(f) / sum_v mu[Var_v(f)]`` found by generalized power iteration from random f."""
    mu = space.probabilities
    A = np.diag(mu) - np.outer(mu, mu)
    B = _site_variance_form(space)
    B_inv = linalg.pinvh(B)
    F = np.random.default_rng(seed).standard_normal((space.size, trials))
    for _ in range(iterations):
        F = B_inv @ (A @ F)
        norms = np.linalg.norm(F, axis=0)
        norms[norms == 0] = 1.0
        F /= norms
    numerator = np.einsum("ij,ij->j", F, A @ F)
    denominator = np.einsum("ij,ij->j", F, B @ F)
    valid = denominator > 1e-14
    return float((numerator[valid] / denominator[valid]).max()) if valid.any() else 0.0


@dataclass
class TensorizationReport:
    constant: float
    gap: float
    searched: float | None
    diagnosis: dict[str, Any] | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "C_1": self.constant,
            "gap": self.gap,
            "rayleigh_max": self.searched,
            "diagnosis": self.diagnosis,
        }


def tensorization_constant(
    system: SpinSystem, trials: int = 1000, seed: int = 0, cap: int | None = None, search: bool = True
) -> TensorizationReport:
    """Smallest approximate-tensorization constant ``1 / (n gap)``; infinite for a reducible chain."""
    space = _matrix_space(system, NO_PINNING, cap)
    report = spectral_gap(glauber_matrix(system, cap=cap), space.probabilities)
    if report.reducible:
        return TensorizationReport(math.inf, report.gap, None, report.diagnosis)
    searched = tensorization_ratio_search(space, trials, seed=seed) if search else None
    return TensorizationReport(1.0 / (system.n * report.gap), report.gap, searched)


# --- total-variation decay -----------------------------------------------------


@dataclass
class TVDecay:
    tv: list[float]
    start: int | None

    def table(self) -> list[dict[str, Any]]:
        return [{"step": t, "tv": value} for t, value in enumerate(self.tv)]

    def to_dict(self) -> dict[str, Any]:
        return {"start": self.start, "tv": self.tv}


def _tv_rows(rows: np.ndarray, mu: np.ndarray) -> np.ndarray:
    return np.clip(0.5 * np.abs(rows - mu[None, :]).sum(axis=1), 0.0, 1.0)


def tv_decay(P: np.ndarray, mu: np.ndarray, steps: int, start: int | None = None) -> TVDecay:
    """``TV(P^t(x, .), mu)`` for t = 0..steps, from *start* or worst over all x."""
    if steps < 0:
        raise UsageError("steps must be non-negative")
    N = len(mu)
    if start is not None and not 0 <= start < N:
        raise UsageError(f"start index {start} out of range")
    current = np.eye(N) if start is None else np.eye(N)[[start]]
    values = [float(_tv_rows(current, mu).max())]
    for _ in range(steps):
        current = current @ P
        values.append(float(_tv_rows(current, mu).max()))
    return TVDecay(tv=values, start=start)


def mixing_time(
    P: np.ndarray, mu: np.ndarray, eps: float, start: int | None = None, max_steps: int = 100_000
) -> int | None:
    """First t with TV at most *eps*; ``None`` when not reached within *max_steps*."""
    if not 0 < eps < 1:
        raise UsageError(f"need 0 < eps < 1, got {eps}")
    N = len(mu)
    current = np.eye(N) if start is None else np.eye(N)[[start]]
    for t in range(max_steps + 1):
        if _tv_rows(current, mu).max() <= eps:
            return t
        current = current @ P
    logger.warning("TV stayed above %g for %d steps", eps, max_steps)
    return None
