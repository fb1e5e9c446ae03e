"""Partition-function estimation for the hardcore model.

Two estimators are provided. The telescoping reduction removes vertices one
at a time and uses the per-step identity
``Z(G_{i-1}) = lam * Z(G_i) / mu_{G_{i-1}}(v_i occupied)`` with
``G_i = G_{i-1} \\ N[v_i]``, so that

    log Z(G) = sum_i (log lam - log mu_{G_{i-1}}(v_i)) + log Z(G_m).

The product of marginals alone (without the ``lam`` factors, and not
inverted) does not reproduce Z; the identity above is the one applied.

Annealing multiplies Monte Carlo estimates of ``Z(lam_{i+1}) / Z(lam_i)``
along a fixed geometric schedule starting from a fugacity small enough
that ``Z ~ 1 + n lam_0``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from spinlab import conf
from spinlab.exact import enumerate_states, marginal
from spinlab.exceptions import InfeasibleError, UsageError
from spinlab.glauber import InitialState, estimate_marginal, jackknife_standard_error, run_chain
from spinlab.graphs import BipartitePartition, Graph
from spinlab.systems import NO_PINNING, OCCUPIED, SpinSystem, hardcore_system

logger = logging.getLogger(__name__)

MARGINAL_MODES = ("exact", "mcmc")


@dataclass
class McmcParams:
    steps: int = 100_000
    burnin: int = 1_000
    chains: int = 8
    seed: int = 0


@dataclass
class TelescopeTrace:
    order: list[int]
    used: list[int] = field(default_factory=list)
    skipped: list[int] = field(default_factory=list)
    # vertex sets of G_0 .. G_m, original ids
    graphs: list[list[int]] = field(default_factory=list)
    marginals: list[float] = field(default_factory=list)
    standard_errors: list[float] = field(default_factory=list)
    log_deltas: list[float] = field(default_factory=list)
    log_z_final: float = 0.0
    log_z: float = 0.0
    log_z_se: float | None = None
    mode: str = "exact"
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "order": self.order,
            "used": self.used,
            "skipped": self.skipped,
            "graphs": self.graphs,
            "marginals": self.marginals,
            "standard_errors": self.standard_errors,
            "log_deltas": self.log_deltas,
            "logZ_final": self.log_z_final,
            "logZ": self.log_z,
            "logZ_se": self.log_z_se,
            "marginal_mode": self.mode,
            "notes": self.notes,
        }

    def table(self) -> list[dict[str, Any]]:
        return [
            {"step": i + 1, "vertex": v, "marginal": mu, "log_delta": delta}
            for i, (v, mu, delta) in enumerate(zip(self.used, self.marginals, self.log_deltas))
        ]


def _hardcore_log_z(g: Graph, lam: float, cap: int | None) -> float:
    if g.m == 0:
        return g.n * math.log1p(lam)
    return enumerate_states(hardcore_system(g, lam), cap=cap).log_z


def telescoping_partition(
    g: Graph,
    lam: float,
    order: Sequence[int],
    marginal_mode: str = "exact",
    mcmc: McmcParams | None = None,
    cap: int | None = None,
) -> TelescopeTrace:
    """Estimate ``log Z(g, lam)`` by eliminating the vertices of *order* in turn.

    Vertices already removed by an earlier closed neighbourhood are skipped.
    """
    if not lam > 0:
        raise UsageError(f"fugacity must be positive, got {lam}")
    if marginal_mode not in MARGINAL_MODES:
        raise UsageError(f"marginal mode must be one of {', '.join(MARGINAL_MODES)}")
    order = [int(v) for v in order]
    if len(set(order)) != len(order):
        raise UsageError("the elimination order repeats a vertex")
    for v in order:
        if not 0 <= v < g.n:
            raise UsageError(f"vertex {v} out of range")
    mcmc = mcmc or McmcParams()
    trace = TelescopeTrace(order=order, mode=marginal_mode)
    alive = frozenset(range(g.n))
    trace.graphs.append(sorted(alive))
    variance = 0.0
    for v in order:
        if v not in alive:
            trace.skipped.append(v)
            trace.notes.append(f"vertex {v} was removed by an earlier neighbourhood; factor 1")
            logger.warning("telescoping skips vertex %d, already removed", v)
            continue
        sub, kept = g.induced(alive)
        local = kept.index(v)
        system = hardcore_system(sub, lam)
        if marginal_mode == "exact":
            mu, se = marginal(system, NO_PINNING, local, OCCUPIED, cap=cap), 0.0
        else:
            estimate = estimate_marginal(
                system,
                NO_PINNING,
                local,
                OCCUPIED,
                steps=mcmc.steps,
                burnin=mcmc.burnin,
                chains=mcmc.chains,
                seed=mcmc.seed,
                stage=len(trace.used),
            )
            mu, se = estimate.value, estimate.standard_error
        if not 0 < mu < 1:
            raise InfeasibleError(f"marginal estimate {mu} at vertex {v} is outside (0, 1)")
        if not math.isnan(se):
            variance += (se / mu) ** 2
        trace.used.append(v)
        trace.marginals.append(mu)
        trace.standard_errors.append(se)
        trace.log_deltas.append(math.log(lam) - math.log(mu))
        alive = g.remove_closed_neighborhood(v, alive)
        trace.graphs.append(sorted(alive))
    final, _ = g.induced(alive)
    trace.log_z_final = _hardcore_log_z(final, lam, cap)
    trace.log_z = math.fsum(trace.log_deltas) + trace.log_z_final
    trace.log_z_se = math.sqrt(variance) if marginal_mode == "mcmc" else 0.0
    return trace


def fptas_reduction(
    g: Graph,
    part: BipartitePartition,
    lam: float,
    marginal_mode: str = "exact",
    mcmc: McmcParams | None = None,
    cap: int | None = None,
) -> TelescopeTrace:
    """Telescope over the left side in increasing order; the residual graph is edgeless."""
    part.validate(g)
    trace = telescoping_partition(g, lam, sorted(part.left), marginal_mode, mcmc, cap)
    residual, _ = g.induced(trace.graphs[-1])
    if residual.m:
        raise UsageError("the residual graph after removing the left side still has edges")
    return trace


# --- annealing ---------------------------------------------------------------


def annealing_schedule(
    n: int, lam_target: float, length: int | None = None, lam0: float | None = None
) -> list[float]:
    """Fugacities ``lam_0 < ... < lam_L = lam_target``, geometric in ``1 + lam``."""
    if not lam_target > 0:
        raise UsageError(f"target fugacity must be positive, got {lam_target}")
    if n < 1:
        raise UsageError("annealing needs at least one vertex")
    lam0 = 1.0 / (100 * n * n) if lam0 is None else lam0
    if not 0 < lam0 <= 1.0 / (2 * n):
        raise UsageError(f"starting fugacity must lie in (0, 1/(2n)] = (0, {1 / (2 * n):.3g}]")
    if lam_target <= lam0:
        return [lam_target]
    if length is None:
        length = max(1, math.ceil(8 * n * math.log1p(lam_target)))
    if length < 1:
        raise UsageError("schedule length must be at least 1")
    growth = np.linspace(math.log1p(lam0), math.log1p(lam_target), length + 1)
    schedule = np.expm1(growth).tolist()
    schedule[-1] = lam_target
    return schedule


@dataclass
class AnnealingEstimate:
    log_z: float
    log_z_se: float
    schedule: list[float]
    ratios: list[float]
    ratio_errors: list[float]
    anchor_log_z: float
    anchor_remainder: float
    flagged: list[int] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "logZ": self.log_z,
            "logZ_se": self.log_z_se,
            "Z": math.exp(self.log_z),
            "schedule": self.schedule,
            "ratios": self.ratios,
            "ratio_standard_errors": self.ratio_errors,
            "anchor_logZ": self.anchor_log_z,
            "anchor_remainder_bound": self.anchor_remainder,
            "flagged_levels": self.flagged,
        }

    def table(self) -> list[dict[str, Any]]:
        return [
            {"level": i, "lambda": lam, "ratio": r, "standard_error": se}
            for i, (lam, r, se) in enumerate(zip(self.schedule, self.ratios, self.ratio_errors))
        ]


def annealing_partition(
    system: SpinSystem,
    lam_target: float,
    schedule_length: int | None = None,
    steps_per_level: int = 2000,
    seed: int = 0,
    chains: int = 8,
    burnin: int | None = None,
    lam0: float | None = None,
) -> AnnealingEstimate:
    """Estimate ``log Z(G, lam_target)`` for the hardcore model on ``system.graph``."""
    if system.name not in ("hardcore", "matching"):
        raise UsageError("annealing is implemented for hardcore-type systems")
    if chains < 1 or steps_per_level < 1:
        raise UsageError("need at least one chain and one step per level")
    g = system.graph
    schedule = annealing_schedule(g.n, lam_target, schedule_length, lam0)
    burnin = steps_per_level // 10 if burnin is None else burnin
    if burnin >= steps_per_level:
        raise UsageError("burnin must be smaller than steps_per_level")
    lam_start = schedule[0]
    anchor = math.log1p(g.n * lam_start)
    remainder = (1 + lam_start) ** g.n - 1 - g.n * lam_start
    threshold = float(conf.get("ANNEAL_MAX_RELATIVE_SE"))
    ratios: list[float] = []
    errors: list[float] = []
    flagged: list[int] = []
    variance = 0.0
    for level, (lam, lam_next) in enumerate(zip(schedule, schedule[1:])):
        level_system = hardcore_system(g, lam)
        step_ratio = lam_next / lam
        per_chain = []
        for chain in range(chains):
            summary = run_chain(
                level_system,
                InitialState.GREEDY_FEASIBLE,
                steps_per_level,
                seed,
                burnin=burnin,
                thin=1,
                chain=chain,
                stage=level,
            )
            occupied = np.array([sum(s) for s in summary.samples], dtype=float)
            per_chain.append(float(np.mean(step_ratio**occupied)))
        ratio = float(np.mean(per_chain))
        se = jackknife_standard_error(per_chain)
        ratios.append(ratio)
        errors.append(se)
        if not math.isnan(se):
            relative = se / ratio
            variance += relative**2
            if relative > threshold:
                flagged.append(level)
                logger.warning("annealing level %d has relative standard error %.3g", level, relative)
    return AnnealingEstimate(
        log_z=anchor + math.fsum(math.log(r) for r in ratios),
        log_z_se=math.sqrt(variance) if chains > 1 else math.nan,
        schedule=schedule,
        ratios=ratios,
        ratio_errors=errors,
        anchor_log_z=anchor,
        anchor_remainder=remainder,
        flagged=flagged,
    )


# --- #BIS degree condition -----------------------------------------------------


@dataclass
class BISReport:
    max_left_degree: int
    min_right_degree: int | None
    threshold: int
    passed: bool
    left_degrees: dict[int, int]
    right_degrees: dict[int, int]

    def to_dict(self) -> dict[str, Any]:
        return {
            "Delta_L": self.max_left_degree,
            "delta_R": self.min_right_degree,
            "threshold": self.threshold,
            "pass": self.passed,
            "left_degrees": {str(v): d for v, d in self.left_degrees.items()},
            "right_degrees": {str(v): d for v, d in self.right_degrees.items()},
        }


def bis_condition_check(g: Graph, part: BipartitePartition) -> BISReport:
    """Check ``delta_R >= 2^Delta_L``; an empty right side passes vacuously."""
    part.validate(g)
    left = {v: g.degree(v) for v in sorted(part.left)}
    right = {v: g.degree(v) for v in sorted(part.right)}
    max_left = max(left.values(), default=0)
    min_right = min(right.values()) if right else None
    threshold = 2**max_left
    return BISReport(
        max_left_degree=max_left,
        min_right_degree=min_right,
        threshold=threshold,
        passed=min_right is None or min_right >= threshold,
        left_degrees=left,
        right_degrees=right,
    )
