"""Closed-form spectral-gap, block-factorization and mixing-time bounds.

Every function here is pure. Unknown universal constants are set to 1 and
reported as nominal; asymptotic constants hidden in O(.) are reported as
:data:`NOT_EVALUABLE` instead of being invented. Logarithms are natural and
``0**0 == 1`` and empty products equal 1 throughout.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any, Mapping, Sequence

from spinlab.exceptions import UsageError

NOT_EVALUABLE = "not evaluable"
NOMINAL_CONSTANT = 1.0
CEIL_GUARD = 1e-12


def ceil_guarded(x: float) -> int:
    """``ceil`` that ignores floating noise just above an integer."""
    return math.ceil(x - CEIL_GUARD)


def _check_eta(eta: float) -> None:
    if not 0 <= eta < 1:
        raise UsageError(f"eta must lie in [0, 1), got {eta}")


def _check_c(c: float) -> None:
    if c < 0:
        raise UsageError(f"C must be non-negative, got {c}")


# --- spectral-independence gap bounds -------------------------------------


def alo_gap_bound(etas: Sequence[float]) -> float:
    """Product-form lower bound on the n <-> n-1 down-up (Glauber) gap.

    ``etas`` holds eta_0..eta_{n-2}; ``n = len(etas) + 1``.
    """
    n = len(etas) + 1
    value = 1.0 / n
    for i, eta in enumerate(etas):
        room = n - i - 1
        if math.isnan(eta):
            raise UsageError(f"eta_{i} is unknown (nan); the bound needs every level")
        if eta > room + 1e-9:
            raise UsageError(f"eta_{i}={eta} exceeds n-i-1={room}")
        value *= max(0.0, 1.0 - eta / room)
    return value


def alo_gap_bound_ch(n: int, c: float, eta: float) -> float:
    """(C, eta) form: ``(1-eta)^(2+2C) / n^(2C) / n``."""
    if n < 1:
        raise UsageError("n must be positive")
    _check_c(c)
    _check_eta(eta)
    return (1 - eta) ** (2 + 2 * c) / n ** (2 * c) / n


@dataclass(frozen=True)
class MainGapBound:
    value: float
    precondition_met: bool
    ceil_2c: int
    constant: float = NOMINAL_CONSTANT

    def to_dict(self) -> dict[str, Any]:
        return asdict(self) | {"constant_status": "nominal"}


def main_gap_bound(n: int, delta: int, c: float, eta: float) -> MainGapBound:
    """Nominal degree-dependent gap bound with its ``50*ceil(2C)*Delta <= n`` flag."""
    if n < 1 or delta < 0:
        raise UsageError("need n >= 1 and Delta >= 0")
    _check_c(c)
    _check_eta(eta)
    m = ceil_guarded(2 * c)
    # an edgeless graph has no degree factor
    base = 25 * delta * m if delta else 1
    value = NOMINAL_CONSTANT * (1 - eta) ** (1 + 2 * c) / base ** (5 * m) / n
    return MainGapBound(value=value, precondition_met=50 * m * delta <= n, ceil_2c=m)


def alo_mixing_estimate(n: int, c: float, eta: float, q: int) -> float:
    """Order of the mixing time implied by the ALO gap, constants taken as 1."""
    _check_c(c)
    _check_eta(eta)
    return n ** (2 + 2 * c) * (1 - eta) ** (-2 - 2 * c) * math.log(q)


# --- local expansion and global contraction -------------------------------


def local_expansion_profile(n: int, c: float, eta: float) -> tuple[list[float], list[float]]:
    """``zeta_i = min(eta, C/(n-i-1))`` and ``alpha_i = (1-zeta_i)/(1+zeta_i)`` for i < n-1."""
    _check_c(c)
    _check_eta(eta)
    zetas = [min(eta, c / (n - i - 1)) for i in range(n - 1)]
    return zetas, [(1 - z) / (1 + z) for z in zetas]


def _alphas_exact(n: int, count: int, c: float, eta: float) -> list[Fraction]:
    c_exact, eta_exact = Fraction(c), Fraction(eta)
    alphas = []
    for i in range(count):
        zeta = min(eta_exact, c_exact / (n - i - 1))
        alphas.append((1 - zeta) / (1 + zeta))
    return alphas


def kappa_rs(n: int, r: int, s: int, c: float, eta: float) -> float:
    """Global variance contraction rate of the s <-> r down-up walk.

    ``sum_{k=r}^{s-1} a_0..a_{k-1} / sum_{k=0}^{s-1} a_0..a_{k-1}``, evaluated
    in exact rationals.
    """
    if not (0 <= r <= s <= n and s >= 1):
        raise UsageError(f"need 0 <= r <= s <= n and s >= 1, got r={r}, s={s}, n={n}")
    _check_c(c)
    _check_eta(eta)
    alphas = _alphas_exact(n, max(s - 1, 0), c, eta)
    prefix = [Fraction(1)]
    for alpha in alphas:
        prefix.append(prefix[-1] * alpha)
    numerator = sum(prefix[r:s], Fraction(0))
    denominator = sum(prefix[:s], Fraction(0))
    return float(numerator / denominator)


def block_factorization_constant(n: int, ell: int, c: float, eta: float) -> float:
    """Exact-form block factorization constant ``(ell/n) / kappa_{n-ell, n}``."""
    if not 1 <= ell <= n:
        raise UsageError(f"need 1 <= ell <= n, got ell={ell}, n={n}")
    return (ell / n) / kappa_rs(n, n - ell, n, c, eta)


def bf_simple_bound(theta: float, c: float) -> float:
    """``(2/theta)^(ceil(2C)+1)``."""
    if not 0 < theta <= 1:
        raise UsageError(f"theta must lie in (0, 1], got {theta}")
    _check_c(c)
    return (2 / theta) ** (ceil_guarded(2 * c) + 1)


def block_factorization_report(n: int, theta: float, c: float, eta: float) -> dict[str, Any]:
    """Both block-factorization constants for ``ell = ceil(theta n)``.

    The simple bound is only claimed when ``theta n >= 4 ceil(2C)``.
    """
    ell = ceil_guarded(theta * n)
    exact = block_factorization_constant(n, ell, c, eta)
    precondition = theta * n >= 4 * ceil_guarded(2 * c) - CEIL_GUARD
    report: dict[str, Any] = {
        "ell": ell,
        "C_ell": exact,
        "simple_precondition_met": precondition,
        "C_ell_simple": bf_simple_bound(theta, c) if precondition else None,
    }
    return report


def at_chain_bound(c_ell: float, c: float, eta: float, delta: int, theta: float, ell: int) -> float:
    """Constant-free intermediate tensorization bound.

    ``C_ell / (1-eta)^(1+2C) * sum_{k=1}^{ell} k^(2C) (2 e Delta theta)^(k-1)``,
    valid for ``theta <= 1/(4 e Delta)``.
    """
    if delta < 1:
        raise UsageError("Delta must be at least 1")
    if theta <= 0 or theta > 1 / (4 * math.e * delta) * (1 + 1e-12):
        raise UsageError(f"theta={theta} exceeds 1/(4 e Delta)={1 / (4 * math.e * delta)}")
    if ell < 1:
        raise UsageError("ell must be at least 1")
    _check_c(c)
    _check_eta(eta)
    ratio = 2 * math.e * delta * theta
    series = sum(k ** (2 * c) * ratio ** (k - 1) for k in range(1, ell + 1))
    return c_ell / (1 - eta) ** (1 + 2 * c) * series


def component_tail_bound(n: int, delta: int, theta: float, k: int) -> float:
    """``P[|S_v| = k] <= (ell/n) (2 e Delta theta)^(k-1)`` with ``ell = ceil(theta n)``."""
    if k < 1:
        raise UsageError("component size k must be at least 1")
    if n < 1 or not 0 < theta <= 1:
        raise UsageError("need n >= 1 and theta in (0, 1]")
    ell = ceil_guarded(theta * n)
    return ell / n * (2 * math.e * delta * theta) ** (k - 1)


# --- model constants -------------------------------------------------------


def lambda_critical(delta: int) -> float:
    """Tree-uniqueness threshold ``(D-1)^(D-1) / (D-2)^D``."""
    if delta < 3:
        raise UsageError(f"lambda_c is defined for Delta >= 3, got {delta}")
    return float(Fraction(delta - 1) ** (delta - 1) / Fraction(delta - 2) ** delta)


@lru_cache(maxsize=1)
def alpha_star() -> float:
    """Root of ``x = exp(1/x)`` on [1.5, 2] by bisection."""
    lo, hi = 1.5, 2.0
    while hi - lo > 1e-13:
        mid = (lo + hi) / 2
        if mid - math.exp(1 / mid) < 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def hardcore_si_constants(lam: float, delta: int | None = None) -> dict[str, Any]:
    result: dict[str, Any] = {"eta": lam / (1 + lam), "C": NOT_EVALUABLE}
    if delta is not None and delta >= 3:
        result["lambda_c"] = lambda_critical(delta)
    return result


def matching_si_constants(delta: int, lam: float = 1.0) -> dict[str, Any]:
    return {"C": 2 * math.sqrt(1 + delta), "eta": lam / (1 + lam)}


def coloring_si_constants() -> dict[str, Any]:
    return {"C": NOT_EVALUABLE, "eta": NOT_EVALUABLE, "C_order": "O(delta^-2)"}


# --- mixing-time relations -------------------------------------------------


@dataclass(frozen=True)
class MixingRelations:
    warm_bound: float | None
    worst_bound: float | None
    lower_bound: float

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def mixing_relations(
    tau_rel: float,
    eps: float,
    min_mu: float | None = None,
    warm_ratio: float | None = None,
) -> MixingRelations:
    """Relaxation-time bounds on the eps-mixing time.

    ``warm = tau_rel log(warm_ratio/eps)``, ``worst = tau_rel log(1/(eps min_mu))``,
    ``lower = (tau_rel - 1) log(1/(2 eps))``.
    """
    if tau_rel < 1:
        raise UsageError(f"tau_rel must be at least 1, got {tau_rel}")
    if not 0 < eps < 1:
        raise UsageError(f"eps must lie in (0, 1), got {eps}")
    warm = worst = None
    if warm_ratio is not None:
        if warm_ratio < 1:
            raise UsageError("warm_ratio must be at least 1")
        warm = tau_rel * math.log(warm_ratio / eps)
    if min_mu is not None:
        if not 0 < min_mu <= 1:
            raise UsageError("min_mu must lie in (0, 1]")
        worst = tau_rel * math.log(1 / (eps * min_mu))
    return MixingRelations(
        warm_bound=warm,
        worst_bound=worst,
        lower_bound=(tau_rel - 1) * math.log(1 / (2 * eps)),
    )


# --- regime checks ---------------------------------------------------------


def _require(params: Mapping[str, Any], *keys: str) -> None:
    missing = [key for key in keys if params.get(key) is None]
    if missing:
        raise UsageError(f"regime check needs {', '.join(missing)}")


def regime_checks(kind: str, params: Mapping[str, Any]) -> dict[str, Any]:
    """Evaluate the application thresholds for *kind* on concrete parameters."""
    if kind == "coloring":
        _require(params, "delta", "delta_slack", "k")
        delta, slack, k = int(params["delta"]), float(params["delta_slack"]), int(params["k"])
        ratio_threshold = (1 + slack) * alpha_star() * delta
        report: dict[str, Any] = {
            "kind": kind,
            "alpha_star": alpha_star(),
            "k_threshold": ratio_threshold,
            "k_above_threshold": k >= ratio_threshold,
            "k_above_2delta": k > 2 * delta,
            "si": coloring_si_constants(),
        }
        if params.get("n") is not None:
            n = int(params["n"])
            hv_threshold = 288 * math.log(96 * n**3 / slack) / slack**2
            report["hv_threshold"] = hv_threshold
            report["hv_condition"] = k >= max(ratio_threshold, hv_threshold)
        return report
    if kind == "hardcore":
        _require(params, "delta", "delta_slack", "lambda")
        delta, slack, lam = int(params["delta"]), float(params["delta_slack"]), float(params["lambda"])
        if delta < 3:
            return {
                "kind": kind,
                "lambda_c": NOT_EVALUABLE,
                "below_threshold": None,
                "si": hardcore_si_constants(lam),
            }
        lam_c = lambda_critical(delta)
        return {
            "kind": kind,
            "lambda_c": lam_c,
            "lambda_threshold": (1 - slack) * lam_c,
            "below_threshold": lam <= (1 - slack) * lam_c,
            "si": hardcore_si_constants(lam, delta),
        }
    if kind == "matching":
        _require(params, "delta")
        delta = int(params["delta"])
        lam = float(params.get("lambda") or 1.0)
        return {
            "kind": kind,
            "delta_at_least_2": delta >= 2,
            "si": matching_si_constants(delta, lam),
        }
    raise UsageError(f"unknown regime kind {kind!r}; choose coloring, hardcore or matching")
