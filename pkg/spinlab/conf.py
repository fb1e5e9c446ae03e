"""Access to the toolkit tunables.

Values come from the ``SPINLAB`` dict in the Django settings when a
settings module is configured, and from :data:`DEFAULTS` otherwise, so the
library modules can be imported and used without a Django project.
"""
from __future__ import annotations

from typing import Any

from django.conf import settings

DEFAULTS: dict[str, Any] = {
    # exact enumeration and pinning feasibility
    "ENUMERATION_CAP": 2**22,
    # glauber_matrix / spectral_gap state count
    "MATRIX_CAP": 20_000,
    "SI_EXHAUSTIVE_MAX_VERTICES": 10,
    "SI_SAMPLED_PINNINGS": 2000,
    # down_up_matrix and the subset encoding
    "LEVEL_MAX_VERTICES": 6,
    "REGULAR_MAX_ATTEMPTS": 1000,
    "ANNEAL_MAX_RELATIVE_SE": 0.1,
    "CHECK_FEASIBILITY": False,
    "TOLERANCE": 1e-10,
}


def get(name: str) -> Any:
    """Return the configured value of tunable *name*."""
    if name not in DEFAULTS:
        raise KeyError(f"unknown spinlab setting {name!r}")
    if settings.configured:
        overrides = getattr(settings, "SPINLAB", {}) or {}
        if name in overrides:
            return overrides[name]
    return DEFAULTS[name]


def cap(override: int | None = None) -> int:
    """Enumeration cap, honouring a per-call override."""
    return int(override) if override is not None else int(get("ENUMERATION_CAP"))
