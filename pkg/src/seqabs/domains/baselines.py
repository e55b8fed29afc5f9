"""Reference selectors: first-B, random-B, and the exhaustive best subset.

The exhaustive search doubles as an independent verification oracle for the
trained agent: it enumerates every budget-sized subset and keeps the one the
goal classifier scores highest on the true label.
"""

from __future__ import annotations

import itertools
import math
from typing import Sequence

import numpy as np

from ..episode import AtomicUnit
from ..reward import GoalClassifier, RenderDomain, performance

MAX_ORACLE_SUBSETS = 10**6


def baseline_first(aus: Sequence[AtomicUnit], budget: int) -> list[AtomicUnit]:
    """First `budget` AUs in original input order (clamped to the pool size)."""
    if budget < 1:
        raise ValueError("budget must be at least 1")
    ordered = sorted(aus, key=lambda au: au.original_index)
    return ordered[:budget]


def baseline_random(
    aus: Sequence[AtomicUnit], budget: int, rng: np.random.Generator
) -> list[AtomicUnit]:
    """Uniform budget-sized subset; output order is the draw order."""
    if budget < 1:
        raise ValueError("budget must be at least 1")
    k = min(budget, len(aus))
    picked = rng.choice(len(aus), size=k, replace=False)
    return [aus[i] for i in picked]


def oracle_best_subset(
    aus: Sequence[AtomicUnit],
    budget: int,
    classifier: GoalClassifier,
    domain: RenderDomain,
    label: int,
) -> tuple[list[AtomicUnit], float]:
    """Exhaustively maximize the true-label probability over all subsets.

    Guarded to at most MAX_ORACLE_SUBSETS enumerations; ties keep the first
    subset in lexicographic index order.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    n = len(aus)
    k = min(budget, n)
    total = math.comb(n, k)
    if total > MAX_ORACLE_SUBSETS:
        raise ValueError(
            f"oracle guard: C({n}, {k}) = {total} subsets exceeds {MAX_ORACLE_SUBSETS}"
        )
    best_combo: tuple[int, ...] | None = None
    best_perf = -1.0
    for combo in itertools.combinations(range(n), k):
        perf = performance(classifier, domain, [aus[i] for i in combo], label)
        if perf > best_perf:
            best_perf = perf
            best_combo = combo
    assert best_combo is not None
    return [aus[i] for i in best_combo], float(best_perf)
