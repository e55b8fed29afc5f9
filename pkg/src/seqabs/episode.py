"""Episode mechanics: candidate pool, chosen list, budget, output ordering.

An input sequence is decomposed into atomic units (AUs).  One episode play
moves AUs one at a time from the candidate pool to the chosen list until the
budget is reached or the pool is exhausted.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

ORDER_PICKED = "picked"
ORDER_ORIGINAL = "original"
ORDERING_MODES = (ORDER_PICKED, ORDER_ORIGINAL)

NUM_BUCKETS = 10


@dataclass(frozen=True, eq=False)
class AtomicUnit:
    """One selectable element: feature vector, input position, time bucket."""

    features: np.ndarray
    original_index: int  # 1-based position in the input sequence
    bucket: int          # 1..NUM_BUCKETS


def timestamp_bucket(position: int, total: int) -> int:
    """Quantized relative position: ceil(10 * position / total), clamped to 1..10."""
    if total < 1:
        raise ValueError("total number of AUs must be positive")
    if not 1 <= position <= total:
        raise ValueError(f"position {position} outside 1..{total}")
    bucket = -(-NUM_BUCKETS * position // total)  # integer ceil
    return max(1, min(NUM_BUCKETS, bucket))


def decompose(features: np.ndarray) -> list[AtomicUnit]:
    """Split an (n, d) feature matrix into n atomic units with time buckets."""
    arr = np.asarray(features, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise ValueError("features must be a non-empty (n, d) matrix")
    if not np.all(np.isfinite(arr)):
        raise ValueError("AU features must be finite")
    n = arr.shape[0]
    return [
        AtomicUnit(features=arr[i], original_index=i + 1, bucket=timestamp_bucket(i + 1, n))
        for i in range(n)
    ]


@dataclass(frozen=True)
class EpisodeState:
    """Candidate pool plus chosen list; a value, updated functionally."""

    candidates: tuple[AtomicUnit, ...]
    chosen: tuple[AtomicUnit, ...]
    budget: int
    ordering: str = ORDER_PICKED


def initial_state(
    aus: Sequence[AtomicUnit], budget: int, ordering: str = ORDER_PICKED
) -> EpisodeState:
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if ordering not in ORDERING_MODES:
        raise ValueError(f"unknown ordering mode {ordering!r}")
    indices = [au.original_index for au in aus]
    if len(set(indices)) != len(indices):
        raise ValueError("AUs must have distinct original indices")
    return EpisodeState(candidates=tuple(aus), chosen=(), budget=budget, ordering=ordering)


def is_done(state: EpisodeState) -> bool:
    return len(state.chosen) >= state.budget or not state.candidates


def apply_action(state: EpisodeState, action: int) -> EpisodeState:
    """Move the action-th candidate to the end of the chosen list."""
    if is_done(state):
        raise ValueError("episode is already complete")
    if not 0 <= action < len(state.candidates):
        raise ValueError(f"action {action} outside candidate pool of size {len(state.candidates)}")
    picked = state.candidates[action]
    return replace(
        state,
        candidates=state.candidates[:action] + state.candidates[action + 1:],
        chosen=state.chosen + (picked,),
    )


def final_output(state: EpisodeState) -> list[AtomicUnit]:
    """Chosen AUs in the state's ordering mode; requires a finished episode."""
    if not is_done(state):
        raise ValueError("episode is not finished")
    if state.ordering == ORDER_PICKED:
        return list(state.chosen)
    return sorted(state.chosen, key=lambda au: au.original_index)
