"""Annealed comparative reward.

Per step the agent's goal-classifier performance on its selection so far is
compared against a mixture of two reference policies on the same input: the
original input order and a random order.  The mixture weight anneals linearly
from the random reference (anneal=0) to the original-order reference
(anneal=1) over the training run, so the bar rises as training proceeds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence, runtime_checkable

import numpy as np

from .episode import AtomicUnit


@runtime_checkable
class GoalClassifier(Protocol):
    """Frozen scorer: probability distribution over goal labels for a rendering."""

    num_labels: int

    def predict_proba(self, rendering: np.ndarray) -> np.ndarray: ...


@runtime_checkable
class RenderDomain(Protocol):
    """Turns a partial AU selection into the classifier's input vector."""

    name: str
    feature_dim: int
    render_dim: int

    def render(self, selection: Sequence[AtomicUnit]) -> np.ndarray: ...


@dataclass(frozen=True)
class RewardConfig:
    scale: float = 100.0           # reward scaling factor
    episodes: int = 1              # length of the anneal schedule
    num_random_baselines: int = 1  # random-order traces averaged per play

    def validate(self) -> "RewardConfig":
        if self.scale <= 0:
            raise ValueError("reward scale must be positive")
        if self.episodes < 1:
            raise ValueError("anneal schedule needs at least one episode")
        if self.num_random_baselines < 1:
            raise ValueError("need at least one random baseline trace")
        return self


@dataclass(frozen=True)
class BaselineTraces:
    """Per-step reference performances for one play."""

    original: np.ndarray  # performance of the first t AUs in input order
    random: np.ndarray    # performance of the first t AUs of the drawn permutation(s)
    permutations: tuple[tuple[int, ...], ...]  # 0-based draw orders used

    def __post_init__(self):
        if self.original.shape != self.random.shape or self.original.ndim != 1:
            raise ValueError("baseline traces must be 1-D and of equal length")


def delta_at(step: int, total: int) -> float:
    """Linear anneal fraction: step/total, clamped to [0, 1]."""
    if total <= 0:
        raise ValueError("anneal schedule length must be positive")
    if step < 0:
        raise ValueError("anneal step must be non-negative")
    return min(1.0, step / total)


def performance(
    classifier: GoalClassifier,
    domain: RenderDomain,
    selection: Sequence[AtomicUnit],
    label: int,
) -> float:
    """Probability the classifier assigns to the true label of the selection."""
    proba = classifier.predict_proba(domain.render(selection))
    if not 0 <= label < len(proba):
        raise ValueError(f"label {label} outside classifier range 0..{len(proba) - 1}")
    return float(proba[label])


def build_baselines(
    aus: Sequence[AtomicUnit],
    label: int,
    classifier: GoalClassifier,
    domain: RenderDomain,
    rng: np.random.Generator,
    steps: int,
    num_random: int = 1,
) -> BaselineTraces:
    """Reference traces for one play: original-order and random-order prefixes.

    One random permutation is drawn per trace at play start; with
    ``num_random > 1`` the random trace is the element-wise mean over draws.
    """
    if steps < 1 or steps > len(aus):
        raise ValueError(f"steps {steps} outside 1..{len(aus)}")
    if num_random < 1:
        raise ValueError("num_random must be at least 1")
    in_order = sorted(aus, key=lambda au: au.original_index)
    original = np.array(
        [performance(classifier, domain, in_order[:t], label) for t in range(1, steps + 1)]
    )
    random_traces = np.zeros((num_random, steps))
    permutations = []
    for k in range(num_random):
        order = rng.permutation(len(aus))
        permutations.append(tuple(int(i) for i in order))
        shuffled = [aus[i] for i in order]
        random_traces[k] = [
            performance(classifier, domain, shuffled[:t], label) for t in range(1, steps + 1)
        ]
    return BaselineTraces(
        original=original,
        random=random_traces.mean(axis=0),
        permutations=tuple(permutations),
    )


def reward_value(agent: float, original: float, random: float, anneal: float, scale: float) -> float:
    """One step's reward: (agent - mix(original, random)) * scale."""
    for name, p in (("agent", agent), ("original", original), ("random", random)):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{name} performance {p} outside [0, 1]")
    if not 0.0 <= anneal <= 1.0:
        raise ValueError(f"anneal fraction {anneal} outside [0, 1]")
    if scale <= 0:
        raise ValueError("reward scale must be positive")
    return (agent - (anneal * original + (1.0 - anneal) * random)) * scale
