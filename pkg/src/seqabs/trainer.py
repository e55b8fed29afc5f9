"""Policy-gradient training loop.

Each episode samples one input, runs N independent plays, accumulates the
per-step log-probability gradients reweighed by discounted returns, averages
the play gradients, and takes one gradient-ascent step.  All randomness is
derived from a single master seed: parameter init, dataset sampling, action
sampling, and baseline permutations each get an independent stream, keyed by
episode and play where applicable, so a fixed seed gives a bit-identical run
regardless of the worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .data import Dataset, LabeledSequence
from .episode import AtomicUnit, apply_action, decompose, initial_state, is_done
from .errors import TrainingDiverged
from .policy import (
    MODE_EVAL,
    MODE_TRAIN,
    PolicyConfig,
    PolicyParams,
    score_actions,
    score_step,
    select_action,
)
from .reward import (
    GoalClassifier,
    RenderDomain,
    RewardConfig,
    build_baselines,
    delta_at,
    performance,
    reward_value,
)

# Stream tags for the master-seed key scheme.
_STREAM_INIT = 0
_STREAM_DATASET = 1
_STREAM_ACTION = 2
_STREAM_BASELINE = 3


def stream(*key: int) -> np.random.Generator:
    """Independent deterministic generator for a structured key."""
    return np.random.default_rng(np.random.SeedSequence([int(k) for k in key]))


@dataclass(frozen=True)
class TrainerConfig:
    episodes: int
    budget: int | None = None
    budget_by_category: Mapping[int, int] | None = None
    plays: int = 2
    discount: float = 0.9
    learning_rate: float = 0.0001
    reward_scale: float = 100.0
    num_random_baselines: int = 1
    eval_every: int = 100
    seed: int = 0
    workers: int = 1

    def validate(self) -> "TrainerConfig":
        if self.episodes < 0:
            raise ValueError("episodes must be non-negative")
        if (self.budget is None) == (self.budget_by_category is None):
            raise ValueError("set exactly one of budget and budget_by_category")
        if self.budget is not None and self.budget < 1:
            raise ValueError("budget must be at least 1")
        if self.budget_by_category is not None and (
            not self.budget_by_category
            or any(b < 1 for b in self.budget_by_category.values())
        ):
            raise ValueError("per-category budgets must be at least 1")
        if self.plays < 1:
            raise ValueError("plays must be at least 1")
        if not 0.0 <= self.discount <= 1.0:
            raise ValueError("discount must be in [0, 1]")
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.reward_scale <= 0:
            raise ValueError("reward scale must be positive")
        if self.num_random_baselines < 1:
            raise ValueError("num_random_baselines must be at least 1")
        if self.eval_every < 1:
            raise ValueError("eval_every must be at least 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        return self

    def budget_for(self, category: int) -> int:
        if self.budget is not None:
            return self.budget
        try:
            return self.budget_by_category[category]
        except KeyError:
            raise ValueError(f"no budget configured for category {category}") from None


@dataclass
class Trajectory:
    """Record of one play: per-step action, gradient record, and reward."""

    actions: list[int] = field(default_factory=list)           # pool index at pick time
    original_indices: list[int] = field(default_factory=list)  # 1-based input positions
    grad_records: list[dict[str, np.ndarray] | None] = field(default_factory=list)
    rewards: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.actions)

    def validate(self) -> "Trajectory":
        n = len(self.actions)
        if not (len(self.grad_records) == len(self.rewards) == len(self.original_indices) == n):
            raise ValueError("trajectory records must have equal lengths")
        return self


def discounted_returns(rewards: Sequence[float], discount: float) -> list[float]:
    """Suffix returns via the recurrence R_t = r_t + discount * R_{t+1}."""
    if not 0.0 <= discount <= 1.0:
        raise ValueError("discount must be in [0, 1]")
    arr = [float(r) for r in rewards]
    if not all(np.isfinite(arr)):
        raise ValueError("rewards must be finite")
    out = [0.0] * len(arr)
    acc = 0.0
    for t in range(len(arr) - 1, -1, -1):
        acc = arr[t] + discount * acc
        out[t] = acc
    return out


def play_gradient(trajectory: Trajectory, discount: float) -> dict[str, np.ndarray]:
    """Sum over steps of (log-prob gradient * discounted return)."""
    trajectory.validate()
    if len(trajectory) == 0:
        raise ValueError("trajectory is empty")
    returns = discounted_returns(trajectory.rewards, discount)
    total: dict[str, np.ndarray] | None = None
    for grads, ret in zip(trajectory.grad_records, returns):
        if grads is None:
            raise ValueError("trajectory carries no gradient records (eval-mode play?)")
        if total is None:
            total = {name: g * ret for name, g in grads.items()}
        else:
            for name in total:
                total[name] = total[name] + grads[name] * ret
    assert total is not None
    return total


def policy_gradient(
    trajectories: Sequence[Trajectory], discount: float
) -> dict[str, np.ndarray]:
    """Mean over plays of the per-play summed reweighed gradients."""
    if not trajectories:
        raise ValueError("need at least one trajectory")
    total: dict[str, np.ndarray] | None = None
    for traj in trajectories:
        g = play_gradient(traj, discount)
        if total is None:
            total = g
        else:
            for name in total:
                total[name] = total[name] + g[name]
    assert total is not None
    n = float(len(trajectories))
    return {name: g / n for name, g in total.items()}


def run_play(
    params: PolicyParams,
    aus: Sequence[AtomicUnit],
    category: int,
    label: int,
    classifier: GoalClassifier,
    domain: RenderDomain,
    budget: int,
    anneal: float,
    reward_config: RewardConfig,
    rng_action: np.random.Generator | None,
    rng_baseline: np.random.Generator,
    mode: str = MODE_TRAIN,
) -> Trajectory:
    """One full play: score, select, move, reward, for min(budget, n) steps."""
    steps = min(budget, len(aus))
    baselines = build_baselines(
        aus, label, classifier, domain, rng_baseline, steps,
        reward_config.num_random_baselines,
    )
    state = initial_state(aus, budget)
    traj = Trajectory()
    for t in range(steps):
        scores = score_step(
            params, state.candidates, state.chosen, category, record=(mode == MODE_TRAIN)
        )
        action = select_action(scores.dist, mode, rng_action)
        grads = scores.log_prob_gradients(action) if mode == MODE_TRAIN else None
        picked = state.candidates[action]
        state = apply_action(state, action)
        agent_perf = performance(classifier, domain, state.chosen, label)
        traj.actions.append(action)
        traj.original_indices.append(picked.original_index)
        traj.grad_records.append(grads)
        traj.rewards.append(
            reward_value(
                agent_perf,
                float(baselines.original[t]),
                float(baselines.random[t]),
                anneal,
                reward_config.scale,
            )
        )
    return traj.validate()


def greedy_abstract(
    params: PolicyParams, aus: Sequence[AtomicUnit], category: int, budget: int
) -> list[AtomicUnit]:
    """Evaluation-time selection: repeatedly take the largest logit."""
    state = initial_state(aus, budget)
    while not is_done(state):
        dist = score_actions(params, state.candidates, state.chosen, category)
        state = apply_action(state, int(np.argmax(dist.logits)))
    return list(state.chosen)


def selection_metrics(
    sequences: Sequence[LabeledSequence],
    classifier: GoalClassifier,
    domain: RenderDomain,
    select_fn,
) -> tuple[float, float]:
    """(accuracy, mean true-label probability) of a per-sequence selector."""
    if not sequences:
        raise ValueError("empty evaluation set")
    correct = 0
    prob_total = 0.0
    for seq in sequences:
        selection = select_fn(seq)
        proba = classifier.predict_proba(domain.render(selection))
        if not 0 <= seq.label < len(proba):
            raise ValueError(f"label {seq.label} outside classifier range")
        correct += int(np.argmax(proba)) == seq.label
        prob_total += float(proba[seq.label])
    return correct / len(sequences), prob_total / len(sequences)


def evaluate(
    params: PolicyParams,
    sequences: Sequence[LabeledSequence],
    classifier: GoalClassifier,
    domain: RenderDomain,
    budget: int | Mapping[int, int],
) -> float:
    """Fraction of sequences whose abstraction argmax-classifies correctly."""
    def budget_for(category: int) -> int:
        return budget if isinstance(budget, int) else budget[category]

    def select(seq: LabeledSequence):
        aus = decompose(seq.features)
        return greedy_abstract(params, aus, seq.category, budget_for(seq.category))

    accuracy, _ = selection_metrics(sequences, classifier, domain, select)
    return accuracy


@dataclass(frozen=True)
class EpisodeMetric:
    episode: int
    anneal: float
    mean_reward: float
    eval_accuracy: float | None


@dataclass
class TrainResult:
    params: PolicyParams
    metrics: list[EpisodeMetric]


def train(
    dataset: Dataset,
    domain: RenderDomain,
    classifier: GoalClassifier,
    config: TrainerConfig,
    test: Dataset | None = None,
    policy_config: PolicyConfig | None = None,
) -> TrainResult:
    """Run the full training loop; returns final params and per-episode metrics."""
    config.validate()
    dataset.validate()
    if policy_config is None:
        policy_config = PolicyConfig(
            feature_dim=dataset.feature_dim, num_categories=dataset.num_categories
        )
    _check_setup(dataset, domain, classifier, config, policy_config, test)
    reward_config = RewardConfig(
        scale=config.reward_scale,
        episodes=max(config.episodes, 1),
        num_random_baselines=config.num_random_baselines,
    ).validate()

    params = PolicyParams.initialize(policy_config, stream(config.seed, _STREAM_INIT))
    metrics: list[EpisodeMetric] = []
    if config.episodes == 0:
        return TrainResult(params=params, metrics=metrics)

    rng_dataset = stream(config.seed, _STREAM_DATASET)
    pool = ThreadPoolExecutor(max_workers=config.workers) if config.workers > 1 else None
    try:
        for episode in range(1, config.episodes + 1):
            seq = dataset.sequences[int(rng_dataset.integers(len(dataset)))]
            aus = decompose(seq.features)
            budget = min(config.budget_for(seq.category), len(aus))
            anneal = delta_at(episode - 1, config.episodes)

            def one_play(play: int, _seq=seq, _aus=aus, _budget=budget, _anneal=anneal,
                         _episode=episode, _params=params):
                return run_play(
                    _params, _aus, _seq.category, _seq.label, classifier, domain,
                    _budget, _anneal, reward_config,
                    rng_action=stream(config.seed, _STREAM_ACTION, _episode, play),
                    rng_baseline=stream(config.seed, _STREAM_BASELINE, _episode, play),
                    mode=MODE_TRAIN,
                )

            play_ids = range(config.plays)
            if pool is not None:
                trajectories = list(pool.map(one_play, play_ids))
            else:
                trajectories = [one_play(p) for p in play_ids]

            grads = policy_gradient(trajectories, config.discount)
            params = params_updated(params, grads, config.learning_rate)
            if not params.all_finite():
                raise TrainingDiverged(
                    f"non-finite parameters after episode {episode}; "
                    "lower the learning rate or reward scale"
                )

            eval_accuracy = None
            if test is not None and episode % config.eval_every == 0:
                eval_accuracy = evaluate(
                    params, test.sequences, classifier, domain, _budget_view(config, test)
                )
            metrics.append(
                EpisodeMetric(
                    episode=episode,
                    anneal=anneal,
                    mean_reward=float(np.mean([sum(t.rewards) for t in trajectories])),
                    eval_accuracy=eval_accuracy,
                )
            )
    finally:
        if pool is not None:
            pool.shutdown()
    return TrainResult(params=params, metrics=metrics)


def params_updated(
    params: PolicyParams, grads: Mapping[str, np.ndarray], learning_rate: float
) -> PolicyParams:
    from .autodiff import ascent_step

    return PolicyParams(params.config, ascent_step(params.arrays, grads, learning_rate))


def _budget_view(config: TrainerConfig, dataset: Dataset) -> int | dict[int, int]:
    if config.budget is not None:
        return config.budget
    return {c: config.budget_for(c) for c in sorted({s.category for s in dataset.sequences})}


def _check_setup(
    dataset: Dataset,
    domain: RenderDomain,
    classifier: GoalClassifier,
    config: TrainerConfig,
    policy_config: PolicyConfig,
    test: Dataset | None,
) -> None:
    """Surface configuration inconsistencies before episode 1."""
    if domain.feature_dim != dataset.feature_dim:
        raise ValueError(
            f"domain feature dim {domain.feature_dim} != dataset dim {dataset.feature_dim}"
        )
    if policy_config.feature_dim != dataset.feature_dim:
        raise ValueError("policy feature_dim does not match the dataset")
    if policy_config.num_categories < dataset.num_categories:
        raise ValueError("policy category table is smaller than the dataset's category set")
    if classifier.num_labels != dataset.num_labels:
        raise ValueError(
            f"classifier has {classifier.num_labels} labels, dataset declares {dataset.num_labels}"
        )
    probe = domain.render([])
    proba = classifier.predict_proba(probe)  # raises on render-dim mismatch
    if len(proba) != dataset.num_labels:
        raise ValueError("classifier output size does not match the dataset's label set")
    for ds in (dataset, test) if test is not None else (dataset,):
        for category in {s.category for s in ds.sequences}:
            config.budget_for(category)  # raises when a category has no budget
