"""The selection agent: embeds candidates, the chosen list, and the category,
scores every candidate in the pool, and samples or argmaxes the next pick.

Per step each candidate AU is embedded from [features | one-hot time bucket],
the chosen list is summarized by a GRU (zero vector when empty) plus a
projection, and the category id is looked up in a trainable table.  The three
embeddings are concatenated, passed through a joint layer, and reduced to one
logit per candidate; the logits form a multinomial via softmax.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Mapping, Sequence

import numpy as np

from . import model_io
from .autodiff import GRU_KEYS, Ref, Tape, fc, gru_param_shapes, gru_step, softmax
from .episode import NUM_BUCKETS, AtomicUnit

MODE_TRAIN = "train"
MODE_EVAL = "eval"

INIT_SCALE = 0.08


@dataclass(frozen=True)
class PolicyConfig:
    feature_dim: int
    num_categories: int
    hidden_size: int = 128
    candidate_dim: int = 9
    chosen_dim: int = 18
    category_dim: int = 3
    joint_dim: int = 15
    buckets: int = NUM_BUCKETS

    def validate(self) -> "PolicyConfig":
        for name, value in asdict(self).items():
            if int(value) < 1:
                raise ValueError(f"PolicyConfig.{name} must be positive, got {value}")
        return self

    def param_shapes(self) -> dict[str, tuple[int, ...]]:
        shapes: dict[str, tuple[int, ...]] = {
            "cand_fc.w": (self.feature_dim + self.buckets, self.candidate_dim),
            "cand_fc.b": (self.candidate_dim,),
        }
        for key, shape in gru_param_shapes(self.feature_dim, self.hidden_size).items():
            shapes[f"gru.{key}"] = shape
        joint_in = self.candidate_dim + self.chosen_dim + self.category_dim
        shapes.update(
            {
                "chosen_fc.w": (self.hidden_size, self.chosen_dim),
                "chosen_fc.b": (self.chosen_dim,),
                "category.table": (self.num_categories, self.category_dim),
                "joint_fc.w": (joint_in, self.joint_dim),
                "joint_fc.b": (self.joint_dim,),
                "logit_fc.w": (self.joint_dim, 1),
                "logit_fc.b": (1,),
            }
        )
        return shapes


class PolicyParams:
    """All trainable arrays of the agent, keyed by name."""

    def __init__(self, config: PolicyConfig, arrays: Mapping[str, np.ndarray]):
        config.validate()
        expected = config.param_shapes()
        if set(arrays) != set(expected):
            missing = set(expected) ^ set(arrays)
            raise ValueError(f"parameter set mismatch: {sorted(missing)}")
        clean: dict[str, np.ndarray] = {}
        for name, shape in expected.items():
            arr = np.asarray(arrays[name], dtype=np.float64)
            if arr.shape != shape:
                raise ValueError(f"param {name!r} has shape {arr.shape}, expected {shape}")
            clean[name] = arr
        self.config = config
        self.arrays = clean

    @classmethod
    def initialize(cls, config: PolicyConfig, rng) -> "PolicyParams":
        """Weights uniform in [-INIT_SCALE, INIT_SCALE], biases zero.

        ``rng`` is a numpy Generator or an integer seed.  Draw order follows
        param_shapes() insertion order, so a given seed is reproducible.
        """
        if not isinstance(rng, np.random.Generator):
            rng = np.random.default_rng(np.random.SeedSequence([int(rng)]))
        arrays = {}
        for name, shape in config.param_shapes().items():
            if name.endswith(".b"):
                arrays[name] = np.zeros(shape)
            else:
                arrays[name] = rng.uniform(-INIT_SCALE, INIT_SCALE, size=shape)
        return cls(config, arrays)

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for a in self.arrays.values())

    def zero_gradients(self) -> dict[str, np.ndarray]:
        return {name: np.zeros_like(a) for name, a in self.arrays.items()}

    def save(self, path) -> None:
        model_io.save_model(path, kind="policy", config=asdict(self.config), arrays=self.arrays)

    @classmethod
    def load(cls, path) -> "PolicyParams":
        kind, config, arrays = model_io.load_model(path)
        if kind != "policy":
            raise ValueError(f"{path} holds a {kind!r} model, not a policy")
        return cls(PolicyConfig(**config), arrays)


@dataclass(frozen=True)
class ActionDistribution:
    """Per-candidate logits and their softmax probabilities."""

    logits: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        if self.logits.shape != self.probs.shape or self.logits.ndim != 1:
            raise ValueError("logits and probs must be 1-D vectors of equal length")


def _one_hot_bucket(bucket: int, buckets: int) -> np.ndarray:
    if not 1 <= bucket <= buckets:
        raise ValueError(f"time bucket {bucket} outside 1..{buckets}")
    v = np.zeros(buckets)
    v[bucket - 1] = 1.0
    return v


def _check_features(au: AtomicUnit, config: PolicyConfig) -> np.ndarray:
    feats = np.asarray(au.features, dtype=np.float64)
    if feats.shape != (config.feature_dim,):
        raise ValueError(
            f"AU feature dim {feats.shape} does not match policy feature_dim {config.feature_dim}"
        )
    return feats


def _candidate_embedding(t: Tape, leaves, au: AtomicUnit, config: PolicyConfig) -> Ref:
    feats = _check_features(au, config)
    x = t.leaf(np.concatenate([feats, _one_hot_bucket(au.bucket, config.buckets)]))
    return t.tanh(fc(t, x, leaves["cand_fc.w"], leaves["cand_fc.b"]))


def _chosen_embedding(t: Tape, leaves, chosen: Sequence[AtomicUnit], config: PolicyConfig) -> Ref:
    gru_refs = {k: leaves[f"gru.{k}"] for k in GRU_KEYS}
    h = t.leaf(np.zeros(config.hidden_size))  # empty list: zero vector stands in for the GRU output
    for au in chosen:
        h = gru_step(t, t.leaf(_check_features(au, config)), h, gru_refs)
    return t.tanh(fc(t, h, leaves["chosen_fc.w"], leaves["chosen_fc.b"]))


class StepScores:
    """Scores for one step; keeps the tape so the chosen action's
    log-probability can be differentiated afterwards."""

    def __init__(self, dist: ActionDistribution, tape: Tape, logits_ref: Ref,
                 leaf_index: dict[str, int], params: PolicyParams):
        self.dist = dist
        self._tape = tape
        self._logits_ref = logits_ref
        self._leaf_index = leaf_index
        self._params = params

    def log_prob_gradients(self, action: int) -> dict[str, np.ndarray]:
        """d log pi(action) / d theta for every named parameter."""
        log_probs = self._tape.log_softmax(self._logits_ref)
        picked = self._tape.pick(log_probs, action)
        raw = self._tape.backward(picked)
        out = {}
        for name, arr in self._params.arrays.items():
            grad = raw.get(self._leaf_index[name])
            out[name] = grad if grad is not None else np.zeros_like(arr)
        return out


def score_step(
    params: PolicyParams,
    candidates: Sequence[AtomicUnit],
    chosen: Sequence[AtomicUnit],
    category: int,
    record: bool = False,
) -> StepScores:
    """Score every candidate given the chosen list and category.

    The per-candidate layers share weights, so the whole pool is scored as one
    stacked matrix pass; the pool is re-stacked every step as it shrinks.
    """
    config = params.config
    n = len(candidates)
    if n == 0:
        raise ValueError("cannot score an empty candidate pool")
    if not 0 <= category < config.num_categories:
        raise ValueError(f"category {category} outside 0..{config.num_categories - 1}")
    t = Tape(record=record)
    leaves = {name: t.leaf(arr) for name, arr in params.arrays.items()}
    leaf_index = {name: ref.index for name, ref in leaves.items()}
    chosen_emb = _chosen_embedding(t, leaves, chosen, config)
    cat_emb = t.row(leaves["category.table"], category)

    stacked = np.empty((n, config.feature_dim + config.buckets))
    for i, au in enumerate(candidates):
        stacked[i, :config.feature_dim] = _check_features(au, config)
        stacked[i, config.feature_dim:] = _one_hot_bucket(au.bucket, config.buckets)
    cand_embs = t.tanh(
        t.add_row(t.matmat(t.leaf(stacked), leaves["cand_fc.w"]), leaves["cand_fc.b"])
    )
    joint_in = t.hconcat((cand_embs, t.tile_row(chosen_emb, n), t.tile_row(cat_emb, n)))
    joint = t.tanh(t.add_row(t.matmat(joint_in, leaves["joint_fc.w"]), leaves["joint_fc.b"]))
    logits_ref = t.flatten(t.add_row(t.matmat(joint, leaves["logit_fc.w"]), leaves["logit_fc.b"]))
    logits = np.array(logits_ref.value)
    dist = ActionDistribution(logits=logits, probs=softmax(logits))
    return StepScores(dist, t, logits_ref, leaf_index, params)


def score_actions(
    params: PolicyParams,
    candidates: Sequence[AtomicUnit],
    chosen: Sequence[AtomicUnit],
    category: int,
) -> ActionDistribution:
    return score_step(params, candidates, chosen, category, record=False).dist


def select_action(dist: ActionDistribution, mode: str, rng=None) -> int:
    """Training samples the multinomial; evaluation takes the largest logit
    (lowest index on ties)."""
    if mode == MODE_EVAL:
        return int(np.argmax(dist.logits))
    if mode == MODE_TRAIN:
        if rng is None:
            raise ValueError("training-mode selection needs an rng")
        return int(rng.choice(dist.probs.size, p=dist.probs))
    raise ValueError(f"unknown selection mode {mode!r}")


def embed_candidate(params: PolicyParams, au: AtomicUnit) -> np.ndarray:
    t = Tape(record=False)
    leaves = {name: t.leaf(arr) for name, arr in params.arrays.items()}
    return _candidate_embedding(t, leaves, au, params.config).value


def embed_chosen(params: PolicyParams, chosen: Sequence[AtomicUnit]) -> np.ndarray:
    t = Tape(record=False)
    leaves = {name: t.leaf(arr) for name, arr in params.arrays.items()}
    return _chosen_embedding(t, leaves, chosen, params.config).value


def embed_category(params: PolicyParams, category: int) -> np.ndarray:
    if not 0 <= category < params.config.num_categories:
        raise ValueError(f"category {category} outside 0..{params.config.num_categories - 1}")
    return np.array(params.arrays["category.table"][category])
