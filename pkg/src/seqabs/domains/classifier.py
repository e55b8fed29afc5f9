"""Linear goal classifier: softmax regression over domain renderings.

Trained by full-batch gradient descent on cross-entropy.  The training rows
mix each sequence's full rendering with random partial renderings (uniform
subset size), so the classifier's probabilities stay meaningful on the
partial selections it scores during agent training.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .. import model_io
from ..autodiff import softmax
from ..data import Dataset
from ..episode import decompose
from ..reward import RenderDomain


@dataclass(frozen=True)
class ClassifierTrainConfig:
    partial_views: int = 4       # random partial renderings added per sequence
    epochs: int = 600
    learning_rate: float = 0.5
    heldout_fraction: float = 0.2
    seed: int = 0

    def validate(self) -> "ClassifierTrainConfig":
        if self.partial_views < 0:
            raise ValueError("partial_views must be non-negative")
        if self.epochs < 1:
            raise ValueError("epochs must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if not 0.0 <= self.heldout_fraction < 1.0:
            raise ValueError("heldout fraction must be in [0, 1)")
        return self


class LinearGoalClassifier:
    """softmax(x @ weights + biases) over a rendering x."""

    def __init__(self, weights: np.ndarray, biases: np.ndarray):
        weights = np.asarray(weights, dtype=np.float64)
        biases = np.asarray(biases, dtype=np.float64)
        if weights.ndim != 2 or biases.shape != (weights.shape[1],):
            raise ValueError("weights must be (input_dim, num_labels), biases (num_labels,)")
        self.weights = weights
        self.biases = biases

    @property
    def input_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def num_labels(self) -> int:
        return self.weights.shape[1]

    def predict_proba(self, rendering: np.ndarray) -> np.ndarray:
        x = np.asarray(rendering, dtype=np.float64)
        if x.shape != (self.input_dim,):
            raise ValueError(
                f"rendering dim {x.shape} does not match classifier input dim {self.input_dim}"
            )
        return softmax(x @ self.weights + self.biases)

    def save(self, path, domain_name: str = "") -> None:
        config = {"input_dim": self.input_dim, "num_labels": self.num_labels,
                  "domain": domain_name}
        model_io.save_model(
            path, kind="classifier", config=config,
            arrays={"weights": self.weights, "biases": self.biases},
        )

    @classmethod
    def load(cls, path) -> tuple["LinearGoalClassifier", dict]:
        kind, config, arrays = model_io.load_model(path)
        if kind != "classifier":
            raise ValueError(f"{path} holds a {kind!r} model, not a classifier")
        return cls(arrays["weights"], arrays["biases"]), config


def _rendering_rows(dataset: Dataset, domain: RenderDomain,
                    partial_views: int, rng: np.random.Generator):
    rows, labels = [], []
    for seq in dataset:
        aus = decompose(seq.features)
        rows.append(domain.render(aus))
        labels.append(seq.label)
        for _ in range(partial_views):
            size = int(rng.integers(1, len(aus) + 1))
            picked = rng.choice(len(aus), size=size, replace=False)
            rows.append(domain.render([aus[i] for i in picked]))
            labels.append(seq.label)
    return np.array(rows), np.array(labels, dtype=int)


def train_linear_classifier(
    dataset: Dataset,
    domain: RenderDomain,
    config: ClassifierTrainConfig = ClassifierTrainConfig(),
) -> tuple[LinearGoalClassifier, dict]:
    """Fit the classifier; returns it with a report of held-out accuracy
    measured on full renderings of a held-out sequence split."""
    config.validate()
    dataset.validate()
    if len(set(seq.label for seq in dataset)) < 2:
        raise ValueError("degenerate dataset: training needs at least two distinct labels")
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, 97]))
    order = rng.permutation(len(dataset))
    n_heldout = int(round(config.heldout_fraction * len(dataset)))
    heldout = [dataset.sequences[i] for i in order[:n_heldout]]
    training = [dataset.sequences[i] for i in order[n_heldout:]]
    if len(set(seq.label for seq in training)) < 2:
        raise ValueError("degenerate training split: needs at least two distinct labels")

    from ..data import subset  # local import to avoid a cycle at module load

    x, y = _rendering_rows(subset(dataset, training), domain, config.partial_views, rng)
    num_labels = dataset.num_labels
    one_hot = np.zeros((len(y), num_labels))
    one_hot[np.arange(len(y)), y] = 1.0

    weights = np.zeros((x.shape[1], num_labels))
    biases = np.zeros(num_labels)
    for _ in range(config.epochs):
        logits = x @ weights + biases
        logits -= logits.max(axis=1, keepdims=True)
        p = np.exp(logits)
        p /= p.sum(axis=1, keepdims=True)
        residual = (p - one_hot) / len(y)
        weights -= config.learning_rate * (x.T @ residual)
        biases -= config.learning_rate * residual.sum(axis=0)

    clf = LinearGoalClassifier(weights, biases)
    report = {"training_rows": int(len(y)), "heldout_sequences": len(heldout)}
    if heldout:
        correct = 0
        for seq in heldout:
            proba = clf.predict_proba(domain.render(decompose(seq.features)))
            correct += int(np.argmax(proba)) == seq.label
        report["heldout_accuracy"] = correct / len(heldout)
    return clf, report
