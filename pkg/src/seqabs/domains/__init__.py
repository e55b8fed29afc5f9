"""Concrete AU domains, goal classifiers, and reference selectors."""

from .baselines import baseline_first, baseline_random, oracle_best_subset
from .classifier import ClassifierTrainConfig, LinearGoalClassifier, train_linear_classifier
from .embedded import EmbeddedDomain
from .synthetic import (
    CLASS_NAMES,
    PROTOTYPES,
    SyntheticDomain,
    SyntheticSample,
    attribute_label,
    gen_synthetic,
    to_dataset,
)

from ..data import DOMAIN_EMBEDDED, DOMAIN_SYNTHETIC, Dataset


def domain_for(dataset: Dataset):
    """Rendering domain matching a dataset's declared domain."""
    if dataset.domain == DOMAIN_SYNTHETIC:
        return SyntheticDomain()
    if dataset.domain == DOMAIN_EMBEDDED:
        return EmbeddedDomain(feature_dim=dataset.feature_dim)
    raise ValueError(f"unknown domain {dataset.domain!r}")


__all__ = [
    "CLASS_NAMES",
    "PROTOTYPES",
    "ClassifierTrainConfig",
    "EmbeddedDomain",
    "LinearGoalClassifier",
    "SyntheticDomain",
    "SyntheticSample",
    "attribute_label",
    "baseline_first",
    "baseline_random",
    "domain_for",
    "gen_synthetic",
    "oracle_best_subset",
    "to_dataset",
    "train_linear_classifier",
]
