"""Synthetic 3x3 pixel-sequence domain.

Each input is 9 pixels in raster order (one AU per pixel).  Three classes are
defined by prototype glyphs; samples are prototypes plus per-pixel Gaussian
noise clamped to [0, 1].  Two goals are available: the class itself, and a
binary attribute (whether the glyph uses the center pixel), which gives a
second, conflicting preservation target.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..data import DOMAIN_SYNTHETIC, Dataset, LabeledSequence, SYNTHETIC_NUM_PIXELS
from ..episode import AtomicUnit

CLASS_NAMES = ("cross", "plus", "ring")

# Raster positions (1-based): cross={1,3,5,7,9}, plus={2,4,5,6,8},
# ring=everything but the center.
PROTOTYPES = np.array(
    [
        [1, 0, 1, 0, 1, 0, 1, 0, 1],
        [0, 1, 0, 1, 1, 1, 0, 1, 0],
        [1, 1, 1, 1, 0, 1, 1, 1, 1],
    ],
    dtype=np.float64,
)

CENTER_POSITION = 5  # 1-based raster position

GOAL_CATEGORY = "category"
GOAL_ATTRIBUTE = "attribute"
GOALS = (GOAL_CATEGORY, GOAL_ATTRIBUTE)

DEFAULT_NOISE_SIGMA = 0.25


def attribute_label(category: int) -> int:
    """1 when the class prototype lights the center pixel, else 0."""
    return int(PROTOTYPES[category][CENTER_POSITION - 1] > 0)


@dataclass(frozen=True)
class SyntheticSample:
    sample_id: str
    pixels: np.ndarray  # (9,) in raster order, values in [0, 1]
    category: int
    attribute: int


def gen_synthetic(
    count_per_class: int, noise_sigma: float, rng: np.random.Generator
) -> list[SyntheticSample]:
    """Balanced noisy samples around the class prototypes, clamped to [0, 1]."""
    if count_per_class < 1:
        raise ValueError("count_per_class must be positive")
    if noise_sigma < 0:
        raise ValueError("noise sigma must be non-negative")
    samples = []
    for category, name in enumerate(CLASS_NAMES):
        noise = rng.normal(0.0, noise_sigma, size=(count_per_class, SYNTHETIC_NUM_PIXELS))
        pixels = np.clip(PROTOTYPES[category] + noise, 0.0, 1.0)
        for i in range(count_per_class):
            samples.append(
                SyntheticSample(
                    sample_id=f"{name}{i:04d}",
                    pixels=pixels[i],
                    category=category,
                    attribute=attribute_label(category),
                )
            )
    return samples


def to_dataset(samples: Sequence[SyntheticSample], goal: str = GOAL_CATEGORY) -> Dataset:
    """Bake the chosen goal's labels into a dataset (category or attribute)."""
    if goal not in GOALS:
        raise ValueError(f"unknown goal {goal!r}; expected one of {GOALS}")
    sequences = tuple(
        LabeledSequence(
            seq_id=s.sample_id,
            category=s.category,
            label=s.category if goal == GOAL_CATEGORY else s.attribute,
            features=np.asarray(s.pixels, dtype=np.float64).reshape(-1, 1),
        )
        for s in samples
    )
    return Dataset(
        domain=DOMAIN_SYNTHETIC,
        feature_dim=1,
        num_labels=len(CLASS_NAMES) if goal == GOAL_CATEGORY else 2,
        num_categories=len(CLASS_NAMES),
        sequences=sequences,
    ).validate()


@dataclass(frozen=True)
class SyntheticDomain:
    """Positional rendering: selected pixels keep their raster slots,
    everything else is background zero."""

    name: str = DOMAIN_SYNTHETIC
    feature_dim: int = 1
    render_dim: int = SYNTHETIC_NUM_PIXELS

    def render(self, selection: Sequence[AtomicUnit]) -> np.ndarray:
        image = np.zeros(SYNTHETIC_NUM_PIXELS)
        for au in selection:
            if not 1 <= au.original_index <= SYNTHETIC_NUM_PIXELS:
                raise ValueError(f"pixel position {au.original_index} outside the 3x3 grid")
            if au.features.shape != (1,):
                raise ValueError("synthetic AUs carry a single pixel value")
            image[au.original_index - 1] = au.features[0]
        return image
