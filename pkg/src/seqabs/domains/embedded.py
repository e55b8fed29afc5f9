"""Precomputed-embedding ingestion domain.

Sequences whose AUs are fixed-length feature vectors produced offline (for
example by a pretrained sequence encoder).  A partial selection is rendered
for the goal classifier as the mean of the selected AU vectors, accumulated
in original-index order so the rendering is a pure function of the selected
set.  The empty selection renders as the zero vector.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..data import DOMAIN_EMBEDDED
from ..episode import AtomicUnit


@dataclass(frozen=True)
class EmbeddedDomain:
    feature_dim: int
    name: str = DOMAIN_EMBEDDED

    @property
    def render_dim(self) -> int:
        return self.feature_dim

    def render(self, selection: Sequence[AtomicUnit]) -> np.ndarray:
        if not selection:
            return np.zeros(self.feature_dim)
        ordered = sorted(selection, key=lambda au: au.original_index)
        total = np.zeros(self.feature_dim)
        for au in ordered:
            if au.features.shape != (self.feature_dim,):
                raise ValueError(
                    f"AU feature dim {au.features.shape} does not match domain dim "
                    f"{self.feature_dim}"
                )
            total = total + au.features
        return total / len(ordered)
