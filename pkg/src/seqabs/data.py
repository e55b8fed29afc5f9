"""Dataset types and the sequence-file format.

A dataset is a list of labeled sequences, each a matrix of per-AU feature
vectors in original input order plus a category id (conditioning input for
the agent) and a goal label (the classifier target).

File format ("sequence file", extension .seq by convention) -- line oriented:

    seqabs-embedded/1
    domain=synthetic dim=1 labels=3 categories=3
    seq cross0000 0 0 9
    0.9371
    ... (one line per AU: `dim` space-separated floats)
    seq plus0000 1 1 9
    ...

Line 1 is the mandatory format/version tag.  Line 2 declares the rendering
domain, the feature dimension, and the sizes of the label and category sets.
Each record line is `seq <id> <category> <label> <n_aus>` followed by exactly
n_aus feature rows.  Blank lines and lines starting with '#' are ignored.
For domain=synthetic every record must have dim=1 and exactly 9 AUs (the
3x3 pixel grid in raster order).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .errors import DataFormatError

FORMAT_TAG = "seqabs-embedded"
FORMAT_VERSION = 1

DOMAIN_SYNTHETIC = "synthetic"
DOMAIN_EMBEDDED = "embedded"
KNOWN_DOMAINS = (DOMAIN_SYNTHETIC, DOMAIN_EMBEDDED)

SYNTHETIC_NUM_PIXELS = 9


@dataclass(frozen=True)
class LabeledSequence:
    seq_id: str
    category: int
    label: int
    features: np.ndarray  # (n_aus, feature_dim)

    @property
    def num_aus(self) -> int:
        return self.features.shape[0]


@dataclass(frozen=True)
class Dataset:
    domain: str
    feature_dim: int
    num_labels: int
    num_categories: int
    sequences: tuple[LabeledSequence, ...]

    def __len__(self) -> int:
        return len(self.sequences)

    def __iter__(self) -> Iterator[LabeledSequence]:
        return iter(self.sequences)

    def validate(self) -> "Dataset":
        if self.domain not in KNOWN_DOMAINS:
            raise DataFormatError(f"unknown domain {self.domain!r}")
        if self.feature_dim < 1 or self.num_labels < 1 or self.num_categories < 1:
            raise DataFormatError("dim, labels and categories must be positive")
        if not self.sequences:
            raise DataFormatError("dataset holds no sequences")
        seen_ids = set()
        for seq in self.sequences:
            if seq.seq_id in seen_ids:
                raise DataFormatError(f"duplicate sequence id {seq.seq_id!r}")
            seen_ids.add(seq.seq_id)
            if seq.features.ndim != 2 or seq.features.shape[1] != self.feature_dim:
                raise DataFormatError(
                    f"sequence {seq.seq_id!r}: feature dim {seq.features.shape} != {self.feature_dim}"
                )
            if seq.num_aus < 1:
                raise DataFormatError(f"sequence {seq.seq_id!r} has no AUs")
            if not 0 <= seq.label < self.num_labels:
                raise DataFormatError(f"sequence {seq.seq_id!r}: unknown label {seq.label}")
            if not 0 <= seq.category < self.num_categories:
                raise DataFormatError(f"sequence {seq.seq_id!r}: unknown category {seq.category}")
            if not np.all(np.isfinite(seq.features)):
                raise DataFormatError(f"sequence {seq.seq_id!r}: non-finite features")
            if self.domain == DOMAIN_SYNTHETIC and (
                self.feature_dim != 1 or seq.num_aus != SYNTHETIC_NUM_PIXELS
            ):
                raise DataFormatError(
                    f"sequence {seq.seq_id!r}: synthetic records need dim=1 and "
                    f"{SYNTHETIC_NUM_PIXELS} AUs"
                )
        return self


def save_sequences(path, dataset: Dataset) -> None:
    dataset.validate()
    lines = [f"{FORMAT_TAG}/{FORMAT_VERSION}"]
    lines.append(
        f"domain={dataset.domain} dim={dataset.feature_dim} "
        f"labels={dataset.num_labels} categories={dataset.num_categories}"
    )
    for seq in dataset.sequences:
        lines.append(f"seq {seq.seq_id} {seq.category} {seq.label} {seq.num_aus}")
        for row in seq.features:
            lines.append(" ".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _content_lines(path: Path) -> list[tuple[int, str]]:
    numbered = []
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        stripped = raw.strip()
        if stripped and not stripped.startswith("#"):
            numbered.append((lineno, stripped))
    return numbered


def _parse_header(path: Path, lines: list[tuple[int, str]]) -> dict:
    if not lines:
        raise DataFormatError(f"{path}: empty file")
    lineno, tag = lines[0]
    parts = tag.split("/")
    if len(parts) != 2 or parts[0] != FORMAT_TAG:
        raise DataFormatError(f"{path}:{lineno}: expected '{FORMAT_TAG}/<version>' tag")
    if parts[1] != str(FORMAT_VERSION):
        raise DataFormatError(f"{path}:{lineno}: unsupported format version {parts[1]!r}")
    if len(lines) < 2:
        raise DataFormatError(f"{path}: missing header line")
    lineno, header = lines[1]
    fields = {}
    for token in header.split():
        if "=" not in token:
            raise DataFormatError(f"{path}:{lineno}: malformed header token {token!r}")
        key, value = token.split("=", 1)
        fields[key] = value
    required = {"domain", "dim", "labels", "categories"}
    if set(fields) != required:
        raise DataFormatError(
            f"{path}:{lineno}: header must declare exactly {sorted(required)}"
        )
    if fields["domain"] not in KNOWN_DOMAINS:
        raise DataFormatError(f"{path}:{lineno}: unknown domain {fields['domain']!r}")
    try:
        out = {
            "domain": fields["domain"],
            "dim": int(fields["dim"]),
            "labels": int(fields["labels"]),
            "categories": int(fields["categories"]),
        }
    except ValueError as exc:
        raise DataFormatError(f"{path}:{lineno}: non-integer header value") from exc
    return out


def load_sequences(path) -> Dataset:
    """Parse and validate a sequence file; raises DataFormatError with the
    offending line number on the first violation."""
    path = Path(path)
    if not path.exists():
        raise DataFormatError(f"{path}: no such file")
    lines = _content_lines(path)
    header = _parse_header(path, lines)
    dim = header["dim"]
    sequences: list[LabeledSequence] = []
    i = 2
    while i < len(lines):
        lineno, line = lines[i]
        tokens = line.split()
        if tokens[0] != "seq" or len(tokens) != 5:
            raise DataFormatError(
                f"{path}:{lineno}: expected 'seq <id> <category> <label> <n_aus>'"
            )
        seq_id = tokens[1]
        try:
            category, label, n_aus = int(tokens[2]), int(tokens[3]), int(tokens[4])
        except ValueError as exc:
            raise DataFormatError(f"{path}:{lineno}: non-integer record field") from exc
        if n_aus < 1:
            raise DataFormatError(f"{path}:{lineno}: record needs at least one AU")
        rows = np.empty((n_aus, dim), dtype=np.float64)
        for k in range(n_aus):
            if i + 1 + k >= len(lines):
                raise DataFormatError(
                    f"{path}: sequence {seq_id!r} truncated (expected {n_aus} AU rows)"
                )
            row_lineno, row_line = lines[i + 1 + k]
            values = row_line.split()
            if len(values) != dim:
                raise DataFormatError(
                    f"{path}:{row_lineno}: expected {dim} features, got {len(values)}"
                )
            try:
                rows[k] = [float(v) for v in values]
            except ValueError as exc:
                raise DataFormatError(f"{path}:{row_lineno}: non-numeric feature") from exc
        sequences.append(
            LabeledSequence(seq_id=seq_id, category=category, label=label, features=rows)
        )
        i += 1 + n_aus
    if not sequences:
        raise DataFormatError(f"{path}: file declares no sequences")
    dataset = Dataset(
        domain=header["domain"],
        feature_dim=dim,
        num_labels=header["labels"],
        num_categories=header["categories"],
        sequences=tuple(sequences),
    )
    try:
        return dataset.validate()
    except DataFormatError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


def subset(dataset: Dataset, sequences: Sequence[LabeledSequence]) -> Dataset:
    """Same metadata, different sequence list (e.g. train/heldout splits)."""
    return Dataset(
        domain=dataset.domain,
        feature_dim=dataset.feature_dim,
        num_labels=dataset.num_labels,
        num_categories=dataset.num_categories,
        sequences=tuple(sequences),
    )
