"""Versioned JSON persistence for named parameter arrays.

One file holds the kind tag ("policy" or "classifier"), a config-metadata
dict, and every parameter array with its explicit shape.  Floats are written
with repr precision, so a save/load round trip is bit-exact.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import DataFormatError

FORMAT_NAME = "seqabs-model"
FORMAT_VERSION = 1


def save_model(path, kind: str, config: Mapping, arrays: Mapping[str, np.ndarray]) -> None:
    payload = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "kind": kind,
        "config": dict(config),
        "params": {
            name: {"shape": list(arr.shape), "data": np.asarray(arr, dtype=np.float64).ravel().tolist()}
            for name, arr in arrays.items()
        },
    }
    Path(path).write_text(json.dumps(payload, indent=1, sort_keys=True), encoding="utf-8")


def load_model(path) -> tuple[str, dict, dict[str, np.ndarray]]:
    """Read a model file; returns (kind, config, arrays)."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: not a valid model file ({exc})") from exc
    if not isinstance(payload, dict) or payload.get("format") != FORMAT_NAME:
        raise DataFormatError(f"{path}: not a {FORMAT_NAME} file")
    if payload.get("version") != FORMAT_VERSION:
        raise DataFormatError(
            f"{path}: unsupported model format version {payload.get('version')!r}"
        )
    kind = payload.get("kind")
    if kind not in ("policy", "classifier"):
        raise DataFormatError(f"{path}: unknown model kind {kind!r}")
    config = payload.get("config")
    if not isinstance(config, dict):
        raise DataFormatError(f"{path}: missing config metadata")
    raw = payload.get("params")
    if not isinstance(raw, dict):
        raise DataFormatError(f"{path}: missing params")
    arrays: dict[str, np.ndarray] = {}
    for name, entry in raw.items():
        try:
            shape = tuple(int(s) for s in entry["shape"])
            data = np.asarray(entry["data"], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as exc:
            raise DataFormatError(f"{path}: malformed param {name!r}") from exc
        expected = int(np.prod(shape)) if shape else 1
        if data.ndim != 1 or data.size != expected:
            raise DataFormatError(
                f"{path}: param {name!r} has {data.size} values for shape {shape}"
            )
        if not np.all(np.isfinite(data)):
            raise DataFormatError(f"{path}: param {name!r} contains non-finite values")
        arrays[name] = data.reshape(shape)
    return kind, config, arrays
