"""Minimal dense numeric layer with reverse-mode gradients.

Everything is float64: 1-D vectors, 2-D weight matrices, 0-d scalars.  A
``Tape`` records every primitive op applied through it; ``Tape.backward``
walks the record once and returns the gradient of a recorded scalar with
respect to every leaf.  Tapes are single-use and single-threaded: build one
per forward pass.  With ``record=False`` the same ops run through the same
kernels without recording (no gradients, less overhead).
"""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

GRU_KEYS = ("wz", "uz", "bz", "wr", "ur", "br", "wh", "uh", "bh")


def _as_array(value) -> np.ndarray:
    arr = np.asarray(value, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError("values placed on the tape must be finite")
    return arr


class Ref:
    """Handle to a value produced on a Tape."""

    __slots__ = ("tape", "index", "value")

    def __init__(self, tape: "Tape", index: int, value: np.ndarray):
        self.tape = tape
        self.index = index
        self.value = value


# Forward kernels, shared by the op methods and replay() so that replaying a
# tape reruns bit-identical computations.
_FORWARD = {
    "vecmat": lambda vals, aux: vals[0] @ vals[1],
    "matmat": lambda vals, aux: vals[0] @ vals[1],
    "add": lambda vals, aux: vals[0] + vals[1],
    "sub": lambda vals, aux: vals[0] - vals[1],
    "mul": lambda vals, aux: vals[0] * vals[1],
    "add_row": lambda vals, aux: vals[0] + vals[1],
    "tile_row": lambda vals, aux: np.broadcast_to(vals[0], (aux, vals[0].shape[0])),
    "hconcat": lambda vals, aux: np.concatenate(vals, axis=1),
    "flatten": lambda vals, aux: vals[0].reshape(-1),
    "sigmoid": lambda vals, aux: 1.0 / (1.0 + np.exp(-vals[0])),
    "tanh": lambda vals, aux: np.tanh(vals[0]),
    "one_minus": lambda vals, aux: 1.0 - vals[0],
    "concat": lambda vals, aux: np.concatenate(vals),
    "row": lambda vals, aux: vals[0][aux],
    "log_softmax": lambda vals, aux: _log_softmax_kernel(vals[0]),
    "pick": lambda vals, aux: vals[0][aux],
}


def _log_softmax_kernel(x: np.ndarray) -> np.ndarray:
    shifted = x - x.max()
    return shifted - np.log(np.exp(shifted).sum())


class Tape:
    """Wengert list of primitive ops plus their recorded values."""

    def __init__(self, record: bool = True):
        self.record = record
        self._nodes: list[tuple[str, tuple[int, ...], np.ndarray, object]] = []

    def __len__(self) -> int:
        return len(self._nodes)

    def _push(self, op: str, parents: tuple[int, ...], value, aux=None) -> Ref:
        if not self.record:
            return Ref(self, -1, value)
        self._nodes.append((op, parents, value, aux))
        return Ref(self, len(self._nodes) - 1, value)

    def leaf(self, value) -> Ref:
        return self._push("leaf", (), _as_array(value))

    def _apply(self, op: str, parents: tuple[Ref, ...], aux=None) -> Ref:
        value = _FORWARD[op](tuple(p.value for p in parents), aux)
        return self._push(op, tuple(p.index for p in parents), value, aux)

    def vecmat(self, x: Ref, w: Ref) -> Ref:
        if x.value.ndim != 1 or w.value.ndim != 2 or x.value.shape[0] != w.value.shape[0]:
            raise ValueError(
                f"vecmat: incompatible shapes {x.value.shape} and {w.value.shape}"
            )
        return self._apply("vecmat", (x, w))

    def matmat(self, a: Ref, w: Ref) -> Ref:
        if a.value.ndim != 2 or w.value.ndim != 2 or a.value.shape[1] != w.value.shape[0]:
            raise ValueError(
                f"matmat: incompatible shapes {a.value.shape} and {w.value.shape}"
            )
        return self._apply("matmat", (a, w))

    def add_row(self, m: Ref, v: Ref) -> Ref:
        """Add a row vector to every row of a matrix."""
        if m.value.ndim != 2 or v.value.shape != (m.value.shape[1],):
            raise ValueError(
                f"add_row: incompatible shapes {m.value.shape} and {v.value.shape}"
            )
        return self._apply("add_row", (m, v))

    def tile_row(self, v: Ref, rows: int) -> Ref:
        """Repeat a vector as the rows of a (rows, len(v)) matrix."""
        if v.value.ndim != 1 or rows < 1:
            raise ValueError("tile_row: need a 1-D vector and a positive row count")
        return self._apply("tile_row", (v,), rows)

    def hconcat(self, parts: Sequence[Ref]) -> Ref:
        """Concatenate matrices with equal row counts along columns."""
        if not parts:
            raise ValueError("hconcat: need at least one part")
        rows = parts[0].value.shape[0]
        for p in parts:
            if p.value.ndim != 2 or p.value.shape[0] != rows:
                raise ValueError("hconcat: parts must be 2-D with equal row counts")
        widths = tuple(p.value.shape[1] for p in parts)
        return self._apply("hconcat", tuple(parts), widths)

    def flatten(self, m: Ref) -> Ref:
        if m.value.ndim != 2:
            raise ValueError("flatten: need a 2-D matrix")
        return self._apply("flatten", (m,), m.value.shape)

    def _elementwise_pair(self, op: str, a: Ref, b: Ref) -> Ref:
        if a.value.shape != b.value.shape:
            raise ValueError(f"{op}: shape mismatch {a.value.shape} vs {b.value.shape}")
        return self._apply(op, (a, b))

    def add(self, a: Ref, b: Ref) -> Ref:
        return self._elementwise_pair("add", a, b)

    def sub(self, a: Ref, b: Ref) -> Ref:
        return self._elementwise_pair("sub", a, b)

    def mul(self, a: Ref, b: Ref) -> Ref:
        return self._elementwise_pair("mul", a, b)

    def sigmoid(self, x: Ref) -> Ref:
        return self._apply("sigmoid", (x,))

    def tanh(self, x: Ref) -> Ref:
        return self._apply("tanh", (x,))

    def one_minus(self, x: Ref) -> Ref:
        return self._apply("one_minus", (x,))

    def concat(self, parts: Sequence[Ref]) -> Ref:
        if not parts:
            raise ValueError("concat: need at least one part")
        for p in parts:
            if p.value.ndim != 1:
                raise ValueError("concat: parts must be 1-D vectors")
        lengths = tuple(p.value.shape[0] for p in parts)
        return self._apply("concat", tuple(parts), lengths)

    def row(self, table: Ref, index: int) -> Ref:
        if table.value.ndim != 2:
            raise ValueError("row: table must be 2-D")
        if not 0 <= index < table.value.shape[0]:
            raise ValueError(
                f"row: index {index} out of range for table with {table.value.shape[0]} rows"
            )
        return self._apply("row", (table,), index)

    def log_softmax(self, x: Ref) -> Ref:
        if x.value.ndim != 1 or x.value.size == 0:
            raise ValueError("log_softmax: need a non-empty 1-D vector")
        return self._apply("log_softmax", (x,))

    def pick(self, x: Ref, index: int) -> Ref:
        if x.value.ndim != 1:
            raise ValueError("pick: need a 1-D vector")
        if not 0 <= index < x.value.shape[0]:
            raise ValueError(f"pick: index {index} out of range for length {x.value.shape[0]}")
        return self._apply("pick", (x,), index)

    def backward(self, out: Ref) -> dict[int, np.ndarray]:
        """Gradient of the recorded scalar ``out`` w.r.t. every leaf.

        Returns a mapping from leaf node index to gradient array.  Leaves the
        scalar does not depend on are absent (their gradient is zero).
        """
        if not self.record:
            raise RuntimeError("tape was built with record=False; nothing to differentiate")
        if out.tape is not self or out.index < 0:
            raise ValueError("backward target does not live on this tape")
        if np.ndim(out.value) != 0:
            raise ValueError("backward target must be a recorded scalar")
        nodes = self._nodes
        adjoint: list = [None] * len(nodes)
        adjoint[out.index] = np.float64(1.0)
        for idx in range(out.index, -1, -1):
            grad = adjoint[idx]
            if grad is None:
                continue
            op, parents, value, aux = nodes[idx]
            if op == "leaf":
                continue
            _BACKWARD[op](nodes, parents, value, aux, grad, adjoint)
        return {
            idx: np.asarray(g, dtype=np.float64)
            for idx, g in enumerate(adjoint)
            if g is not None and nodes[idx][0] == "leaf"
        }

    def replay(self) -> list[np.ndarray]:
        """Recompute every recorded value from the leaves, in record order."""
        if not self.record:
            raise RuntimeError("tape was built with record=False; nothing to replay")
        values: list[np.ndarray] = []
        for op, parents, value, aux in self._nodes:
            if op == "leaf":
                values.append(value)
            else:
                values.append(_FORWARD[op](tuple(values[p] for p in parents), aux))
        return values


def _acc(adjoint: list, idx: int, contribution) -> None:
    prior = adjoint[idx]
    adjoint[idx] = contribution if prior is None else prior + contribution


def _bw_vecmat(nodes, parents, value, aux, g, adjoint):
    xi, wi = parents
    _acc(adjoint, xi, g @ nodes[wi][2].T)
    _acc(adjoint, wi, np.outer(nodes[xi][2], g))


def _bw_matmat(nodes, parents, value, aux, g, adjoint):
    ai, wi = parents
    _acc(adjoint, ai, g @ nodes[wi][2].T)
    _acc(adjoint, wi, nodes[ai][2].T @ g)


def _bw_add_row(nodes, parents, value, aux, g, adjoint):
    _acc(adjoint, parents[0], g)
    _acc(adjoint, parents[1], g.sum(axis=0))


def _bw_tile_row(nodes, parents, value, aux, g, adjoint):
    _acc(adjoint, parents[0], g.sum(axis=0))


def _bw_hconcat(nodes, parents, value, aux, g, adjoint):
    offset = 0
    for idx, width in zip(parents, aux):
        _acc(adjoint, idx, g[:, offset:offset + width])
        offset += width


def _bw_flatten(nodes, parents, value, aux, g, adjoint):
    _acc(adjoint, parents[0], g.reshape(aux))


def _bw_add(nodes, parents, value, aux, g, adjoint):
    _acc(adjoint, parents[0], g)
    _acc(adjoint, parents[1], g)


def _bw_sub(nodes, parents, value, aux, g, adjoint):
    _acc(adjoint, parents[0], g)
    _acc(adjoint, parents[1], -g)


def _bw_mul(nodes, parents, value, aux, g, adjoint):
    ai, bi = parents
    _acc(adjoint, ai, g * nodes[bi][2])
    _acc(adjoint, bi, g * nodes[ai][2])


def _bw_sigmoid(nodes, parents, value, aux, g, adjoint):
    _acc(adjoint, parents[0], g * value * (1.0 - value))


def _bw_tanh(nodes, parents, value, aux, g, adjoint):
    _acc(adjoint, parents[0], g * (1.0 - value * value))


def _bw_one_minus(nodes, parents, value, aux, g, adjoint):
    _acc(adjoint, parents[0], -g)


def _bw_concat(nodes, parents, value, aux, g, adjoint):
    offset = 0
    for idx, length in zip(parents, aux):
        _acc(adjoint, idx, g[offset:offset + length])
        offset += length


def _bw_row(nodes, parents, value, aux, g, adjoint):
    z = np.zeros_like(nodes[parents[0]][2])
    z[aux] = g
    _acc(adjoint, parents[0], z)


def _bw_log_softmax(nodes, parents, value, aux, g, adjoint):
    _acc(adjoint, parents[0], g - np.exp(value) * np.sum(g))


def _bw_pick(nodes, parents, value, aux, g, adjoint):
    z = np.zeros_like(nodes[parents[0]][2])
    z[aux] = g
    _acc(adjoint, parents[0], z)


_BACKWARD = {
    "vecmat": _bw_vecmat,
    "matmat": _bw_matmat,
    "add": _bw_add,
    "sub": _bw_sub,
    "mul": _bw_mul,
    "add_row": _bw_add_row,
    "tile_row": _bw_tile_row,
    "hconcat": _bw_hconcat,
    "flatten": _bw_flatten,
    "sigmoid": _bw_sigmoid,
    "tanh": _bw_tanh,
    "one_minus": _bw_one_minus,
    "concat": _bw_concat,
    "row": _bw_row,
    "log_softmax": _bw_log_softmax,
    "pick": _bw_pick,
}


def fc(tape: Tape, x: Ref, w: Ref, b: Ref) -> Ref:
    """Fully-connected layer, y = x @ w + b."""
    return tape.add(tape.vecmat(x, w), b)


def fc_forward(x, w, b) -> np.ndarray:
    """Pure fully-connected forward pass (no gradients)."""
    t = Tape(record=False)
    return fc(t, t.leaf(x), t.leaf(w), t.leaf(b)).value


def gru_param_shapes(input_dim: int, hidden_size: int) -> dict[str, tuple[int, ...]]:
    """Expected array shapes for one GRU cell, keyed by GRU_KEYS."""
    if input_dim < 1 or hidden_size < 1:
        raise ValueError("input_dim and hidden_size must be positive")
    shapes: dict[str, tuple[int, ...]] = {}
    for gate in ("z", "r", "h"):
        shapes[f"w{gate}"] = (input_dim, hidden_size)
        shapes[f"u{gate}"] = (hidden_size, hidden_size)
        shapes[f"b{gate}"] = (hidden_size,)
    return shapes


def gru_step(tape: Tape, x: Ref, h_prev: Ref, p: Mapping[str, Ref]) -> Ref:
    """One GRU update with gate convention h = (1-z)*h_prev + z*h_tilde.

    ``p`` maps GRU_KEYS to parameter refs.  Raises FloatingPointError when the
    new hidden state is non-finite (numeric overflow upstream).
    """
    def gate(w, u, b):
        return tape.add(tape.add(tape.vecmat(x, p[w]), tape.vecmat(h_prev, p[u])), p[b])

    z = tape.sigmoid(gate("wz", "uz", "bz"))
    r = tape.sigmoid(gate("wr", "ur", "br"))
    h_tilde = tape.tanh(
        tape.add(
            tape.add(tape.vecmat(x, p["wh"]), tape.vecmat(tape.mul(r, h_prev), p["uh"])),
            p["bh"],
        )
    )
    h = tape.add(tape.mul(tape.one_minus(z), h_prev), tape.mul(z, h_tilde))
    if not np.all(np.isfinite(h.value)):
        raise FloatingPointError("gru_step produced a non-finite hidden state")
    return h


def gru_step_forward(x, h_prev, arrays: Mapping[str, np.ndarray]) -> np.ndarray:
    """Pure GRU forward step on plain arrays (no gradients)."""
    t = Tape(record=False)
    refs = {k: t.leaf(arrays[k]) for k in GRU_KEYS}
    return gru_step(t, t.leaf(x), t.leaf(h_prev), refs).value


def softmax(logits) -> np.ndarray:
    """Numerically stabilized softmax of a non-empty 1-D vector."""
    z = np.asarray(logits, dtype=np.float64)
    if z.ndim != 1 or z.size == 0:
        raise ValueError("softmax needs a non-empty 1-D vector")
    if not np.all(np.isfinite(z)):
        raise ValueError("softmax logits must be finite")
    e = np.exp(z - z.max())
    return e / e.sum()


def log_softmax(logits) -> np.ndarray:
    """log(softmax(logits)), stabilized by max subtraction."""
    z = np.asarray(logits, dtype=np.float64)
    if z.ndim != 1 or z.size == 0:
        raise ValueError("log_softmax needs a non-empty 1-D vector")
    if not np.all(np.isfinite(z)):
        raise ValueError("log_softmax logits must be finite")
    return _log_softmax_kernel(z)


def ascent_step(
    params: Mapping[str, np.ndarray],
    grads: Mapping[str, np.ndarray],
    learning_rate: float,
) -> dict[str, np.ndarray]:
    """One gradient-ascent update: value + learning_rate * grad, per array."""
    updated = {}
    for name, value in params.items():
        g = grads[name]
        if g.shape != value.shape:
            raise ValueError(f"ascent_step: gradient shape {g.shape} != {value.shape} for {name}")
        updated[name] = value + learning_rate * g
    return updated
