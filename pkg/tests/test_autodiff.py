"""Numeric layer tests: forward contracts, gradients vs finite differences,
and an independently coded scalar-loop GRU reference."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seqabs.autodiff import (
    GRU_KEYS,
    Tape,
    ascent_step,
    fc_forward,
    gru_param_shapes,
    gru_step,
    gru_step_forward,
    log_softmax,
    softmax,
)


def random_gru_arrays(rng, input_dim, hidden):
    return {
        key: rng.uniform(-0.5, 0.5, size=shape)
        for key, shape in gru_param_shapes(input_dim, hidden).items()
    }


def gru_scalar_reference(x, h_prev, p):
    """Element-by-element GRU update, written independently of the tape ops."""
    hidden = len(h_prev)
    h_new = [0.0] * hidden
    for j in range(hidden):
        z_pre = p["bz"][j]
        r_pre = p["br"][j]
        for i in range(len(x)):
            z_pre += x[i] * p["wz"][i][j]
            r_pre += x[i] * p["wr"][i][j]
        for k in range(hidden):
            z_pre += h_prev[k] * p["uz"][k][j]
            r_pre += h_prev[k] * p["ur"][k][j]
        z = 1.0 / (1.0 + math.exp(-z_pre))
        r = 1.0 / (1.0 + math.exp(-r_pre))
        h_new[j] = (z, r)
    # candidate gate needs every reset value first
    resets = [h_new[j][1] for j in range(hidden)]
    out = [0.0] * hidden
    for j in range(hidden):
        c_pre = p["bh"][j]
        for i in range(len(x)):
            c_pre += x[i] * p["wh"][i][j]
        for k in range(hidden):
            c_pre += resets[k] * h_prev[k] * p["uh"][k][j]
        c = math.tanh(c_pre)
        z = h_new[j][0]
        out[j] = (1.0 - z) * h_prev[j] + z * c
    return np.array(out)


class TestFc:
    def test_identity(self):
        assert np.array_equal(fc_forward([1.0, 0.0], np.eye(2), [0.0, 0.0]), [1.0, 0.0])

    def test_arithmetic(self):
        assert np.array_equal(fc_forward([1.0, 1.0], [[2.0], [3.0]], [1.0]), [6.0])

    def test_bias_only(self):
        w = np.ones((3, 1))
        assert np.array_equal(fc_forward(np.zeros(3), w, [0.5]), [0.5])

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            fc_forward([1.0, 2.0, 3.0], np.eye(2), [0.0, 0.0])
        with pytest.raises(ValueError):
            fc_forward([1.0, 2.0], np.eye(2), [0.0, 0.0, 0.0])

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            fc_forward([np.nan, 1.0], np.eye(2), [0.0, 0.0])


class TestGru:
    def test_zero_params_halve_hidden_state(self):
        arrays = {k: np.zeros(s) for k, s in gru_param_shapes(3, 4).items()}
        h_prev = np.array([1.0, -2.0, 0.5, 4.0])
        out = gru_step_forward(np.zeros(3), h_prev, arrays)
        assert np.array_equal(out, 0.5 * h_prev)

    def test_zero_params_zero_state(self):
        arrays = {k: np.zeros(s) for k, s in gru_param_shapes(2, 3).items()}
        assert np.array_equal(gru_step_forward(np.zeros(2), np.zeros(3), arrays), np.zeros(3))

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_scalar_reference(self, seed):
        rng = np.random.default_rng(seed)
        input_dim, hidden = int(rng.integers(1, 5)), int(rng.integers(1, 6))
        arrays = random_gru_arrays(rng, input_dim, hidden)
        x = rng.normal(size=input_dim)
        h_prev = rng.normal(size=hidden)
        got = gru_step_forward(x, h_prev, arrays)
        want = gru_scalar_reference(x, h_prev, arrays)
        np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-12)

    def test_shape_mismatch_rejected(self):
        arrays = random_gru_arrays(np.random.default_rng(0), 2, 3)
        with pytest.raises(ValueError):
            gru_step_forward(np.zeros(5), np.zeros(3), arrays)


class TestSoftmax:
    def test_symmetry(self):
        np.testing.assert_allclose(softmax([0.0, 0.0, 0.0]), np.ones(3) / 3, atol=1e-15)

    def test_closed_form(self):
        np.testing.assert_allclose(softmax([math.log(2.0), 0.0]), [2 / 3, 1 / 3], atol=1e-12)

    def test_single_logit(self):
        assert softmax([5.7]).tolist() == [1.0]

    def test_empty_pool_rejected(self):
        with pytest.raises(ValueError):
            softmax([])

    @given(st.lists(st.floats(-300, 300), min_size=1, max_size=12))
    def test_sums_to_one(self, logits):
        assert abs(softmax(logits).sum() - 1.0) < 1e-6

    @given(
        st.lists(st.floats(-100, 100), min_size=2, max_size=10),
        st.floats(-50, 50),
    )
    def test_shift_invariance(self, logits, shift):
        base = softmax(logits)
        shifted = softmax(np.asarray(logits) + shift)
        np.testing.assert_allclose(base, shifted, atol=1e-6)

    @given(st.lists(st.floats(-100, 100), min_size=2, max_size=10))
    def test_order_preserving(self, logits):
        probs = softmax(logits)
        order = np.argsort(logits, kind="stable")
        assert np.all(np.diff(probs[order]) >= -1e-15)


class TestBackward:
    def test_linear_gradient(self):
        t = Tape()
        w = t.leaf([2.0])
        x = t.leaf([3.0])
        y = t.pick(t.mul(w, x), 0)
        grads = t.backward(y)
        assert grads[w.index].tolist() == [3.0]

    def test_log_softmax_pick_identity(self):
        t = Tape()
        logits = t.leaf([0.7, -0.3])
        lp = t.pick(t.log_softmax(logits), 0)
        grads = t.backward(lp)
        p = softmax([0.7, -0.3])
        np.testing.assert_allclose(grads[logits.index], [1 - p[0], -p[1]], atol=1e-12)

    def test_requires_scalar_target(self):
        t = Tape()
        v = t.leaf([1.0, 2.0])
        with pytest.raises(ValueError, match="scalar"):
            t.backward(v)

    def test_requires_recording_tape(self):
        t = Tape(record=False)
        v = t.pick(t.leaf([1.0]), 0)
        with pytest.raises(RuntimeError):
            t.backward(v)

    def test_gru_chain_matches_finite_differences(self):
        rng = np.random.default_rng(3)
        arrays = random_gru_arrays(rng, 2, 3)
        xs = [rng.normal(size=2) for _ in range(3)]
        probe = rng.normal(size=3)
        ones = np.ones((3, 1))

        def projection(mod, record=False):
            # scalar = (GRU chain output) . probe, built from primitive ops
            t = Tape(record=record)
            refs = {k: t.leaf(mod[k]) for k in GRU_KEYS}
            h = t.leaf(np.zeros(3))
            for x in xs:
                h = gru_step(t, t.leaf(x), h, refs)
            s = t.pick(t.vecmat(t.mul(h, t.leaf(probe)), t.leaf(ones)), 0)
            return t, refs, s

        t, refs, s = projection(arrays, record=True)
        raw = t.backward(s)
        grads = {k: raw.get(refs[k].index, np.zeros_like(arrays[k])) for k in GRU_KEYS}
        h_step = 1e-6
        for k in GRU_KEYS:
            flat = arrays[k].ravel()
            for i in range(0, flat.size, max(1, flat.size // 5)):
                mod_p = {kk: v.copy() for kk, v in arrays.items()}
                mod_m = {kk: v.copy() for kk, v in arrays.items()}
                mod_p[k].ravel()[i] += h_step
                mod_m[k].ravel()[i] -= h_step
                fd = (float(projection(mod_p)[2].value) - float(projection(mod_m)[2].value)) / (2 * h_step)
                assert abs(grads[k].ravel()[i] - fd) < 1e-5 + 1e-4 * abs(fd)


class TestReplay:
    def test_replay_is_bit_identical(self):
        rng = np.random.default_rng(11)
        t = Tape()
        x = t.leaf(rng.normal(size=4))
        w = t.leaf(rng.normal(size=(4, 3)))
        b = t.leaf(rng.normal(size=3))
        y = t.tanh(t.add(t.vecmat(x, w), b))
        z = t.pick(t.log_softmax(y), 1)
        recomputed = t.replay()
        for (op, parents, value, aux), new in zip(t._nodes, recomputed):
            assert np.array_equal(np.asarray(value), np.asarray(new))


class TestAscentStep:
    def test_basic_update(self):
        out = ascent_step({"w": np.array([1.0])}, {"w": np.array([2.0])}, 0.1)
        np.testing.assert_allclose(out["w"], [1.2], atol=1e-15)

    def test_zero_gradient_is_identity(self):
        params = {"w": np.array([[1.0, -2.0], [0.5, 3.0]])}
        out = ascent_step(params, {"w": np.zeros((2, 2))}, 0.7)
        assert np.array_equal(out["w"], params["w"])

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            ascent_step({"w": np.zeros(2)}, {"w": np.zeros(3)}, 0.1)


class TestLogSoftmax:
    def test_matches_log_of_softmax(self):
        logits = np.array([1.0, -2.0, 0.3])
        np.testing.assert_allclose(log_softmax(logits), np.log(softmax(logits)), atol=1e-12)
