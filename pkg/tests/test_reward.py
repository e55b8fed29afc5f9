"""Reward arithmetic vs brute-force evaluators, anneal schedule, baselines."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from seqabs.domains import EmbeddedDomain, SyntheticDomain
from seqabs.episode import decompose
from seqabs.reward import (
    RewardConfig,
    build_baselines,
    delta_at,
    performance,
    reward_value,
)


class UniformClassifier:
    def __init__(self, num_labels, input_dim):
        self.num_labels = num_labels
        self.input_dim = input_dim

    def predict_proba(self, rendering):
        if rendering.shape != (self.input_dim,):
            raise ValueError("dimension mismatch")
        return np.full(self.num_labels, 1.0 / self.num_labels)


class SumClassifier:
    """Deterministic non-trivial scorer for baseline tests."""

    num_labels = 3

    def predict_proba(self, rendering):
        from seqabs.autodiff import softmax

        s = float(np.sum(rendering))
        return softmax([s, -s, 0.5 * s])


class TestDeltaAt:
    def test_endpoints(self):
        assert delta_at(0, 1000) == 0.0
        assert delta_at(1000, 1000) == 1.0

    def test_midpoint(self):
        assert delta_at(500, 1000) == 0.5

    def test_invalid_schedule_rejected(self):
        with pytest.raises(ValueError):
            delta_at(1, 0)
        with pytest.raises(ValueError):
            delta_at(-1, 10)

    @given(st.integers(1, 10 ** 6))
    def test_monotone_with_exact_endpoints(self, total):
        values = [delta_at(k, total) for k in range(0, total + 1, max(1, total // 20))]
        assert values[0] == 0.0
        assert delta_at(total, total) == 1.0
        assert all(b >= a for a, b in zip(values, values[1:]))
        assert all(0.0 <= v <= 1.0 for v in values)


class TestRewardValue:
    def test_mixed_example(self):
        assert reward_value(0.9, 0.5, 0.7, 0.5, 100.0) == pytest.approx(30.0, abs=1e-12)

    def test_cancellation(self):
        for anneal in (0.0, 0.3, 1.0):
            assert reward_value(0.4, 0.4, 0.4, anneal, 100.0) == pytest.approx(0.0, abs=1e-12)

    def test_full_anneal_ignores_random(self):
        assert reward_value(0.4, 0.5, 0.99, 1.0, 100.0) == pytest.approx(-10.0, abs=1e-12)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            reward_value(1.5, 0.5, 0.5, 0.5, 100.0)
        with pytest.raises(ValueError):
            reward_value(0.5, 0.5, 0.5, 1.5, 100.0)
        with pytest.raises(ValueError):
            reward_value(0.5, 0.5, 0.5, 0.5, 0.0)

    @given(
        st.floats(0, 1), st.floats(0, 1), st.floats(0, 1),
        st.sampled_from([0.0, 0.25, 0.5, 0.75, 1.0]),
        st.floats(0.01, 1000),
    )
    def test_matches_bruteforce_evaluator(self, agent, original, random, anneal, scale):
        # independently written expansion of the same definition
        brute = agent * scale - anneal * original * scale - (1.0 - anneal) * random * scale
        assert abs(reward_value(agent, original, random, anneal, scale) - brute) <= 1e-12 * max(
            1.0, abs(brute)
        )

    @given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
    def test_linear_in_scale(self, agent, original, random, anneal):
        one = reward_value(agent, original, random, anneal, 1.0)
        hundred = reward_value(agent, original, random, anneal, 100.0)
        assert abs(hundred - 100.0 * one) < 1e-9

    def test_monotone_decreasing_in_mixture(self):
        lo = reward_value(0.8, 0.2, 0.2, 0.5, 100.0)
        hi = reward_value(0.8, 0.9, 0.9, 0.5, 100.0)
        assert hi < lo


class TestPerformance:
    def test_uniform_classifier(self):
        domain = SyntheticDomain()
        clf = UniformClassifier(3, 9)
        aus = decompose(np.linspace(0, 1, 9).reshape(-1, 1))
        assert performance(clf, domain, aus[:4], 1) == pytest.approx(1 / 3)

    def test_empty_selection_uses_empty_rendering(self):
        domain = SyntheticDomain()
        clf = SumClassifier()
        expected = clf.predict_proba(np.zeros(9))
        assert performance(clf, domain, [], 0) == pytest.approx(float(expected[0]))

    def test_full_selection_equals_direct_call(self):
        domain = SyntheticDomain()
        clf = SumClassifier()
        feats = np.linspace(0, 1, 9).reshape(-1, 1)
        aus = decompose(feats)
        direct = float(clf.predict_proba(domain.render(aus))[2])
        assert performance(clf, domain, aus, 2) == pytest.approx(direct)

    def test_dimension_mismatch_surfaces(self):
        domain = EmbeddedDomain(feature_dim=4)
        clf = UniformClassifier(3, 9)
        aus = decompose(np.zeros((5, 4)))
        with pytest.raises(ValueError):
            performance(clf, domain, aus[:2], 0)

    def test_label_out_of_range(self):
        domain = SyntheticDomain()
        clf = UniformClassifier(3, 9)
        aus = decompose(np.zeros((9, 1)))
        with pytest.raises(ValueError):
            performance(clf, domain, aus[:1], 3)


class TestBuildBaselines:
    def setup_method(self):
        self.domain = SyntheticDomain()
        self.clf = SumClassifier()
        rng = np.random.default_rng(5)
        self.aus = decompose(rng.uniform(0, 1, size=(9, 1)))

    def test_original_trace_is_rng_independent(self):
        a = build_baselines(self.aus, 0, self.clf, self.domain, np.random.default_rng(1), 4)
        b = build_baselines(self.aus, 0, self.clf, self.domain, np.random.default_rng(99), 4)
        assert np.array_equal(a.original, b.original)

    def test_full_length_traces_converge(self):
        traces = build_baselines(
            self.aus, 0, self.clf, self.domain, np.random.default_rng(3), len(self.aus)
        )
        # same AU set at t = n and the rendering ignores order
        assert traces.original[-1] == pytest.approx(traces.random[-1], abs=1e-12)

    def test_trace_lengths(self):
        traces = build_baselines(self.aus, 0, self.clf, self.domain, np.random.default_rng(0), 3)
        assert traces.original.shape == traces.random.shape == (3,)
        assert len(traces.permutations) == 1

    def test_multiple_random_draws_average(self):
        rng = np.random.default_rng(8)
        multi = build_baselines(self.aus, 0, self.clf, self.domain, rng, 3, num_random=4)
        assert len(multi.permutations) == 4
        singles = []
        rng = np.random.default_rng(8)
        for _ in range(4):
            singles.append(
                build_baselines(self.aus, 0, self.clf, self.domain, rng, 3, num_random=1).random
            )
        np.testing.assert_allclose(multi.random, np.mean(singles, axis=0), atol=1e-12)

    def test_steps_bounds_enforced(self):
        with pytest.raises(ValueError):
            build_baselines(self.aus, 0, self.clf, self.domain, np.random.default_rng(0), 0)
        with pytest.raises(ValueError):
            build_baselines(self.aus, 0, self.clf, self.domain, np.random.default_rng(0), 10)


class TestRewardConfig:
    def test_validation(self):
        RewardConfig(scale=100.0, episodes=10).validate()
        with pytest.raises(ValueError):
            RewardConfig(scale=0.0, episodes=10).validate()
        with pytest.raises(ValueError):
            RewardConfig(scale=1.0, episodes=0).validate()
        with pytest.raises(ValueError):
            RewardConfig(scale=1.0, episodes=1, num_random_baselines=0).validate()
