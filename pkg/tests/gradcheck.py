"""Finite-difference gradient checking for the policy network.

Central differences at step 1e-5 against the recorded-tape gradients of the
selected action's log-probability, over randomized network configurations.
"""

import numpy as np

from seqabs.autodiff import log_softmax
from seqabs.episode import decompose
from seqabs.policy import PolicyConfig, PolicyParams, score_step

FD_STEP = 1e-5
REL_TOL = 1e-3
ABS_FLOOR = 1e-7  # rescues entries below the finite-difference noise floor


def random_policy_setup(seed):
    """Random small network, pool, chosen list, category, and action."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 424242]))
    config = PolicyConfig(
        feature_dim=int(rng.integers(1, 5)),
        num_categories=int(rng.integers(1, 4)),
        hidden_size=int(rng.integers(2, 9)),
        candidate_dim=int(rng.integers(2, 7)),
        chosen_dim=int(rng.integers(2, 7)),
        category_dim=int(rng.integers(1, 4)),
        joint_dim=int(rng.integers(2, 7)),
    )
    params = PolicyParams.initialize(config, rng)
    # widen params beyond the init range so every path carries signal
    arrays = {k: v + rng.uniform(-0.4, 0.4, size=v.shape) for k, v in params.arrays.items()}
    params = PolicyParams(config, arrays)
    n_total = int(rng.integers(2, 10))
    aus = decompose(rng.uniform(-1, 1, size=(n_total, config.feature_dim)))
    n_chosen = int(rng.integers(0, min(4, n_total)))
    chosen, candidates = aus[:n_chosen], aus[n_chosen:]
    category = int(rng.integers(config.num_categories))
    action = int(rng.integers(len(candidates)))
    return params, candidates, chosen, category, action


def log_prob_value(config, arrays, candidates, chosen, category, action):
    params = PolicyParams(config, arrays)
    scores = score_step(params, candidates, chosen, category, record=False)
    return float(log_softmax(scores.dist.logits)[action])


def max_relative_error(params, candidates, chosen, category, action):
    """Worst |analytic - fd| / max(|fd|, floor) over every parameter entry."""
    scores = score_step(params, candidates, chosen, category, record=True)
    analytic = scores.log_prob_gradients(action)
    config = params.config
    worst = 0.0
    for name, arr in params.arrays.items():
        flat = arr.ravel()
        for i in range(flat.size):
            plus = {k: (v.copy() if k == name else v) for k, v in params.arrays.items()}
            minus = {k: (v.copy() if k == name else v) for k, v in params.arrays.items()}
            plus[name].ravel()[i] += FD_STEP
            minus[name].ravel()[i] -= FD_STEP
            fd = (
                log_prob_value(config, plus, candidates, chosen, category, action)
                - log_prob_value(config, minus, candidates, chosen, category, action)
            ) / (2 * FD_STEP)
            err = abs(analytic[name].ravel()[i] - fd) / max(abs(fd), ABS_FLOOR)
            worst = max(worst, err)
    return worst


def run_gradcheck(seed):
    """True when every parameter gradient is within tolerance for this setup."""
    setup = random_policy_setup(seed)
    return max_relative_error(*setup) <= REL_TOL
