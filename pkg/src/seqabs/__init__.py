"""Goal-driven abstraction of sequential data.

A policy-gradient agent picks atomic units from an input sequence, under a
budget, to maximize a frozen goal classifier's recognition of the target
label.  Training uses an annealed comparative reward against original-order
and random-order references.
"""

from .autodiff import (
    Tape,
    ascent_step,
    fc_forward,
    gru_step_forward,
    log_softmax,
    softmax,
)
from .data import Dataset, LabeledSequence, load_sequences, save_sequences
from .episode import (
    ORDER_ORIGINAL,
    ORDER_PICKED,
    AtomicUnit,
    EpisodeState,
    apply_action,
    decompose,
    final_output,
    initial_state,
    is_done,
    timestamp_bucket,
)
from .errors import ConfigError, DataFormatError, TrainingDiverged
from .policy import (
    MODE_EVAL,
    MODE_TRAIN,
    ActionDistribution,
    PolicyConfig,
    PolicyParams,
    embed_candidate,
    embed_category,
    embed_chosen,
    score_actions,
    select_action,
)
from .reward import (
    BaselineTraces,
    GoalClassifier,
    RewardConfig,
    build_baselines,
    delta_at,
    performance,
    reward_value,
)
from .trainer import (
    EpisodeMetric,
    TrainerConfig,
    TrainResult,
    Trajectory,
    discounted_returns,
    evaluate,
    greedy_abstract,
    policy_gradient,
    run_play,
    selection_metrics,
    train,
)

__version__ = "0.1.0"
