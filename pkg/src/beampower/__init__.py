"""Joint beamwidth selection and transmit-power allocation for multi-pair
mmWave networks: stochastic channel simulator, slot physics, a one-step
Q-learning optimizer trained offline, reference baselines, and a batch
experiment runner.
"""

__version__ = "0.1.0"

from .actions import ActionGrid, build_grid, decode, encode, joint_decision
from .agent import (ReplayBuffer, TrainConfig, act, adapt_state, encode_state,
                    select_action, train)
from .baselines import (SearchBudgetExceeded, exhaustive_search, random_policy,
                        underestimate_interference)
from .channel import (ChannelParams, NetworkRealization, ScenarioConfig,
                      blockage_prob, pathloss, sample_fading, sample_realization,
                      trial_rng)
from .config import ConfigError, ExperimentConfig, load_experiment
from .evaluate import EvalReport, evaluate_policies, grid_from_model, run_sweep
from .mlp import (AdamState, MlpModel, forward, init_model, load_model,
                  save_model, train_step)
from .radio import (Decision, InfeasibleDecisionError, RadioParams,
                    alignment_time, antenna_gain, boresight_angles,
                    effective_sum_rate, feasible, main_lobe_gain, sinr)

__all__ = [
    "ActionGrid", "AdamState", "ChannelParams", "ConfigError", "Decision",
    "EvalReport", "ExperimentConfig", "InfeasibleDecisionError", "MlpModel",
    "NetworkRealization", "RadioParams", "ReplayBuffer", "ScenarioConfig",
    "SearchBudgetExceeded", "TrainConfig", "act", "adapt_state",
    "alignment_time", "antenna_gain", "blockage_prob", "boresight_angles",
    "build_grid", "decode", "effective_sum_rate", "encode", "encode_state",
    "evaluate_policies", "exhaustive_search", "feasible", "forward",
    "grid_from_model", "init_model", "joint_decision", "load_experiment",
    "load_model", "main_lobe_gain", "pathloss", "random_policy",
    "run_sweep", "sample_fading", "sample_realization", "save_model",
    "select_action", "sinr", "train", "train_step", "trial_rng",
    "underestimate_interference",
]
