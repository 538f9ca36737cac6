"""Differentially private linear contextual bandits.

A binary-counter Laplace mechanism with a decaying sensitivity schedule
privatizes the model estimate of a LinUCB learner; baselines and a
benchmark harness with a CLI come along.
"""

__version__ = "0.1.0"

from .errors import ConfigError, DataError, InputError, NumericalError
from .ridge import ConfidenceParams, RidgeState, alpha, tree_levels
from .privacy import (PrivacyParams, SensitivitySchedule, TreeMechanism,
                      lambda_prime, laplace, utility_bound, vector_noise)
from .policies import (Arm, ConstantPrivateLinUcbPolicy, DgsLinUcbPolicy,
                       LinUcbPolicy, PolicyKind, RandomPolicy, pseudo_regret)
from .envs import (NoiseTape, PerturbationConfig, PerturbedEnv, ReplayEnv,
                   ReplayEnvConfig, SyntheticEnv, SyntheticEnvConfig,
                   estimate_lambda0, fixed_noise_tape, generate_fixture)
from .experiments import (ExperimentConfig, child_seed, run_arm_change,
                          run_eps_sweep, run_experiment, run_param_error,
                          run_regret, run_replay_reward, simulate)

__all__ = [
    "Arm", "ConfidenceParams", "ConfigError", "ConstantPrivateLinUcbPolicy",
    "DataError", "DgsLinUcbPolicy", "ExperimentConfig", "InputError",
    "LinUcbPolicy", "NoiseTape", "NumericalError", "PerturbationConfig",
    "PerturbedEnv", "PolicyKind", "PrivacyParams", "RandomPolicy",
    "ReplayEnv", "ReplayEnvConfig", "RidgeState", "SensitivitySchedule",
    "SyntheticEnv", "SyntheticEnvConfig", "TreeMechanism", "alpha",
    "child_seed", "estimate_lambda0", "fixed_noise_tape", "generate_fixture",
    "lambda_prime", "laplace", "pseudo_regret", "run_arm_change",
    "run_eps_sweep", "run_experiment", "run_param_error", "run_regret",
    "run_replay_reward", "simulate", "tree_levels", "utility_bound",
    "vector_noise",
]
