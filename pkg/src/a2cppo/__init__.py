"""PPO and A2C on one code path, with a harness showing they coincide."""
from .harness import (
    EquivalenceReport,
    check_equivalence,
    compare_checkpoints,
    gradient_identity_check,
    run_training,
)
from .learner import Hyperparams, a2c_preset, ppo_preset

__version__ = "0.1.0"

__all__ = [
    "EquivalenceReport",
    "Hyperparams",
    "a2c_preset",
    "ppo_preset",
    "check_equivalence",
    "compare_checkpoints",
    "gradient_identity_check",
    "run_training",
]
