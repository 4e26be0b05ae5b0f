"""Training driver, the A2C/PPO equivalence experiment and gradient checks."""
from __future__ import annotations

import math
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from . import checkpoint, net
from .env import make_vec_env
from .learner import (
    Hyperparams,
    Streams,
    a2c_policy_objective,
    a2c_preset,
    policy_objective,
    ppo_preset,
    train_iteration,
)
from .net import Layout, ParamSet, init_params
from .optim import make_optimizer
from .prng import (
    PARAM_INIT_STREAM,
    action_stream,
    next_uniform,
    seed_stream,
    shuffle_stream,
)

METRICS_HEADER = "iteration,env_steps,mean_episodic_return,policy_loss,value_loss,entropy"

# One perturbation per alignment step; each is applied to the PPO side only.
NEGATIVE_CONTROLS: dict[str, dict] = {
    "optimizer_adam": {"optimizer_kind": "adam"},
    "lr_3e-4": {"lr": 3e-4},
    "num_steps_128": {"num_steps": 128, "minibatch_size": 512},
    "gae_lambda_0.95": {"gae_lambda": 0.95},
    "epochs_4_minibatches_4": {"update_epochs": 4, "minibatch_size": 5, "clip_coef": 0.2},
    "normalize_advantage": {"normalize_advantage": True},
    "clip_vloss": {"clip_vloss": True},
}


@dataclass
class TrainResult:
    params: ParamSet
    metrics: list[dict]
    hp: Hyperparams
    env_steps: int


def make_optimizer_for(hp: Hyperparams, params: ParamSet):
    if hp.optimizer_kind == "rmsprop":
        return make_optimizer("rmsprop", params, hp.lr, alpha=hp.rms_alpha, eps=hp.opt_eps)
    return make_optimizer(
        "adam", params, hp.lr, beta1=hp.adam_beta1, beta2=hp.adam_beta2, eps=hp.opt_eps
    )


def run_training(
    hp: Hyperparams,
    seed: int,
    total_env_steps: int,
    algo: str = "ppo",
    layout: Layout = Layout(),
    out: str | os.PathLike | None = None,
    log: str | os.PathLike | None = None,
) -> TrainResult:
    per_iter = hp.batch_size
    if total_env_steps <= 0 or total_env_steps % per_iter:
        raise ValueError(
            f"total_env_steps={total_env_steps} must be a positive multiple of "
            f"num_envs*num_steps={per_iter}"
        )
    iterations = total_env_steps // per_iter
    hp = hp.override(total_iterations=iterations).validate()

    params = init_params(seed_stream(seed, PARAM_INIT_STREAM), layout)
    opt = make_optimizer_for(hp, params)
    venv = make_vec_env(hp.num_envs, seed)
    rngs = Streams(
        action=seed_stream(seed, action_stream(hp.num_envs)),
        shuffle=seed_stream(seed, shuffle_stream(hp.num_envs)),
    )
    records = []
    for i in range(iterations):
        params, opt, m = train_iteration(params, opt, venv, hp, rngs, iteration=i, algo=algo)
        rets = m.pop("episode_returns")
        m.update(
            iteration=i,
            env_steps=(i + 1) * per_iter,
            mean_episodic_return=math.fsum(rets) / len(rets) if rets else math.nan,
            episodes_finished=len(rets),
        )
        records.append(m)

    if out is not None:
        checkpoint.save(out, params)
    if log is not None:
        write_metrics_log(log, records)
    return TrainResult(params, records, hp, iterations * per_iter)


def write_metrics_log(path, records) -> None:
    with open(path, "w") as f:
        f.write(METRICS_HEADER + "\n")
        for r in records:
            f.write(
                f"{r['iteration']},{r['env_steps']},{r['mean_episodic_return']!r},"
                f"{r['policy_loss']!r},{r['value_loss']!r},{r['entropy']!r}\n"
            )


def evaluate_returns(params: ParamSet, seed: int, episodes: int, num_envs: int = 4) -> list[float]:
    """Episodic returns of a frozen policy, sampled on its own env/action streams."""
    from .rollout import collect

    venv = make_vec_env(num_envs, seed)
    rng = seed_stream(seed, action_stream(num_envs))
    returns: list[float] = []
    while len(returns) < episodes:
        collect(params, venv, 100, rng)
        returns += venv.drain_finished()
    return returns[:episodes]


# --------------------------------------------------------------------------


@dataclass
class EquivalenceReport:
    seed: int | None
    total_env_steps: int | None
    bitwise_equal: bool
    max_abs_param_diff: float
    per_tensor_diffs: list[tuple[str, float]] = field(default_factory=list)
    config_a: dict | None = None
    config_b: dict | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["per_tensor_diffs"] = [[n, v] for n, v in self.per_tensor_diffs]
        return d


def compare_params(a: ParamSet, b: ParamSet) -> tuple[bool, float, list[tuple[str, float]]]:
    if list(a) != list(b):
        raise checkpoint.ShapeMismatchError(f"tensor names differ: {list(a)} vs {list(b)}")
    diffs = []
    equal = True
    for name in a:
        x, y = a[name], b[name]
        if x.shape != y.shape:
            raise checkpoint.ShapeMismatchError(f"{name}: shape {x.shape} vs {y.shape}")
        # compare bit patterns so that -0.0 vs 0.0 or differing NaNs count as different
        equal &= x.astype("<f8").tobytes() == y.astype("<f8").tobytes()
        diffs.append((name, float(np.max(np.abs(x - y))) if x.size else 0.0))
    return equal, max((d for _, d in diffs), default=0.0), diffs


def compare_checkpoints(path_a, path_b) -> EquivalenceReport:
    equal, max_diff, diffs = compare_params(checkpoint.load(path_a), checkpoint.load(path_b))
    return EquivalenceReport(None, None, equal, max_diff, diffs)


def check_equivalence(
    seed: int, total_env_steps: int, overrides: dict | None = None
) -> EquivalenceReport:
    """Train plain A2C and A2C-aligned PPO from one seed and compare their weights.

    ``overrides`` perturbs the PPO config only (negative controls). If a
    perturbation makes ``N*M`` stop dividing the budget, the PPO run uses the
    largest multiple below it.
    """
    hp_a = a2c_preset()
    hp_b = a2c_preset().override(**(overrides or {}))
    steps_b = total_env_steps - total_env_steps % hp_b.batch_size
    a = run_training(hp_a, seed, total_env_steps, algo="a2c")
    b = run_training(hp_b, seed, steps_b, algo="ppo")
    equal, max_diff, diffs = compare_params(a.params, b.params)
    cfg_a = dict(a.hp.to_dict(), algo="a2c", env_steps=a.env_steps)
    cfg_b = dict(b.hp.to_dict(), algo="ppo", env_steps=b.env_steps)
    return EquivalenceReport(seed, total_env_steps, equal, max_diff, diffs, cfg_a, cfg_b)


def run_negative_controls(seed: int, total_env_steps: int) -> dict[str, EquivalenceReport]:
    return {
        name: check_equivalence(seed, total_env_steps, ov)
        for name, ov in NEGATIVE_CONTROLS.items()
    }


# --------------------------------------------------------------------------


def _uniform_array(rng, shape, low, high) -> np.ndarray:
    out = np.empty(shape)
    flat = out.reshape(-1)
    for k in range(flat.size):
        flat[k] = low + (high - low) * next_uniform(rng)
    return out


def _policy_grads(params, obs, actions, pol, seed_logp) -> ParamSet:
    g_logits = net.log_prob_grad(pol.log_probs, actions, seed_logp)
    return net.backward(params, obs, g_logits, None)


def gradient_identity_check(
    seed: int,
    trials: int,
    batch_size: int = 32,
    layout: Layout = Layout(),
    logp_offset: float = 0.0,
) -> dict:
    """Compare parameter gradients of the clipped surrogate and the A2C objective.

    Each trial draws fresh parameters and a synthetic on-policy batch: the
    stored log-probabilities come from the same forward pass the objective
    uses. ``logp_offset`` shifts the stored values to emulate off-policy data.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    max_diff = 0.0
    per_trial = []
    for trial in range(trials):
        rng = seed_stream(seed, 1_000_000 + trial)
        params = init_params(rng, layout)
        # nonzero biases so the check is not limited to a special init
        for k in params:
            if k.endswith(".bias"):
                params[k] = _uniform_array(rng, params[k].shape, -0.5, 0.5)
        obs = _uniform_array(rng, (batch_size, layout.obs_dim), -2.0, 2.0)
        adv = _uniform_array(rng, (batch_size,), -3.0, 3.0)
        pol = net.policy_forward(params, obs)
        actions = np.array([net.sample_action(lp, rng) for lp in pol.log_probs])
        logp = pol.log_probs[np.arange(batch_size), actions]
        logp_old = logp + logp_offset

        _, seed_ppo = policy_objective(logp, logp_old, adv, clip_coef=0.2)
        _, seed_a2c = a2c_policy_objective(logp, adv)
        g_ppo = _policy_grads(params, obs, actions, pol, seed_ppo)
        g_a2c = _policy_grads(params, obs, actions, pol, seed_a2c)
        diff = max(float(np.max(np.abs(g_ppo[k] - g_a2c[k]))) for k in params)
        per_trial.append(diff)
        max_diff = max(max_diff, diff)
    return {
        "seed": seed,
        "trials": trials,
        "max_abs_grad_diff": max_diff,
        "bitwise_equal": max_diff == 0.0,
        "per_trial_max_abs_diff": per_trial,
    }


__all__ = [
    "EquivalenceReport",
    "NEGATIVE_CONTROLS",
    "TrainResult",
    "a2c_preset",
    "ppo_preset",
    "check_equivalence",
    "compare_checkpoints",
    "compare_params",
    "evaluate_returns",
    "gradient_identity_check",
    "run_negative_controls",
    "run_training",
    "write_metrics_log",
]
