"""Learning phase for PPO, with A2C expressed as a configuration of it.

``ppo_update`` runs epochs over shuffled minibatches with the clipped
surrogate; ``a2c_update`` is the single full-batch step of plain A2C. Under
``a2c_preset`` the two produce bit-identical parameters.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from typing import NamedTuple

import numpy as np

from . import net
from .advantage import gae, returns_from
from .env import VecEnv
from .net import ParamSet
from .optim import OptimizerState, clip_grad_norm, optimizer_step
from .prng import RngState, next_uniform
from .rollout import RolloutBuffer, RolloutTail, collect  # noqa: F401


@dataclass(frozen=True)
class Hyperparams:
    optimizer_kind: str = "adam"
    lr: float = 3e-4
    anneal_lr: bool = False
    num_envs: int = 4
    num_steps: int = 25
    gamma: float = 0.99
    gae_lambda: float = 0.95
    update_epochs: int = 4
    minibatch_size: int = 25
    normalize_advantage: bool = True
    clip_coef: float = 0.2
    clip_vloss: bool = True
    vf_coef: float = 0.5
    ent_coef: float = 0.0
    max_grad_norm: float = 0.5
    total_iterations: int = 1
    rms_alpha: float = 0.99
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    opt_eps: float = 1e-5

    @property
    def batch_size(self) -> int:
        return self.num_envs * self.num_steps

    def validate(self) -> Hyperparams:
        if self.optimizer_kind not in ("rmsprop", "adam"):
            raise ValueError(f"optimizer_kind must be rmsprop or adam, got {self.optimizer_kind!r}")
        if self.num_envs < 1 or self.num_steps < 1 or self.update_epochs < 1:
            raise ValueError("num_envs, num_steps and update_epochs must be >= 1")
        if self.minibatch_size < 1 or self.batch_size % self.minibatch_size:
            raise ValueError(
                f"minibatch_size {self.minibatch_size} must divide N*M = {self.batch_size}"
            )
        if self.update_epochs > 1 and self.clip_coef <= 0:
            raise ValueError("clip_coef must be positive when update_epochs > 1")
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    def override(self, **changes) -> Hyperparams:
        return replace(self, **changes)


def parse_overrides(text: str) -> dict:
    """Parse flat ``key=value`` lines into typed Hyperparams field overrides."""
    types = {f.name: f.type for f in fields(Hyperparams)}
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (s.strip() for s in line.partition("="))
        if not sep or key not in types:
            raise ValueError(f"line {lineno}: unknown or malformed entry {raw!r}")
        kind = types[key]
        if kind == "bool":
            if value.lower() not in ("1", "0", "true", "false", "on", "off", "yes", "no"):
                raise ValueError(f"line {lineno}: {key} expects a boolean, got {value!r}")
            out[key] = value.lower() in ("1", "true", "on", "yes")
        elif kind == "int":
            out[key] = int(value)
        elif kind == "float":
            out[key] = float(value)
        else:
            out[key] = value
    return out


def a2c_preset() -> Hyperparams:
    """PPO aligned with A2C: RMSprop, lr 7e-4, M=5, lambda=1, one full-batch epoch,
    no advantage normalization, no value clipping."""
    return Hyperparams(
        optimizer_kind="rmsprop",
        lr=7e-4,
        anneal_lr=False,
        num_envs=4,
        num_steps=5,
        gamma=0.99,
        gae_lambda=1.0,
        update_epochs=1,
        minibatch_size=20,
        normalize_advantage=False,
        clip_coef=0.2,
        clip_vloss=False,
        vf_coef=0.5,
        ent_coef=0.0,
        max_grad_norm=0.5,
        rms_alpha=0.99,
        opt_eps=1e-5,
    )


def ppo_preset() -> Hyperparams:
    return Hyperparams()


# --------------------------------------------------------------------------
# loss terms


def normalize_advantages(adv: np.ndarray) -> np.ndarray:
    adv = np.asarray(adv, dtype=np.float64)
    m = adv.shape[0]
    if m < 2:
        raise ValueError("advantage normalization needs at least 2 samples")
    mean = math.fsum(adv.tolist()) / m
    centered = adv - mean
    std = math.sqrt(math.fsum((centered * centered).tolist()) / m)
    return centered / (std + 1e-8)


def policy_objective(logp_new, logp_old, adv, clip_coef: float):
    """Clipped surrogate ``mean(min(r*A, clip(r, 1-eps, 1+eps)*A))``.

    Returns the objective and its gradient w.r.t. ``logp_new``. Exact ties
    route through the unclipped branch.
    """
    logp_new, logp_old, adv = (np.asarray(x, dtype=np.float64) for x in (logp_new, logp_old, adv))
    m = adv.shape[0]
    ratio = np.exp(logp_new - logp_old)
    unclipped = ratio * adv
    clipped_ratio = np.clip(ratio, 1.0 - clip_coef, 1.0 + clip_coef)
    clipped = clipped_ratio * adv
    take_clipped = clipped < unclipped
    objective = math.fsum(np.where(take_clipped, clipped, unclipped).tolist()) / m
    inside = (ratio > 1.0 - clip_coef) & (ratio < 1.0 + clip_coef)
    live = ~take_clipped | inside
    seed = np.where(live, unclipped / m, 0.0)
    return objective, seed


def a2c_policy_objective(logp_new, adv):
    """``mean(logp * A)`` and its gradient ``A / m`` w.r.t. ``logp_new``."""
    logp_new, adv = np.asarray(logp_new, dtype=np.float64), np.asarray(adv, dtype=np.float64)
    m = adv.shape[0]
    return math.fsum((logp_new * adv).tolist()) / m, adv / m


def value_loss(ret, v_new, v_old, clip_vloss: bool, clip_coef: float):
    """Mean squared error, optionally clipped around the rollout-time values."""
    ret, v_new, v_old = (np.asarray(x, dtype=np.float64) for x in (ret, v_new, v_old))
    m = ret.shape[0]
    err = v_new - ret
    sq = err * err
    if not clip_vloss:
        return math.fsum(sq.tolist()) / m, 2.0 * err / m
    v_clipped = v_old + np.clip(v_new - v_old, -clip_coef, clip_coef)
    err_c = v_clipped - ret
    sq_c = err_c * err_c
    take_clipped = sq_c > sq
    loss = math.fsum(np.where(take_clipped, sq_c, sq).tolist()) / m
    # d v_clipped / d v_new is 1 strictly inside the clip range, 0 outside
    delta = v_new - v_old
    passes = (delta > -clip_coef) & (delta < clip_coef)
    seed = np.where(take_clipped, np.where(passes, 2.0 * err_c / m, 0.0), 2.0 * err / m)
    return loss, seed


def total_loss(pg_obj: float, v_loss: float, entropy: float, vf_coef: float, ent_coef: float):
    return -pg_obj + vf_coef * v_loss - ent_coef * entropy


# --------------------------------------------------------------------------
# batches and updates


class FlatBatch(NamedTuple):
    """Time-major flattening: flat index ``t * N + n``."""

    o: np.ndarray
    a: np.ndarray
    logp_old: np.ndarray
    v_old: np.ndarray
    adv: np.ndarray
    ret: np.ndarray

    def take(self, idx) -> FlatBatch:
        return FlatBatch(*(np.ascontiguousarray(x[idx]) for x in self))

    def __len__(self) -> int:
        return self.a.shape[0]


def flatten_batch(buf: RolloutBuffer, adv: np.ndarray, ret: np.ndarray) -> FlatBatch:
    return FlatBatch(
        o=buf.o.reshape(-1, buf.o.shape[-1]).copy(),
        a=buf.a.reshape(-1).copy(),
        logp_old=buf.logp.reshape(-1).copy(),
        v_old=buf.v.reshape(-1).copy(),
        adv=adv.reshape(-1).copy(),
        ret=ret.reshape(-1).copy(),
    )


def shuffled_indices(n: int, rng: RngState) -> np.ndarray:
    """Fisher-Yates permutation driven by uniform draws."""
    idx = np.arange(n)
    for i in range(n - 1, 0, -1):
        j = int(next_uniform(rng) * (i + 1))
        idx[i], idx[j] = idx[j], idx[i]
    return idx


class UpdateStats(NamedTuple):
    policy_loss: float
    value_loss: float
    entropy: float
    loss: float
    grad_norm_clipped: bool = False


def loss_and_grads(params: ParamSet, mb: FlatBatch, hp: Hyperparams, objective: str = "ppo"):
    """Combined loss ``-L_pi + c1*L_V - c2*L_S`` on one minibatch and its gradients.

    ``objective="a2c"`` swaps in the log-probability objective and plain MSE;
    everything downstream of the per-sample seeds is shared.
    """
    m = len(mb)
    pol = net.policy_forward(params, mb.o)
    logp_new = pol.log_probs[np.arange(m), mb.a]
    v_new = net.value_forward(params, mb.o)
    if objective == "ppo":
        adv = normalize_advantages(mb.adv) if hp.normalize_advantage else mb.adv
        pg_obj, seed_logp = policy_objective(logp_new, mb.logp_old, adv, hp.clip_coef)
        v_l, seed_v = value_loss(mb.ret, v_new, mb.v_old, hp.clip_vloss, hp.clip_coef)
    elif objective == "a2c":
        pg_obj, seed_logp = a2c_policy_objective(logp_new, mb.adv)
        v_l, seed_v = value_loss(mb.ret, v_new, mb.v_old, False, hp.clip_coef)
    else:
        raise ValueError(f"objective must be 'ppo' or 'a2c', got {objective!r}")
    ent = math.fsum(pol.entropy.tolist()) / m

    g_logits = net.log_prob_grad(pol.log_probs, mb.a, -seed_logp) + net.entropy_grad(
        pol.log_probs, pol.entropy, np.full(m, -hp.ent_coef / m)
    )
    grads = net.backward(params, mb.o, g_logits, hp.vf_coef * seed_v)
    loss = total_loss(pg_obj, v_l, ent, hp.vf_coef, hp.ent_coef)
    return UpdateStats(-pg_obj, v_l, ent, loss), grads


def _step(params, opt, mb, hp, objective):
    stats, grads = loss_and_grads(params, mb, hp, objective)
    clipped = clip_grad_norm(grads, hp.max_grad_norm)
    params, opt = optimizer_step(opt, params, clipped)
    return params, opt, stats._replace(grad_norm_clipped=clipped is not grads)


def ppo_update(params, opt, batch: FlatBatch, hp: Hyperparams, shuffle_rng: RngState):
    """K epochs over minibatches of size m. Returns params, state, per-step stats."""
    n = len(batch)
    full_batch_once = hp.update_epochs == 1 and hp.minibatch_size == n
    stats = []
    for _ in range(hp.update_epochs):
        # the shuffle stream is untouched when there is nothing to shuffle
        idx = np.arange(n) if full_batch_once else shuffled_indices(n, shuffle_rng)
        for start in range(0, n, hp.minibatch_size):
            mb = batch.take(idx[start : start + hp.minibatch_size])
            params, opt, st = _step(params, opt, mb, hp, "ppo")
            stats.append(st)
    return params, opt, stats


def a2c_update(params, opt, batch: FlatBatch, hp: Hyperparams):
    """One gradient step on the whole batch with the log-probability objective."""
    for name, value, expected in (
        ("update_epochs", hp.update_epochs, 1),
        ("minibatch_size", hp.minibatch_size, len(batch)),
        ("normalize_advantage", hp.normalize_advantage, False),
        ("clip_vloss", hp.clip_vloss, False),
    ):
        if value != expected:
            raise ValueError(f"A2C has no {name} knob; expected {expected!r}, got {value!r}")
    params, opt, st = _step(params, opt, batch, hp, "a2c")
    return params, opt, [st]


# --------------------------------------------------------------------------
# one outer-loop iteration


@dataclass
class Streams:
    action: RngState
    shuffle: RngState


def train_iteration(
    params: ParamSet,
    opt: OptimizerState,
    venv: VecEnv,
    hp: Hyperparams,
    rngs: Streams,
    iteration: int = 0,
    algo: str = "ppo",
):
    """Collect one rollout and learn from it. Returns ``(params, opt, metrics)``."""
    if venv.num_envs != hp.num_envs:
        raise ValueError(f"hyperparameters expect {hp.num_envs} envs, VecEnv has {venv.num_envs}")
    if hp.anneal_lr:
        opt = replace(opt, lr=hp.lr * (1.0 - iteration / hp.total_iterations))

    buf, tail = collect(params, venv, hp.num_steps, rngs.action)
    v_next = net.value_forward(params, tail.o_next)
    adv = gae(buf.r, buf.v, buf.d, v_next, tail.d_next, hp.gamma, hp.gae_lambda)
    ret = returns_from(adv, buf.v)
    batch = flatten_batch(buf, adv, ret)

    if algo == "a2c":
        params, opt, stats = a2c_update(params, opt, batch, hp)
    elif algo == "ppo":
        params, opt, stats = ppo_update(params, opt, batch, hp, rngs.shuffle)
    else:
        raise ValueError(f"algo must be 'a2c' or 'ppo', got {algo!r}")

    finished = venv.drain_finished()
    metrics = {
        "optimizer_steps": len(stats),
        "policy_loss": stats[-1].policy_loss,
        "value_loss": stats[-1].value_loss,
        "entropy": stats[-1].entropy,
        "loss": stats[-1].loss,
        "episode_returns": finished,
    }
    return params, opt, metrics


__all__ = [
    "Hyperparams",
    "FlatBatch",
    "RolloutBuffer",
    "RolloutTail",
    "Streams",
    "a2c_preset",
    "ppo_preset",
    "parse_overrides",
    "normalize_advantages",
    "policy_objective",
    "a2c_policy_objective",
    "value_loss",
    "total_loss",
    "loss_and_grads",
    "flatten_batch",
    "shuffled_indices",
    "ppo_update",
    "a2c_update",
    "train_iteration",
]
