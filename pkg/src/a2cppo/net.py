"""Separate policy and value MLPs with hand-written reverse-mode gradients.

Parameters live in a plain ``dict`` whose insertion order is the canonical
order: policy layers first, then value layers, each as weight then bias from
input to output. Weights are stored ``(fan_in, fan_out)``.

All matrix products are accumulated one input unit (or one batch row) at a
time with elementwise numpy ops. This keeps every output row's arithmetic
independent of the batch size, so a log-probability computed for a batch of
4 during the rollout is bit-identical to the one recomputed for a batch of 20
during the update.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .env import NUM_ACTIONS, OBS_DIM
from .prng import RngState, next_uniform

ParamSet = dict  # name -> float64 ndarray, canonical insertion order


@dataclass(frozen=True)
class Layout:
    obs_dim: int = OBS_DIM
    hidden: tuple[int, ...] = (64, 64)
    num_actions: int = NUM_ACTIONS

    def layer_shapes(self, head: str) -> list[tuple[int, int]]:
        out_dim = self.num_actions if head == "pi" else 1
        dims = (self.obs_dim, *self.hidden, out_dim)
        return list(zip(dims[:-1], dims[1:]))


class PolicyOutput(NamedTuple):
    logits: np.ndarray
    log_probs: np.ndarray
    entropy: np.ndarray


def param_names(layout: Layout) -> list[str]:
    names = []
    for head in ("pi", "v"):
        for i in range(len(layout.layer_shapes(head))):
            names += [f"{head}.{i}.weight", f"{head}.{i}.bias"]
    return names


def init_params(rng: RngState, layout: Layout = Layout()) -> ParamSet:
    """Uniform(-sqrt(1/fan_in), +sqrt(1/fan_in)) weights, zero biases.

    Weights are drawn row-major in canonical order; biases consume no draws.
    """
    params: ParamSet = {}
    for head in ("pi", "v"):
        for i, (fan_in, fan_out) in enumerate(layout.layer_shapes(head)):
            bound = math.sqrt(1.0 / fan_in)
            w = np.empty((fan_in, fan_out))
            flat = w.reshape(-1)
            for k in range(flat.size):
                flat[k] = -bound + 2.0 * bound * next_uniform(rng)
            params[f"{head}.{i}.weight"] = w
            params[f"{head}.{i}.bias"] = np.zeros(fan_out)
    return params


def zeros_like(params: ParamSet) -> ParamSet:
    return {k: np.zeros_like(v) for k, v in params.items()}


def flatten(params: ParamSet) -> np.ndarray:
    return np.concatenate([v.reshape(-1) for v in params.values()])


def _num_layers(params: ParamSet, head: str) -> int:
    return sum(1 for k in params if k.startswith(head + ".") and k.endswith(".weight"))


def _dense(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    acc = x[:, 0:1] * w[0]
    for k in range(1, w.shape[0]):
        acc = acc + x[:, k : k + 1] * w[k]
    return acc + b


def _check_obs(obs: np.ndarray) -> np.ndarray:
    obs = np.ascontiguousarray(obs, dtype=np.float64)
    if obs.ndim != 2:
        raise ValueError(f"observations must be 2-D (batch, features), got {obs.shape}")
    if not np.all(np.isfinite(obs)):
        raise ValueError("observations must be finite")
    return obs


def _mlp(params: ParamSet, head: str, obs: np.ndarray) -> list[np.ndarray]:
    """Returns the list of layer inputs followed by the linear output."""
    acts = [obs]
    n = _num_layers(params, head)
    h = obs
    for i in range(n):
        z = _dense(h, params[f"{head}.{i}.weight"], params[f"{head}.{i}.bias"])
        h = np.tanh(z) if i < n - 1 else z
        acts.append(h)
    return acts


def log_softmax(logits: np.ndarray) -> np.ndarray:
    m = logits[:, 0].copy()
    for j in range(1, logits.shape[1]):
        m = np.maximum(m, logits[:, j])
    shifted = logits - m[:, None]
    s = np.exp(shifted[:, 0])
    for j in range(1, logits.shape[1]):
        s = s + np.exp(shifted[:, j])
    return shifted - np.log(s)[:, None]


def entropy_from_log_probs(log_probs: np.ndarray) -> np.ndarray:
    p = np.exp(log_probs)
    terms = np.where(p > 0.0, p * log_probs, 0.0)
    h = -terms[:, 0]
    for j in range(1, terms.shape[1]):
        h = h - terms[:, j]
    return h


def policy_forward(params: ParamSet, obs: np.ndarray) -> PolicyOutput:
    obs = _check_obs(obs)
    logits = _mlp(params, "pi", obs)[-1]
    log_probs = log_softmax(logits)
    return PolicyOutput(logits, log_probs, entropy_from_log_probs(log_probs))


def value_forward(params: ParamSet, obs: np.ndarray) -> np.ndarray:
    obs = _check_obs(obs)
    return _mlp(params, "v", obs)[-1][:, 0]


def sample_action(log_probs: np.ndarray, rng: RngState) -> int:
    """Inverse-CDF draw: smallest index whose running probability exceeds u."""
    u = next_uniform(rng)
    cdf = 0.0
    last = len(log_probs) - 1
    for i, lp in enumerate(log_probs):
        cdf += math.exp(lp)
        if cdf > u:
            return i
    # cdf can round to just under 1.0; fall back to the last action with mass
    while last > 0 and math.exp(log_probs[last]) == 0.0:
        last -= 1
    return last


def _mlp_backward(params, head, acts, grad_out, grads):
    g = grad_out
    n = _num_layers(params, head)
    for i in reversed(range(n)):
        w = params[f"{head}.{i}.weight"]
        x = acts[i]
        gw = x[0][:, None] * g[0][None, :]
        gb = g[0].copy()
        for r in range(1, x.shape[0]):
            gw = gw + x[r][:, None] * g[r][None, :]
            gb = gb + g[r]
        grads[f"{head}.{i}.weight"] = gw
        grads[f"{head}.{i}.bias"] = gb
        if i > 0:
            gx = g[:, 0:1] * w[:, 0]
            for j in range(1, w.shape[1]):
                gx = gx + g[:, j : j + 1] * w[:, j]
            # acts[i] = tanh(z) for hidden layers
            g = gx * (1.0 - acts[i] * acts[i])


def backward(
    params: ParamSet,
    obs: np.ndarray,
    grad_logits: np.ndarray | None = None,
    grad_values: np.ndarray | None = None,
) -> ParamSet:
    """Gradients of a scalar loss given its derivatives w.r.t. logits and values.

    ``grad_logits`` has shape ``(B, A)``, ``grad_values`` shape ``(B,)``. A
    missing seed is treated as zero. Batch rows are accumulated in order.
    """
    obs = _check_obs(obs)
    grads: ParamSet = {}
    b = obs.shape[0]
    if grad_logits is None:
        grad_logits = np.zeros((b, _head_width(params, "pi")))
    if grad_values is None:
        grad_values = np.zeros(b)
    _mlp_backward(params, "pi", _mlp(params, "pi", obs), np.asarray(grad_logits, float), grads)
    _mlp_backward(
        params, "v", _mlp(params, "v", obs), np.asarray(grad_values, float)[:, None], grads
    )
    return {k: grads[k] for k in params}


def _head_width(params: ParamSet, head: str) -> int:
    return params[f"{head}.{_num_layers(params, head) - 1}.bias"].shape[0]


def log_prob_grad(log_probs: np.ndarray, actions: np.ndarray, seed: np.ndarray) -> np.ndarray:
    """Chain ``dL/dlogp[a]`` through log-softmax to ``dL/dlogits``."""
    p = np.exp(log_probs)
    onehot = np.zeros_like(p)
    onehot[np.arange(len(actions)), actions] = 1.0
    return seed[:, None] * (onehot - p)


def entropy_grad(log_probs: np.ndarray, entropy: np.ndarray, seed: np.ndarray) -> np.ndarray:
    """Chain ``dL/dH`` through the entropy to ``dL/dlogits``."""
    p = np.exp(log_probs)
    return seed[:, None] * (-p * (log_probs + entropy[:, None]))
