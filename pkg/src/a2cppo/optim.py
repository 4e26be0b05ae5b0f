"""RMSprop and Adam over ParamSets, plus global gradient-norm clipping."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .net import ParamSet


def global_norm(grads: ParamSet) -> float:
    # fsum is correctly rounded, hence independent of summation order
    squares = np.concatenate([(g * g).reshape(-1) for g in grads.values()])
    return math.sqrt(math.fsum(squares.tolist()))


def clip_grad_norm(grads: ParamSet, max_norm: float) -> ParamSet:
    """Scale all gradients jointly so their global L2 norm is at most ``max_norm``.

    Gradients already within the limit are returned untouched.
    """
    norm = global_norm(grads)
    if norm <= max_norm or norm == 0.0:
        return grads
    scale = max_norm / norm
    return {k: g * scale for k, g in grads.items()}


@dataclass
class OptimizerState:
    kind: str
    lr: float
    alpha: float = 0.99  # rmsprop square-average decay
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-5
    square_avg: ParamSet = field(default_factory=dict)
    m: ParamSet = field(default_factory=dict)
    v: ParamSet = field(default_factory=dict)
    step_count: int = 0


def make_optimizer(kind: str, params: ParamSet, lr: float, **hyper) -> OptimizerState:
    zeros = lambda: {k: np.zeros_like(p) for k, p in params.items()}  # noqa: E731
    if kind == "rmsprop":
        return OptimizerState(kind, lr, square_avg=zeros(), **hyper)
    if kind == "adam":
        return OptimizerState(kind, lr, m=zeros(), v=zeros(), **hyper)
    raise ValueError(f"unknown optimizer kind {kind!r}")


def rmsprop_step(state: OptimizerState, params: ParamSet, grads: ParamSet):
    """``s <- a*s + (1-a)*g^2``, ``p <- p - lr*g/(sqrt(s) + eps)``."""
    if state.kind != "rmsprop":
        raise ValueError(f"rmsprop_step needs an rmsprop state, got {state.kind!r}")
    a = state.alpha
    new_params, new_sq = {}, {}
    for k, p in params.items():
        g = grads[k]
        s = a * state.square_avg[k] + (1.0 - a) * (g * g)
        new_sq[k] = s
        new_params[k] = p - state.lr * g / (np.sqrt(s) + state.eps)
    return new_params, replace(state, square_avg=new_sq, step_count=state.step_count + 1)


def adam_step(state: OptimizerState, params: ParamSet, grads: ParamSet):
    if state.kind != "adam":
        raise ValueError(f"adam_step needs an adam state, got {state.kind!r}")
    b1, b2 = state.beta1, state.beta2
    t = state.step_count + 1
    bc1 = 1.0 - b1**t
    bc2 = 1.0 - b2**t
    new_params, new_m, new_v = {}, {}, {}
    for k, p in params.items():
        g = grads[k]
        m = b1 * state.m[k] + (1.0 - b1) * g
        v = b2 * state.v[k] + (1.0 - b2) * (g * g)
        new_m[k], new_v[k] = m, v
        new_params[k] = p - state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
    return new_params, replace(state, m=new_m, v=new_v, step_count=t)


def optimizer_step(state: OptimizerState, params: ParamSet, grads: ParamSet):
    if state.kind == "rmsprop":
        return rmsprop_step(state, params, grads)
    return adam_step(state, params, grads)
