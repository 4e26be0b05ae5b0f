"""Rollout phase: run the current policy for M steps on every environment."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .env import OBS_DIM, VecEnv, vec_step
from .net import ParamSet, policy_forward, sample_action, value_forward
from .prng import RngState


@dataclass
class RolloutBuffer:
    """Arrays indexed ``[t, n]``; ``d[t]`` is the done flag cached at step entry."""

    o: np.ndarray
    a: np.ndarray
    logp: np.ndarray
    r: np.ndarray
    d: np.ndarray
    v: np.ndarray

    @classmethod
    def empty(cls, num_steps: int, num_envs: int) -> RolloutBuffer:
        shape = (num_steps, num_envs)
        return cls(
            o=np.zeros(shape + (OBS_DIM,)),
            a=np.zeros(shape, dtype=np.int64),
            logp=np.zeros(shape),
            r=np.zeros(shape),
            d=np.zeros(shape),
            v=np.zeros(shape),
        )

    @property
    def num_steps(self) -> int:
        return self.r.shape[0]


@dataclass
class RolloutTail:
    o_next: np.ndarray
    d_next: np.ndarray


def collect(
    params: ParamSet, venv: VecEnv, num_steps: int, action_rng: RngState
) -> tuple[RolloutBuffer, RolloutTail]:
    if num_steps < 1:
        raise ValueError("num_steps must be >= 1")
    n = venv.num_envs
    buf = RolloutBuffer.empty(num_steps, n)
    for t in range(num_steps):
        o_t = venv.obs.copy()
        d_t = venv.dones.copy()
        pol = policy_forward(params, o_t)
        v_t = value_forward(params, o_t)
        actions = np.array([sample_action(pol.log_probs[i], action_rng) for i in range(n)])
        _, rewards, _ = vec_step(venv, actions)
        buf.o[t] = o_t
        buf.d[t] = d_t
        buf.v[t] = v_t
        buf.a[t] = actions
        buf.logp[t] = pol.log_probs[np.arange(n), actions]
        buf.r[t] = rewards
    return buf, RolloutTail(venv.obs.copy(), venv.dones.copy())
