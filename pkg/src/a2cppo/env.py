"""Deterministic cart-pole simulator and a sequential vectorized wrapper."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .prng import RngState, env_stream, next_uniform, seed_stream

GRAVITY = 9.8
MASS_CART = 1.0
MASS_POLE = 0.1
TOTAL_MASS = MASS_CART + MASS_POLE
HALF_LENGTH = 0.5
POLEMASS_LENGTH = MASS_POLE * HALF_LENGTH
FORCE_MAG = 10.0
TAU = 0.02

X_THRESHOLD = 2.4
THETA_THRESHOLD = 12 * 2 * math.pi / 360
MAX_EPISODE_STEPS = 500
RESET_BOUND = 0.05

OBS_DIM = 4
NUM_ACTIONS = 2


@dataclass
class EnvState:
    x: float = 0.0
    x_dot: float = 0.0
    theta: float = 0.0
    theta_dot: float = 0.0
    steps_taken: int = 0
    terminated: bool = False

    def observation(self) -> np.ndarray:
        return np.array([self.x, self.x_dot, self.theta, self.theta_dot], dtype=np.float64)


def reset_one(state: EnvState, rng: RngState) -> np.ndarray:
    """Draw each physical component uniformly from [-0.05, 0.05)."""
    x, x_dot, theta, theta_dot = (
        -RESET_BOUND + 2 * RESET_BOUND * next_uniform(rng) for _ in range(4)
    )
    state.x, state.x_dot, state.theta, state.theta_dot = x, x_dot, theta, theta_dot
    state.steps_taken = 0
    state.terminated = False
    return state.observation()


def step_one(state: EnvState, action: int) -> tuple[np.ndarray, float, int]:
    if action not in (0, 1):
        raise ValueError(f"action must be 0 or 1, got {action!r}")
    if state.terminated:
        raise RuntimeError("step_one called on a terminated episode; reset first")

    force = FORCE_MAG if action == 1 else -FORCE_MAG
    costheta = math.cos(state.theta)
    sintheta = math.sin(state.theta)
    temp = (force + POLEMASS_LENGTH * state.theta_dot**2 * sintheta) / TOTAL_MASS
    thetaacc = (GRAVITY * sintheta - costheta * temp) / (
        HALF_LENGTH * (4.0 / 3.0 - MASS_POLE * costheta**2 / TOTAL_MASS)
    )
    xacc = temp - POLEMASS_LENGTH * thetaacc * costheta / TOTAL_MASS

    # semi-implicit Euler: positions use the updated velocities
    state.x_dot = state.x_dot + TAU * xacc
    state.x = state.x + TAU * state.x_dot
    state.theta_dot = state.theta_dot + TAU * thetaacc
    state.theta = state.theta + TAU * state.theta_dot
    state.steps_taken += 1

    done = (
        abs(state.x) > X_THRESHOLD
        or abs(state.theta) > THETA_THRESHOLD
        or state.steps_taken >= MAX_EPISODE_STEPS
    )
    state.terminated = done
    return state.observation(), 1.0, int(done)


@dataclass
class VecEnv:
    """N cart-poles stepped in index order, with auto-reset on termination.

    ``obs`` and ``dones`` hold the most recently emitted observation and done
    flags, i.e. the ``o_next`` / ``d_next`` pair carried between iterations.
    Finished episode returns accumulate in ``finished_returns`` until drained.
    """

    envs: list[EnvState]
    rngs: list[RngState]
    obs: np.ndarray = field(init=False)
    dones: np.ndarray = field(init=False)
    episode_returns: np.ndarray = field(init=False)
    finished_returns: list[float] = field(default_factory=list)

    def __post_init__(self):
        if len(self.envs) != len(self.rngs):
            raise ValueError("one RNG stream per environment is required")
        n = len(self.envs)
        self.obs = np.zeros((n, OBS_DIM))
        self.dones = np.zeros(n)
        self.episode_returns = np.zeros(n)

    @property
    def num_envs(self) -> int:
        return len(self.envs)

    def drain_finished(self) -> list[float]:
        out, self.finished_returns = self.finished_returns, []
        return out


def make_vec_env(num_envs: int, seed: int) -> VecEnv:
    """Build and reset N environments; env ``i`` draws from stream ``i + 1``."""
    if num_envs < 1:
        raise ValueError("num_envs must be >= 1")
    venv = VecEnv(
        envs=[EnvState() for _ in range(num_envs)],
        rngs=[seed_stream(seed, env_stream(i)) for i in range(num_envs)],
    )
    vec_reset(venv)
    return venv


def vec_reset(venv: VecEnv) -> np.ndarray:
    for i, (state, rng) in enumerate(zip(venv.envs, venv.rngs)):
        venv.obs[i] = reset_one(state, rng)
    venv.dones[:] = 0.0
    venv.episode_returns[:] = 0.0
    return venv.obs.copy()


def vec_step(venv: VecEnv, actions) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    actions = np.asarray(actions)
    n = venv.num_envs
    if actions.shape != (n,):
        raise ValueError(f"expected {n} actions, got shape {actions.shape}")
    obs = np.empty((n, OBS_DIM))
    rewards = np.empty(n)
    dones = np.empty(n)
    for i in range(n):
        state = venv.envs[i]
        o, r, d = step_one(state, int(actions[i]))
        venv.episode_returns[i] += r
        if d:
            venv.finished_returns.append(float(venv.episode_returns[i]))
            venv.episode_returns[i] = 0.0
            o = reset_one(state, venv.rngs[i])
        obs[i], rewards[i], dones[i] = o, r, d
    venv.obs = obs.copy()
    venv.dones = dones.copy()
    return obs, rewards, dones
