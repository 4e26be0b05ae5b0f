import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from a2cppo import env
from a2cppo.env import EnvState, make_vec_env, reset_one, step_one, vec_step
from a2cppo.prng import env_stream, seed_stream


def _physics_oracle(x, x_dot, theta, theta_dot, force):
    """Solve the coupled cart-pole equations as a 2x2 linear system."""
    m, mc, l, g = env.MASS_POLE, env.MASS_CART, env.HALF_LENGTH, env.GRAVITY
    c, s = math.cos(theta), math.sin(theta)
    lhs = np.array([[mc + m, m * l * c], [c, 4.0 / 3.0 * l]])
    rhs = np.array([force + m * l * theta_dot**2 * s, g * s])
    xacc, thetaacc = np.linalg.solve(lhs, rhs)
    x_dot2 = x_dot + env.TAU * xacc
    theta_dot2 = theta_dot + env.TAU * thetaacc
    return np.array([x + env.TAU * x_dot2, x_dot2, theta + env.TAU * theta_dot2, theta_dot2])


def test_reset_bounds_and_determinism():
    for seed in range(20):
        a = reset_one(EnvState(), seed_stream(seed, 1))
        b = reset_one(EnvState(), seed_stream(seed, 1))
        assert np.all(np.abs(a) <= 0.05)
        assert np.array_equal(a, b)


def test_reset_seed_42_stream_1():
    # frozen from the numpy-uint64 generator oracle in test_prng
    expected = [0.04332948313521938, -0.03851171603732262, 0.007473629886168245, 0.03955831006184744]
    obs = reset_one(EnvState(), seed_stream(42, 1))
    np.testing.assert_allclose(obs, expected, rtol=0, atol=1e-17)


def test_zero_state_push_right_matches_physics():
    state = EnvState()
    obs, reward, done = step_one(state, 1)
    expected = _physics_oracle(0.0, 0.0, 0.0, 0.0, 10.0)
    np.testing.assert_allclose(obs, expected, rtol=1e-13, atol=1e-15)
    assert obs[1] > 0 and obs[3] < 0
    assert reward == 1.0 and done == 0


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.floats(-0.2, 0.2), min_size=4, max_size=4),
    st.sampled_from([0, 1]),
)
def test_step_matches_physics_oracle(start, action):
    state = EnvState(*start)
    obs, _, _ = step_one(state, action)
    expected = _physics_oracle(*start, 10.0 if action else -10.0)
    np.testing.assert_allclose(obs, expected, rtol=1e-12, atol=1e-14)


def test_tilted_pole_terminates():
    state = EnvState(theta=0.21)
    _, reward, done = step_one(state, 0)
    assert done == 1 and reward == 1.0


def test_cart_out_of_bounds_terminates():
    _, _, done = step_one(EnvState(x=2.45), 1)
    assert done == 1


def test_invalid_action_rejected():
    with pytest.raises(ValueError):
        step_one(EnvState(), 2)


def test_step_after_termination_rejected():
    state = EnvState(theta=0.3)
    step_one(state, 0)
    with pytest.raises(RuntimeError):
        step_one(state, 0)


def test_alternating_actions_stay_bounded():
    state = EnvState()
    for t in range(20):
        obs, _, done = step_one(state, t % 2)
        assert abs(obs[0]) < 2.4 and not done


def test_vec_step_single_env_matches_step_one():
    venv = make_vec_env(1, seed=5)
    ref = EnvState(*venv.obs[0])
    for t in range(15):
        action = t % 2
        obs, rew, done = vec_step(venv, [action])
        o, r, d = step_one(ref, action)
        assert np.array_equal(obs[0], o) and rew[0] == r and done[0] == d


def test_vec_step_matches_scalar_rollouts():
    venv = make_vec_env(4, seed=11)
    scalar = []
    for i in range(4):
        s, rng = EnvState(), seed_stream(11, env_stream(i))
        reset_one(s, rng)
        scalar.append((s, rng))
    for _ in range(10):
        obs, rew, dones = vec_step(venv, np.zeros(4, dtype=int))
        for i, (s, rng) in enumerate(scalar):
            o, r, d = step_one(s, 0)
            if d:
                o = reset_one(s, rng)
            assert np.array_equal(obs[i], o)
            assert rew[i] == r and dones[i] == d


def test_truncation_at_500_auto_resets():
    venv = make_vec_env(2, seed=0)
    venv.envs[1].steps_taken = env.MAX_EPISODE_STEPS - 1
    obs, rew, dones = vec_step(venv, [0, 1])
    assert dones.tolist() == [0.0, 1.0]
    assert rew[1] == 1.0
    assert np.all(np.abs(obs[1]) <= 0.05)
    assert venv.envs[1].steps_taken == 0


def test_length_mismatch_rejected():
    venv = make_vec_env(3, seed=0)
    with pytest.raises(ValueError):
        vec_step(venv, [0, 1])


def test_episode_length_never_exceeds_cap():
    # a balancing heuristic keeps episodes alive long enough to hit the cap
    venv = make_vec_env(2, seed=3)
    for _ in range(1200):
        actions = (venv.obs[:, 2] + 0.5 * venv.obs[:, 3] > 0).astype(int)
        vec_step(venv, actions)
        assert all(s.steps_taken <= env.MAX_EPISODE_STEPS for s in venv.envs)
    assert max(venv.drain_finished()) == 500.0


def test_vec_env_determinism():
    def run():
        venv = make_vec_env(3, seed=8)
        traj = []
        for t in range(200):
            traj.append(vec_step(venv, [t % 2, 0, 1])[0])
        return np.stack(traj)

    assert np.array_equal(run(), run())
