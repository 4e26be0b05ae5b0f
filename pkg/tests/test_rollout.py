import numpy as np
import pytest

from a2cppo.env import make_vec_env
from a2cppo.net import init_params, policy_forward, value_forward
from a2cppo.prng import seed_stream
from a2cppo.rollout import collect


def _setup(seed=0, n=4):
    params = init_params(seed_stream(seed, 0))
    return params, make_vec_env(n, seed), seed_stream(seed, n + 1)


def test_a2c_rollout_length():
    params, venv, rng = _setup()
    buf, tail = collect(params, venv, 5, rng)
    assert buf.o.shape == (5, 4, 4)
    assert buf.a.shape == buf.logp.shape == buf.r.shape == buf.d.shape == buf.v.shape == (5, 4)
    assert tail.o_next.shape == (4, 4) and tail.d_next.shape == (4,)


def test_stored_logp_and_values_recompute_bitwise():
    params, venv, rng = _setup(3)
    buf, _ = collect(params, venv, 30, rng)
    for t in range(30):
        lp = policy_forward(params, buf.o[t]).log_probs[np.arange(4), buf.a[t]]
        assert lp.tobytes() == buf.logp[t].tobytes()
        assert value_forward(params, buf.o[t]).tobytes() == buf.v[t].tobytes()


def test_rollout_determinism():
    buf1, _ = collect(*_setup_args(9))
    buf2, _ = collect(*_setup_args(9))
    for field in ("o", "a", "logp", "r", "d", "v"):
        assert getattr(buf1, field).tobytes() == getattr(buf2, field).tobytes()


def _setup_args(seed):
    params, venv, rng = _setup(seed)
    return params, venv, 40, rng


def test_done_flags_carry_across_iterations():
    params, venv, rng = _setup(1)
    for _ in range(10):
        _, tail = collect(params, venv, 7, rng)
        buf, _ = collect(params, venv, 7, rng)
        assert np.array_equal(buf.d[0], tail.d_next)
        assert np.array_equal(buf.o[0], tail.o_next)


def test_done_cached_at_step_entry():
    params, venv, rng = _setup(2)
    buf, tail = collect(params, venv, 200, rng)
    assert buf.d.sum() > 0
    assert np.all(buf.d[0] == 0.0)
    # every episode start observation lies within reset bounds
    starts = buf.o[buf.d == 1.0]
    assert np.all(np.abs(starts) <= 0.05)


def test_total_reward():
    params, venv, rng = _setup(4)
    buf, _ = collect(params, venv, 13, rng)
    assert buf.r.sum() == 13 * 4


def test_zero_steps_rejected():
    params, venv, rng = _setup()
    with pytest.raises(ValueError):
        collect(params, venv, 0, rng)
