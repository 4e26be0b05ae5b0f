import numpy as np
import pytest
from conftest import monte_carlo_advantages, random_buffer

from a2cppo.advantage import gae, returns_from
from a2cppo.prng import seed_stream


def test_all_zero_inputs():
    z = np.zeros((4, 2))
    assert np.all(gae(z, z, z, np.zeros(2), np.zeros(2), 0.99, 0.95) == 0.0)


def test_three_step_recursion():
    r = np.ones((3, 1))
    v = np.full((3, 1), 0.5)
    adv = gae(r, v, np.zeros((3, 1)), np.array([0.5]), np.zeros(1), 0.99, 0.95)
    # sum_k (gamma*lambda)^k delta_{t+k} with delta = 1 + 0.99*0.5 - 0.5, expanded by hand
    np.testing.assert_allclose(adv[:, 0], [2.81091504875, 1.9307975, 0.995], rtol=1e-14)


def test_lambda_one_telescopes():
    rng = seed_stream(4, 0)
    r, v, _, v_next, _ = random_buffer(rng, 6, 3)
    z = np.zeros((6, 3))
    adv = gae(r, v, z, v_next, np.zeros(3), 0.9, 1.0)
    m = 6
    for t in range(m):
        expected = sum(0.9**k * r[t + k] for k in range(m - t)) + 0.9 ** (m - t) * v_next - v[t]
        np.testing.assert_allclose(adv[t], expected, rtol=1e-12, atol=1e-12)


def test_lambda_zero_is_td_error():
    rng = seed_stream(5, 0)
    r, v, d, v_next, d_next = random_buffer(rng, 7, 2)
    adv = gae(r, v, d, v_next, d_next, 0.99, 0.0)
    next_v = np.vstack([v[1:], v_next])
    nonterm = 1.0 - np.vstack([d[1:], d_next])
    assert np.array_equal(adv, r + 0.99 * nonterm * next_v - v)


def test_done_cuts_bootstrap():
    rng = seed_stream(6, 0)
    r, v, d, v_next, d_next = random_buffer(rng, 8, 1, p_done=0.0)
    d[4, 0] = 1.0
    base = gae(r, v, d, v_next, d_next, 0.99, 0.95)
    r2, v2 = r.copy(), v.copy()
    r2[4:] += 10.0
    v2[4:] -= 7.0
    moved = gae(r2, v2, d, v_next + 3.0, d_next, 0.99, 0.95)
    assert np.array_equal(base[:4], moved[:4])


def test_monte_carlo_agreement_with_dones():
    rng = seed_stream(7, 0)
    for _ in range(20):
        r, v, d, v_next, d_next = random_buffer(rng, 9, 3, p_done=0.3)
        np.testing.assert_allclose(
            gae(r, v, d, v_next, d_next, 0.97, 1.0),
            monte_carlo_advantages(r, v, d, v_next, d_next, 0.97),
            rtol=0,
            atol=1e-12,
        )


def test_shape_checks():
    with pytest.raises(ValueError):
        gae(np.zeros((3, 2)), np.zeros((3, 1)), np.zeros((3, 2)), np.zeros(2), np.zeros(2))
    with pytest.raises(ValueError):
        gae(np.zeros((3, 2)), np.zeros((3, 2)), np.zeros((3, 2)), np.zeros(3), np.zeros(2))
    with pytest.raises(ValueError):
        gae(np.zeros((3, 2)), np.zeros((3, 2)), np.zeros((3, 2)), np.zeros(2), np.zeros(2), 1.5)


def test_returns_from():
    rng = seed_stream(8, 0)
    r, v, d, v_next, d_next = random_buffer(rng, 5, 2)
    adv = gae(r, v, d, v_next, d_next, 0.99, 0.95)
    assert np.array_equal(returns_from(np.zeros_like(v), v), v)
    assert np.array_equal(returns_from(adv, np.zeros_like(adv)), adv)
    ret = returns_from(adv, v)
    assert np.array_equal(ret, adv + v)
    with pytest.raises(ValueError):
        returns_from(adv, v[:2])
