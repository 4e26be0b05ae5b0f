import numpy as np
import pytest

from a2cppo.net import Layout, init_params
from a2cppo.prng import next_uniform, seed_stream


def uniform_array(rng, shape, low=-1.0, high=1.0):
    flat = [low + (high - low) * next_uniform(rng) for _ in range(int(np.prod(shape)))]
    return np.array(flat, dtype=np.float64).reshape(shape)


def random_params(seed, layout=Layout(), stream=99):
    """Initialized parameters with random (nonzero) biases."""
    rng = seed_stream(seed, stream)
    params = init_params(rng, layout)
    for k in params:
        if k.endswith(".bias"):
            params[k] = uniform_array(rng, params[k].shape, -0.5, 0.5)
    return params, rng


def fd_relative_error(analytic, numeric, scale=1.0):
    """|a - n| / max(|a|, |n|, 1e-3 * scale).

    A central difference with h = 1e-6 carries roundoff of about
    eps * |loss| / h, so components far below the loss magnitude are judged
    against a floor proportional to it (``scale`` = max(1, |loss|)).
    """
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-3 * scale)


def finite_difference_check(loss_fn, params, grads, h=1e-6):
    scale = max(1.0, abs(loss_fn(params)))
    worst = 0.0
    for k, arr in params.items():
        flat = arr.reshape(-1)
        g = grads[k].reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up = loss_fn(params)
            flat[i] = orig - h
            down = loss_fn(params)
            flat[i] = orig
            worst = max(worst, fd_relative_error(g[i], (up - down) / (2 * h), scale))
    return worst


@pytest.fixture
def small_layout():
    return Layout(hidden=(8, 8))


def monte_carlo_advantages(r, v, d, v_next, d_next, gamma):
    """Forward-summed discounted return (bootstrapped at the tail) minus value."""
    m, n = r.shape
    out = np.zeros((m, n))
    for j in range(n):
        for t in range(m):
            ret, disc, k = 0.0, 1.0, t
            while True:
                ret += disc * r[k, j]
                ends = d[k + 1, j] if k + 1 < m else d_next[j]
                if ends:
                    break
                disc *= gamma
                k += 1
                if k == m:
                    ret += disc * v_next[j]
                    break
            out[t, j] = ret - v[t, j]
    return out


def random_buffer(rng, m, n, p_done=0.2):
    r = uniform_array(rng, (m, n), -1, 2)
    v = uniform_array(rng, (m, n), -3, 3)
    d = (uniform_array(rng, (m, n), 0, 1) < p_done).astype(float)
    v_next = uniform_array(rng, (n,), -3, 3)
    d_next = (uniform_array(rng, (n,), 0, 1) < p_done).astype(float)
    return r, v, d, v_next, d_next


_ACCEPTANCE: dict[str, list] = {}  # nodeid -> [label, status]


@pytest.fixture
def criterion(request):
    """Label the running acceptance check; its outcome lands in the summary."""
    entry = _ACCEPTANCE.setdefault(request.node.nodeid, [request.node.name, "FAIL"])

    def record(label):
        entry[0] = label

    return record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    rep = (yield).get_result()
    if rep.when == "call" and item.nodeid in _ACCEPTANCE:
        _ACCEPTANCE[item.nodeid][1] = "PASS" if rep.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, status in _ACCEPTANCE.values():
        terminalreporter.write_line(f"[{status}] {label}")
