"""Generalized advantage estimation and TD(lambda) returns."""
from __future__ import annotations

import numpy as np


def gae(r, v, d, v_next, d_next, gamma: float = 0.99, lam: float = 0.95) -> np.ndarray:
    """Backward GAE recursion over ``[t, n]`` arrays.

    ``d[t]`` flags that ``o_t`` starts a new episode, so the transition out of
    step t is cut when ``d[t + 1]`` (or ``d_next`` at the tail) is set.
    """
    r, v, d = (np.asarray(x, dtype=np.float64) for x in (r, v, d))
    v_next = np.asarray(v_next, dtype=np.float64)
    d_next = np.asarray(d_next, dtype=np.float64)
    if not (r.shape == v.shape == d.shape) or r.ndim != 2:
        raise ValueError(f"r, v, d must share one (M, N) shape: {r.shape}, {v.shape}, {d.shape}")
    m, n = r.shape
    if v_next.shape != (n,) or d_next.shape != (n,):
        raise ValueError(f"v_next and d_next must have shape ({n},)")
    if not (0.0 <= gamma <= 1.0 and 0.0 <= lam <= 1.0):
        raise ValueError("gamma and lambda must lie in [0, 1]")

    adv = np.zeros((m, n))
    for j in range(n):
        last = 0.0
        for t in reversed(range(m)):
            if t == m - 1:
                nonterminal = 1.0 - d_next[j]
                next_value = v_next[j]
            else:
                nonterminal = 1.0 - d[t + 1, j]
                next_value = v[t + 1, j]
            delta = r[t, j] + gamma * nonterminal * next_value - v[t, j]
            last = delta + gamma * lam * nonterminal * last
            adv[t, j] = last
    return adv


def returns_from(adv: np.ndarray, v: np.ndarray) -> np.ndarray:
    if np.shape(adv) != np.shape(v):
        raise ValueError("advantages and values must have the same shape")
    return adv + v
