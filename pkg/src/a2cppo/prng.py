"""Stream-addressable xoshiro256++ generator seeded through splitmix64.

Every stochastic consumer in a training run owns its own stream so that
switching one consumer off (e.g. minibatch shuffling) cannot shift the
numbers seen by another.
"""
from __future__ import annotations

__all__ = [
    "RngState",
    "seed_stream",
    "next_u64",
    "next_uniform",
    "splitmix64",
    "mix64",
    "PARAM_INIT_STREAM",
    "env_stream",
    "action_stream",
    "shuffle_stream",
]

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
# used when splitmix64 happens to produce an all-zero state
_NONZERO_FALLBACK = (GOLDEN_GAMMA, 0xBF58476D1CE4E5B9, 0x94D049BB133111EB, 1)

PARAM_INIT_STREAM = 0


def env_stream(index: int) -> int:
    """Stream id of sub-environment ``index`` (0-based)."""
    return 1 + index


def action_stream(num_envs: int) -> int:
    return num_envs + 1


def shuffle_stream(num_envs: int) -> int:
    return num_envs + 2


def mix64(z: int) -> int:
    """splitmix64 output finalizer, used as the stream-id hash."""
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def splitmix64(x: int) -> tuple[int, int]:
    """One splitmix64 step: returns ``(new_state, output)``."""
    x = (x + GOLDEN_GAMMA) & MASK64
    return x, mix64(x)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class RngState:
    """Mutable xoshiro256++ state. Owned by exactly one consumer."""

    __slots__ = ("s0", "s1", "s2", "s3")

    def __init__(self, s0: int, s1: int, s2: int, s3: int):
        if not (s0 | s1 | s2 | s3):
            raise ValueError("xoshiro256++ state must not be all zero")
        self.s0, self.s1, self.s2, self.s3 = (s & MASK64 for s in (s0, s1, s2, s3))

    @property
    def words(self) -> tuple[int, int, int, int]:
        return (self.s0, self.s1, self.s2, self.s3)

    def copy(self) -> RngState:
        return RngState(*self.words)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RngState) and self.words == other.words

    def __repr__(self) -> str:
        return "RngState(%s)" % ", ".join("0x%016x" % w for w in self.words)


def seed_stream(seed: int, stream_id: int) -> RngState:
    x = (seed ^ mix64(stream_id & MASK64)) & MASK64
    words = []
    for _ in range(4):
        x, out = splitmix64(x)
        words.append(out)
    if not any(words):
        words = list(_NONZERO_FALLBACK)
    return RngState(*words)


def next_u64(state: RngState) -> int:
    s0, s1, s2, s3 = state.s0, state.s1, state.s2, state.s3
    result = (_rotl((s0 + s3) & MASK64, 23) + s0) & MASK64
    t = (s1 << 17) & MASK64
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl(s3, 45)
    state.s0, state.s1, state.s2, state.s3 = s0, s1, s2, s3
    return result


def next_uniform(state: RngState) -> float:
    """Uniform double in [0, 1) built from the top 53 bits of the next output."""
    return (next_u64(state) >> 11) * (1.0 / 9007199254740992.0)
