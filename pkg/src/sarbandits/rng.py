"""Deterministic 64-bit random streams.

Every Monte Carlo trial owns one :class:`RngStream`.  The stream is a
xoshiro256** generator whose 256-bit state is filled by a splitmix64
sequence started from ``combine(master_seed, trial_index)``.  The compiled
kernel reimplements exactly the same arithmetic, so a trial gives the same
reward sequence whichever backend runs it.
"""

from __future__ import annotations

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_TO_UNIT = 1.0 / (1 << 53)


def mix64(z: int) -> int:
    """splitmix64 finalizer applied to ``z + GOLDEN_GAMMA``."""
    z = (z + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def combine(seed: int, word: int) -> int:
    """Derive a child seed from ``seed`` and one extra 64-bit word."""
    return mix64((seed & MASK64) ^ mix64(word & MASK64))


def derive_seed(master_seed: int, *words: int) -> int:
    seed = master_seed & MASK64
    for w in words:
        seed = combine(seed, w)
    return seed


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class RngStream:
    """xoshiro256** stream for one trial.

    Parameters
    ----------
    master_seed : int
        Experiment-level seed (taken modulo 2**64).
    trial_index : int
        Non-negative trial number; distinct indices give independent streams.
    """

    __slots__ = ("master_seed", "trial_index", "_s")

    def __init__(self, master_seed: int, trial_index: int = 0):
        if trial_index < 0:
            raise ValueError("trial_index must be non-negative")
        self.master_seed = master_seed & MASK64
        self.trial_index = trial_index
        self._s = seed_state(combine(self.master_seed, trial_index))

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def random(self) -> float:
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * _TO_UNIT

    def state(self) -> tuple[int, int, int, int]:
        return tuple(self._s)

    def __repr__(self) -> str:
        return f"RngStream(master_seed={self.master_seed}, trial_index={self.trial_index})"


def seed_state(seed: int) -> list[int]:
    """Expand one 64-bit seed into a xoshiro256** state via splitmix64."""
    state = []
    x = seed & MASK64
    for _ in range(4):
        state.append(mix64(x))
        x = (x + GOLDEN_GAMMA) & MASK64
    return state
