"""SplitMix64 streams.

Every random draw in the package comes from one of these so that a single
integer seed reproduces a whole experiment bit for bit.
"""

from __future__ import annotations

import math

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def splitmix64_next(state: int) -> tuple[int, int]:
    """Advance a raw splitmix64 state; returns ``(new_state, output)``."""
    state = (state + GOLDEN_GAMMA) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


class SplitMix64:
    """Small deterministic PRNG with stream splitting."""

    def __init__(self, seed: int = 0):
        self.state = int(seed) & MASK64

    def next_u64(self) -> int:
        self.state, out = splitmix64_next(self.state)
        return out

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def randbelow(self, bound: int) -> int:
        """Uniform integer in [0, bound), unbiased (rejection sampling)."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        if bound == 1:
            return 0
        bits = (bound - 1).bit_length()
        if bits <= 64:
            while True:
                r = self.next_u64() >> (64 - bits)
                if r < bound:
                    return r
        # wide bounds: concatenate words
        words = -(-bits // 64)
        while True:
            r = 0
            for _ in range(words):
                r = (r << 64) | self.next_u64()
            r >>= words * 64 - bits
            if r < bound:
                return r

    def randbits(self, k: int) -> int:
        """Integer with ``k`` uniformly random bits."""
        r = 0
        produced = 0
        while produced < k:
            r = (r << 64) | self.next_u64()
            produced += 64
        return r >> (produced - k) if k else 0

    def split(self) -> "SplitMix64":
        """Child stream seeded from this stream's next output."""
        return SplitMix64(self.next_u64())

    def sample_index(self, cumulative) -> int:
        """Draw an index from a nondecreasing cumulative-probability array."""
        import numpy as np

        total = float(cumulative[-1])
        u = self.random() * total
        idx = int(np.searchsorted(cumulative, u, side="right"))
        return min(idx, len(cumulative) - 1)

    def shuffle_prefix(self, population: int, k: int) -> list[int]:
        """First ``k`` entries of a Fisher-Yates shuffle of ``range(population)``.

        Gives ``k`` distinct values; only the touched positions are stored.
        """
        if k > population:
            raise ValueError("cannot draw more distinct values than the population")
        swaps: dict[int, int] = {}
        out = []
        for i in range(k):
            j = i + self.randbelow(population - i)
            vi = swaps.get(i, i)
            vj = swaps.get(j, j)
            swaps[j] = vi
            out.append(vj)
        return out


def derive_seed(seed: int, *labels: int | str) -> int:
    """Deterministically mix labels into a seed (for per-trial streams)."""
    state = int(seed) & MASK64
    for label in labels:
        if isinstance(label, str):
            value = 0
            for ch in label.encode():
                value = (value * 131 + ch) & MASK64
        else:
            value = int(label) & MASK64
        state, out = splitmix64_next(state ^ value)
        state = out
    return state


def isqrt_ceil(x: int) -> int:
    r = math.isqrt(x)
    return r if r * r == x else r + 1
