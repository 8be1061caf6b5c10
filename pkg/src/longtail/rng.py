"""Seedable, portable pseudo-random generator used for every randomized step.

The generator is splitmix64: a 64-bit state advanced by a fixed odd constant,
with the output passed through two xor-shift-multiply mixing rounds. It is
trivial to reimplement in any language, which keeps emitted plan files
reproducible outside this package. The exact update is

    state <- (state + 0x9E3779B97F4A7C15) mod 2^64
    z <- state
    z <- ((z xor (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2^64
    z <- ((z xor (z >> 27)) * 0x94D049BB133111EB) mod 2^64
    output <- z xor (z >> 31)

Derived draws are fixed as well:

  * float in [0, 1):   (output >> 11) * 2^-53
  * integer below n:   output mod n
  * shuffle:           Fisher-Yates from the top index down,
                       j = randbelow(i + 1), swap items i and j
  * sample k of n:     partial Fisher-Yates over a copy of the pool,
                       position i gets swapped with i + randbelow(n - i)

Seeds are taken modulo 2^64, so negative Python ints are accepted.

The hot sampling kernels in :mod:`longtail.kernels` embed this same
generator; ``tests/test_kernels.py`` pins their streams to this reference.
"""

from __future__ import annotations

from typing import MutableSequence, Sequence, TypeVar

MASK64 = (1 << 64) - 1

GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB

_TWO_NEG53 = 2.0**-53

T = TypeVar("T")


class SplitMix64:
    """Reference splitmix64 stream over Python integers."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_u64(self) -> int:
        state = (self._state + GAMMA) & MASK64
        self._state = state
        z = state
        z = ((z ^ (z >> 30)) * MIX1) & MASK64
        z = ((z ^ (z >> 27)) * MIX2) & MASK64
        return z ^ (z >> 31)

    def next_float(self) -> float:
        """Uniform float in [0, 1) from the top 53 bits of one draw."""
        return (self.next_u64() >> 11) * _TWO_NEG53

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n). The modulo bias is below n / 2^64."""
        if n < 1:
            raise ValueError(f"randbelow needs n >= 1, got {n}")
        return self.next_u64() % n

    def shuffle(self, items: MutableSequence[T]) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample(self, pool: Sequence[T], k: int) -> list[T]:
        """k distinct items from pool, by partial Fisher-Yates over a copy."""
        n = len(pool)
        if not 0 <= k <= n:
            raise ValueError(f"cannot sample {k} items from pool of {n}")
        items = list(pool)
        for i in range(k):
            j = i + self.randbelow(n - i)
            items[i], items[j] = items[j], items[i]
        return items[:k]
