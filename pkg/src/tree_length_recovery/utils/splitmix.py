"""
SplitMix64 pseudo-random generator.

64-bit state advanced by 0x9E3779B97F4A7C15 and finalized with the
multipliers 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB (shifts 30, 27, 31).
Bounded draws take ``next() % bound``. Any port following this contract
reproduces the same trees for the same seed.
"""

from fractions import Fraction
from typing import List, Sequence, TypeVar

T = TypeVar("T")

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        if bound <= 0:
            raise ValueError(f"bound must be positive, got {bound}")
        return self.next() % bound

    def choice(self, items: Sequence[T]) -> T:
        return items[self.below(len(items))]

    def shuffled(self, items: Sequence[T]) -> List[T]:
        """Fisher-Yates shuffle of a copy, swapping from the back."""
        out = list(items)
        for i in range(len(out) - 1, 0, -1):
            j = self.below(i + 1)
            out[i], out[j] = out[j], out[i]
        return out

    def rational(self) -> Fraction:
        """p/q with p uniform in 1..9 and q uniform in 1..4."""
        p = self.below(9) + 1
        q = self.below(4) + 1
        return Fraction(p, q)
