"""Exact counting primitives: binomials, colex ranking, entropy, ceiling-log."""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "BitWord",
    "binomial",
    "colex_rank",
    "colex_unrank",
    "entropy",
    "ceil_log2",
]


@dataclass(frozen=True)
class BitWord:
    """Fixed-length binary word stored as an integer mask.

    Position ``i`` of the word is bit ``i`` of ``bits``; ``str()`` prints
    position 0 first, so ``BitWord(0b001, 3)`` renders as ``"100"``.
    """

    bits: int
    length: int

    def __post_init__(self):
        if self.length < 1:
            raise ValueError("BitWord length must be >= 1")
        if self.bits < 0 or self.bits >> self.length:
            raise ValueError(f"bits {self.bits:#b} do not fit in length {self.length}")

    @property
    def weight(self) -> int:
        return self.bits.bit_count()

    def positions(self) -> list[int]:
        return [i for i in range(self.length) if self.bits >> i & 1]

    def __str__(self) -> str:
        return "".join("1" if self.bits >> i & 1 else "0" for i in range(self.length))

    @classmethod
    def from_str(cls, text: str) -> "BitWord":
        text = text.replace("|", "")
        bits = sum(1 << i for i, ch in enumerate(text) if ch == "1")
        return cls(bits, len(text))


def binomial(n: int, k: int) -> int:
    """Exact C(n, k); zero when ``k > n``."""
    if n < 0 or k < 0:
        raise ValueError("binomial arguments must be non-negative")
    return math.comb(n, k)


def colex_rank(word: BitWord) -> int:
    """Rank of ``word`` among all words of its length and weight, colex order."""
    return sum(math.comb(pos, i + 1) for i, pos in enumerate(word.positions()))


def colex_unrank(rank: int, n: int, k: int) -> BitWord:
    """Inverse of :func:`colex_rank`: the weight-``k`` word of length ``n`` at ``rank``."""
    if not 0 <= k <= n:
        raise ValueError(f"weight {k} out of range for length {n}")
    total = math.comb(n, k)
    if not 0 <= rank < total:
        raise ValueError(f"rank {rank} out of range [0, {total})")
    bits = 0
    m = n
    while k > 0:
        # largest m with C(m, k) <= rank gives the top set position
        m -= 1
        while math.comb(m, k) > rank:
            m -= 1
        rank -= math.comb(m, k)
        bits |= 1 << m
        k -= 1
    return BitWord(bits, n)


def entropy(x: float) -> float:
    """Binary entropy in bits, with h(0) = h(1) = 0."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"entropy argument {x} outside [0, 1]")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def ceil_log2(x: int) -> int:
    """Smallest ``m`` with ``2**m >= x``, computed exactly on integers."""
    if x < 1:
        raise ValueError("ceil_log2 requires x >= 1")
    return (x - 1).bit_length()
