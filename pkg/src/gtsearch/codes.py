"""Concatenated constant-weight test codes and outcome vectors.

A code is stored column-wise: column ``j`` is an integer mask over the
``n_tests`` rows. Layer ``l`` occupies rows ``l*inner_len .. (l+1)*inner_len - 1``
and carries the inner codeword of the ``l``-th base-``q`` digit of ``j``
(most significant digit in layer 0).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from .combinatorics import BitWord, binomial, colex_rank, colex_unrank
from .errors import CapacityError, ParameterError

DefectSet = tuple[int, ...]


@dataclass(frozen=True)
class ConcatParams:
    q: int
    layers: int
    inner_len: int
    inner_weight: int

    def __post_init__(self):
        if self.q < 2:
            raise ParameterError("q must be >= 2")
        if self.layers < 1:
            raise ParameterError("need at least one layer")
        if self.inner_len < 2 or not 0 < self.inner_weight < self.inner_len:
            raise ParameterError(
                f"inner weight {self.inner_weight} invalid for length {self.inner_len}"
            )
        if binomial(self.inner_len, self.inner_weight) < self.q:
            raise ParameterError(
                f"C({self.inner_len},{self.inner_weight}) < q={self.q}: inner code too small"
            )

    @property
    def n_tests(self) -> int:
        return self.layers * self.inner_len

    @property
    def capacity(self) -> int:
        return self.q**self.layers

    @property
    def max_layer_weight(self) -> int:
        return min(2 * self.inner_weight, self.inner_len)

    @cached_property
    def inner_codewords(self) -> tuple[int, ...]:
        """Masks of the first ``q`` weight-W words in colex order."""
        return tuple(
            colex_unrank(c, self.inner_len, self.inner_weight).bits for c in range(self.q)
        )

    @property
    def layer_mask(self) -> int:
        return (1 << self.inner_len) - 1

    def digits(self, j: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.layers):
            j, d = divmod(j, self.q)
            out.append(d)
        return tuple(reversed(out))

    def index_of(self, digits: Sequence[int]) -> int:
        j = 0
        for d in digits:
            j = j * self.q + d
        return j

    def digit(self, j: int, layer: int) -> int:
        return j // self.q ** (self.layers - 1 - layer) % self.q

    def slice(self, word: int, layer: int) -> int:
        return word >> (layer * self.inner_len) & self.layer_mask

    def encode(self, j: int) -> int:
        word = 0
        for layer, d in enumerate(self.digits(j)):
            word |= self.inner_codewords[d] << (layer * self.inner_len)
        return word

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "layers": self.layers,
            "inner_len": self.inner_len,
            "inner_weight": self.inner_weight,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ConcatParams":
        return cls(data["q"], data["layers"], data["inner_len"], data["inner_weight"])


@dataclass(frozen=True)
class BinaryCode:
    """An ``n_tests x size`` binary matrix held as column masks."""

    n_tests: int
    columns: tuple[int, ...]
    params: ConcatParams | None = field(default=None, compare=False)

    @property
    def size(self) -> int:
        return len(self.columns)

    def column(self, j: int) -> BitWord:
        return BitWord(self.columns[j], self.n_tests)

    def rows(self) -> list[list[int]]:
        """Each row as the pool of items it tests."""
        return [
            [j for j, col in enumerate(self.columns) if col >> i & 1]
            for i in range(self.n_tests)
        ]


def build_code(params: ConcatParams, t: int) -> BinaryCode:
    """Concatenated code over items ``0..t-1``."""
    if t < 1:
        raise ParameterError("need at least one item")
    if t > params.capacity:
        raise CapacityError(f"t={t} exceeds code capacity q^layers={params.capacity}")
    return BinaryCode(params.n_tests, tuple(params.encode(j) for j in range(t)), params)


def outcome(code: BinaryCode, defects: Iterable[int]) -> int:
    """Outcome vector: OR of the defect columns (as a mask over rows)."""
    r = 0
    for j in defects:
        if not 0 <= j < code.size:
            raise ValueError(f"item {j} outside [0, {code.size})")
        r |= code.columns[j]
    return r


def layer_weights(r: int | BitWord, params: ConcatParams) -> tuple[int, ...]:
    if isinstance(r, BitWord):
        if r.length != params.n_tests:
            raise ValueError(f"outcome length {r.length} != {params.n_tests}")
        r = r.bits
    elif r >> params.n_tests:
        raise ValueError("outcome vector longer than the code")
    return tuple(params.slice(r, layer).bit_count() for layer in range(params.layers))


def consistent_sets(code: BinaryCode, r: int, s_max: int) -> list[DefectSet]:
    """All defect sets of size <= s_max whose outcome equals ``r``, lexicographic.

    Brute force; intended for small instances only.
    """
    # only columns covered by r can appear in a consistent set
    usable = [j for j, col in enumerate(code.columns) if col & ~r == 0]
    found = []
    for k in range(s_max + 1):
        for combo in itertools.combinations(usable, k):
            acc = 0
            for j in combo:
                acc |= code.columns[j]
            if acc == r:
                found.append(combo)
    found.sort()
    return found


def format_word(word: int, params: ConcatParams) -> str:
    """Render an outcome or column as ``"110|110"`` (position 0 first)."""
    return "|".join(
        str(BitWord(params.slice(word, layer), params.inner_len))
        for layer in range(params.layers)
    )


def decode_digit(slice_bits: int, params: ConcatParams) -> int | None:
    """Symbol carried by an inner codeword, or ``None`` if not in the inner code."""
    if slice_bits.bit_count() != params.inner_weight:
        return None
    c = colex_rank(BitWord(slice_bits, params.inner_len))
    return c if c < params.q else None
