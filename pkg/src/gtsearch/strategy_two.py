"""Four-stage identification of up to two defectives.

Stage 1 tests the rows of a concatenated code. A single defective is read
off directly. Two defectives differ in some outer digit, which shows up as
a layer of outcome weight above W; coloring items by that digit separates
the pair. Stage 2 locates the colors holding the defectives, stage 3 finds
one defective by binary search inside its color class, and stage 4 finds
its partner among the items that complete the observed outcome.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from .bounds import stage_costs
from .codes import ConcatParams, build_code, decode_digit, layer_weights
from .combinatorics import ceil_log2
from .errors import InconsistentOutcome
from .session import Session, Transcript


@dataclass(frozen=True)
class NoDefects:
    pass


@dataclass(frozen=True)
class OneDefect:
    item: int


@dataclass(frozen=True)
class TwoDefects:
    split_layer: int
    suspicious_colors: tuple[int, ...]


Stage1Analysis = NoDefects | OneDefect | TwoDefects


@dataclass(frozen=True)
class Stage2Result:
    search_color: int
    second_colors: tuple[int, ...]


def decode_single(r: int, params: ConcatParams, t: int | None = None) -> int:
    """Item whose column equals ``r``."""
    digits = []
    for layer in range(params.layers):
        d = decode_digit(params.slice(r, layer), params)
        if d is None:
            raise InconsistentOutcome(f"layer {layer} is not an inner codeword")
        digits.append(d)
    j = params.index_of(digits)
    if t is not None and j >= t:
        raise InconsistentOutcome(f"decoded item {j} outside [0, {t})")
    return j


def choose_split_layer(profile: Sequence[int], params: ConcatParams) -> int:
    """Heavy layer with the cheapest remaining stages; first one on ties."""
    heavy = [l for l, w in enumerate(profile) if w > params.inner_weight]
    if not heavy:
        raise ValueError("profile has no layer heavier than W")
    return min(heavy, key=lambda l: (sum(stage_costs(profile, l, params)), l))


def covered_colors(r_slice: int, params: ConcatParams) -> list[int]:
    return [c for c, word in enumerate(params.inner_codewords) if word & ~r_slice == 0]


def classify_stage1(
    r: int, params: ConcatParams, t: int, split_layer: int | None = None
) -> Stage1Analysis:
    if r == 0:
        return NoDefects()
    W = params.inner_weight
    profile = layer_weights(r, params)
    for layer, w in enumerate(profile):
        if not W <= w <= params.max_layer_weight:
            raise InconsistentOutcome(f"layer {layer} weight {w} impossible for <= 2 defectives")
    if all(w == W for w in profile):
        return OneDefect(decode_single(r, params, t))
    if split_layer is None:
        split_layer = choose_split_layer(profile, params)
    elif profile[split_layer] <= W:
        raise ValueError(f"forced split layer {split_layer} is not heavy")
    colors = covered_colors(params.slice(r, split_layer), params)
    if len(colors) < 2:
        raise InconsistentOutcome("heavy layer covers fewer than two colors")
    return TwoDefects(split_layer, tuple(colors))


def _consistent_items(options: list[list[int]], params: ConcatParams, t: int) -> list[int]:
    """Items (ascending) whose digit in each layer is among that layer's options."""
    items = []
    for digits in itertools.product(*options):
        j = params.index_of(digits)
        if j < t:
            items.append(j)
    return items


def group_candidates(color: int, r: int, params: ConcatParams, t: int, split: int) -> list[int]:
    """Items of ``color`` at the split layer whose columns are covered by ``r``."""
    options = [
        [color] if layer == split else covered_colors(params.slice(r, layer), params)
        for layer in range(params.layers)
    ]
    return _consistent_items(options, params, t)


def plan_stage2(analysis: TwoDefects, r: int, params: ConcatParams, t: int) -> list[list[int]]:
    """Pools for all but the last two suspicious colors."""
    tested = analysis.suspicious_colors[:-2]
    return [group_candidates(c, r, params, t, analysis.split_layer) for c in tested]


def analyze_stage2(analysis: TwoDefects, outcomes: Sequence[int]) -> Stage2Result:
    colors = analysis.suspicious_colors
    u1, u2 = colors[-2:]
    positive = [c for c, bit in zip(colors, outcomes) if bit]
    if len(positive) > 2:
        raise InconsistentOutcome(f"{len(positive)} positive colors; more than two defectives")
    if len(positive) == 2:
        return Stage2Result(positive[0], (positive[1],))
    if len(positive) == 1:
        return Stage2Result(positive[0], (u1, u2))
    return Stage2Result(u1, (u2,))


def identify_among(candidates: Sequence[int], session: Session) -> int:
    """Find the single defective in ``candidates`` with one stage of binary pools."""
    if not candidates:
        raise InconsistentOutcome("no candidates left for a defective")
    n_pools = ceil_log2(len(candidates))
    if n_pools == 0:
        return candidates[0]
    pools = [[c for pos, c in enumerate(candidates) if pos >> b & 1] for b in range(n_pools)]
    bits = session.run_stage(pools)
    pos = sum(bit << b for b, bit in enumerate(bits))
    if pos >= len(candidates):
        raise InconsistentOutcome(f"decoded position {pos} of {len(candidates)} candidates")
    return candidates[pos]


def second_defect_candidates(
    v: int, r: int, second_colors: Sequence[int], params: ConcatParams, t: int, split: int
) -> list[int]:
    """Items ``u != v`` in ``second_colors`` with ``column(u) | column(v) == r``."""
    v_word = params.encode(v)
    options = []
    for layer in range(params.layers):
        r_slice = params.slice(r, layer)
        v_slice = params.slice(v_word, layer)
        pool = second_colors if layer == split else range(params.q)
        options.append([
            c for c in pool
            if params.inner_codewords[c] & ~r_slice == 0
            and params.inner_codewords[c] | v_slice == r_slice
        ])
    found = [u for u in _consistent_items(options, params, t) if u != v]
    if not found:
        raise InconsistentOutcome(f"no partner for {v} completes the outcome")
    return found


def run_two(
    session: Session, params: ConcatParams, t: int | None = None, split_layer: int | None = None
) -> Transcript:
    """Identify up to two defectives in at most four stages.

    ``split_layer`` forces the coloring layer (it must be heavy for the
    realized outcome); by default the cheapest heavy layer is used.
    """
    t = session.t if t is None else t
    code = build_code(params, t)
    outcomes = session.run_stage(code.rows())
    r = sum(bit << i for i, bit in enumerate(outcomes))

    analysis = classify_stage1(r, params, t, split_layer)
    if isinstance(analysis, NoDefects):
        return session.finish((), params)
    if isinstance(analysis, OneDefect):
        return session.finish((analysis.item,), params)

    split = analysis.split_layer
    stage2 = analyze_stage2(analysis, session.run_stage(plan_stage2(analysis, r, params, t)))
    v = identify_among(group_candidates(stage2.search_color, r, params, t, split), session)
    partners = second_defect_candidates(v, r, stage2.second_colors, params, t, split)
    u = identify_among(partners, session)
    return session.finish((v, u), params)


@dataclass(frozen=True)
class TwoStageStrategy:
    """Picklable strategy object for :func:`~gtsearch.session.verify_exhaustive`."""

    params: ConcatParams
    split_layer: int | None = None

    def __call__(self, session: Session) -> Transcript:
        return run_two(session, self.params, split_layer=self.split_layer)
