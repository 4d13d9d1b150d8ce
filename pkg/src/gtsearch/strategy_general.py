"""Recursive splitting for an unknown number of defectives.

Every unresolved group is tested with its own concatenated code (all
groups share one stage). A group whose outcome is a single codeword holds
exactly one defective and is decoded. Otherwise some layer is heavier than
W; the group is split by the outer digit at that layer and the subgroups
are tested in the following stage. Each split separates at least two
defectives, so at most ``2s - 1`` stages are needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .codes import ConcatParams, build_code, layer_weights
from .errors import InconsistentOutcome
from .session import Session, Transcript
from .strategy_two import decode_single


def choose_group_params(group_size: int, q_hint: int = 3) -> ConcatParams:
    """Balanced-weight code for a group: W = N'/2 with the shortest even N'."""
    if group_size < 2:
        raise ValueError("groups of fewer than two items need no code")
    n = 2
    while math.comb(n, n // 2) < q_hint:
        n += 2
    layers = 1
    while q_hint**layers < group_size:
        layers += 1
    return ConcatParams(q_hint, layers, n, n // 2)


@dataclass
class GroupState:
    members: list[int]
    params: ConcatParams | None = None
    resolved: int | None = None

    @property
    def active(self) -> bool:
        return self.resolved is None

    @classmethod
    def new(cls, members: list[int], q_hint: int) -> "GroupState":
        if len(members) == 1:
            return cls(members, resolved=members[0])
        return cls(members, choose_group_params(len(members), q_hint))


@dataclass
class GeneralRun:
    """Bookkeeping for one run: code sizes used and split count."""

    max_code_cost: int = 0
    splits: int = 0
    params_used: list[ConcatParams] = field(default_factory=list)


def advance_round(
    groups: list[GroupState], session: Session, q_hint: int = 3, stats: GeneralRun | None = None,
    initial: bool = False,
) -> list[GroupState]:
    """One code stage over all active groups, then one split stage if needed.

    With ``initial`` set, an all-negative outcome means "no defectives"
    instead of an inconsistency.
    """
    active = [g for g in groups if g.active]
    if not active:
        raise ValueError("no active groups")
    done = [g for g in groups if not g.active]

    pools, spans = [], []
    for g in active:
        code = build_code(g.params, len(g.members))
        start = len(pools)
        pools.extend([g.members[j] for j in row] for row in code.rows())
        spans.append((start, len(pools)))
        if stats is not None:
            stats.max_code_cost = max(stats.max_code_cost, g.params.n_tests)
            stats.params_used.append(g.params)
    bits = session.run_stage(pools)

    splits = []
    for g, (a, b) in zip(active, spans):
        r = sum(bit << i for i, bit in enumerate(bits[a:b]))
        if r == 0:
            if initial:
                continue
            raise InconsistentOutcome(f"positive group {g.members[:4]}... tested all-negative")
        W = g.params.inner_weight
        profile = layer_weights(r, g.params)
        heavy = [l for l, w in enumerate(profile) if w > W]
        if any(w < W for w in profile):
            raise InconsistentOutcome("layer lighter than one codeword")
        if not heavy:
            done.append(GroupState(g.members, resolved=g.members[decode_single(r, g.params, len(g.members))]))
            continue
        layer = heavy[0]
        parts: dict[int, list[int]] = {}
        for local, item in enumerate(g.members):
            parts.setdefault(g.params.digit(local, layer), []).append(item)
        splits.extend(parts[c] for c in sorted(parts))
        if stats is not None:
            stats.splits += 1

    if not splits:
        return done
    outcomes = session.run_stage(splits)
    fresh = [GroupState.new(part, q_hint) for part, bit in zip(splits, outcomes) if bit]
    return done + fresh


def run_general(session: Session, q_hint: int = 3, stats: GeneralRun | None = None) -> Transcript:
    """Identify every defective, however many, by recursive splitting."""
    t = session.t
    if t == 1:
        bit = session.run_stage([[0]])[0]
        return session.finish([0] if bit else [])
    top = GroupState.new(list(range(t)), q_hint)
    groups = advance_round([top], session, q_hint, stats, initial=True)
    while any(g.active for g in groups):
        groups = advance_round(groups, session, q_hint, stats)
    return session.finish([g.resolved for g in groups], top.params)


@dataclass(frozen=True)
class GeneralStrategy:
    q_hint: int = 3

    def __call__(self, session: Session) -> Transcript:
        return run_general(session, self.q_hint)
