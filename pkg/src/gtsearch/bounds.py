"""Worst-case test counting for the four-stage procedure and rate analysis.

Counts are exact integers throughout; ``ceil_log2`` is always applied to
an exact product, never to a sum of floating-point logarithms.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .codes import ConcatParams
from .combinatorics import binomial, ceil_log2, entropy
from .errors import CapacityError, ParameterError

Mode = Literal["le", "eq"]

OPTIMAL_W = 1.0 / (2.0 + math.sqrt(2.0))


@dataclass(frozen=True)
class WorstCaseBreakdown:
    stage1: int
    worst_extra: int
    worst_profile: tuple[int, ...]
    worst_split: int

    @property
    def total(self) -> int:
        return self.stage1 + self.worst_extra

    def stage_costs(self, params: ConcatParams) -> tuple[int, int, int]:
        return stage_costs(self.worst_profile, self.worst_split, params)


@dataclass(frozen=True)
class OptimizationResult:
    t: int
    params: ConcatParams
    total: int
    mode: Mode
    breakdown: WorstCaseBreakdown


@dataclass(frozen=True)
class RatePoint:
    w: float
    w_prime: float
    value: float


def stage_costs(profile: Sequence[int], split: int, params: ConcatParams) -> tuple[int, int, int]:
    """Tests spent in stages 2, 3 and 4 when splitting on layer ``split``."""
    W = params.inner_weight
    heavy = profile[split]
    if heavy <= W:
        raise ValueError(f"layer {split} has weight {heavy} <= W={W}; not a split layer")
    group = 1
    partners = 2
    for j, wj in enumerate(profile):
        if j == split:
            continue
        group *= binomial(wj, W)
        partners *= binomial(W, 2 * W - wj)
    return max(binomial(heavy, W) - 2, 0), ceil_log2(group), ceil_log2(partners)


def _profile_extra(profile: Sequence[int], W: int) -> tuple[int, int]:
    """min over heavy layers of s2+s3+s4, with the minimizing layer (first on ties).

    Costs depend only on the heavy layer's weight, so each distinct weight
    is evaluated once.
    """
    group = 1
    partners = 1
    for wj in profile:
        group *= math.comb(wj, W)
        partners *= math.comb(W, 2 * W - wj)
    best = None
    best_layer = -1
    seen = set()
    for layer, wl in enumerate(profile):
        if wl <= W or wl in seen:
            continue
        seen.add(wl)
        a = math.comb(wl, W)
        b = math.comb(W, 2 * W - wl)
        cost = max(a - 2, 0) + ceil_log2(group // a) + ceil_log2(2 * partners // b)
        if best is None or cost < best:
            best, best_layer = cost, layer
    return best, best_layer


def _check_valid(params: ConcatParams, t: int) -> None:
    if t > params.capacity:
        raise CapacityError(f"t={t} exceeds capacity {params.capacity}")


def worst_case_total(params: ConcatParams, t: int, stop_above: int | None = None) -> WorstCaseBreakdown:
    """Worst-case total tests over every in-range layer-weight profile.

    Profiles are enumerated as multisets (costs are symmetric in the
    layers). If ``stop_above`` is given the enumeration stops as soon as
    the extra cost exceeds it; the returned breakdown is then a lower bound.
    """
    _check_valid(params, t)
    W = params.inner_weight
    weights = range(W, params.max_layer_weight + 1)
    worst = -1
    worst_profile: tuple[int, ...] = ()
    worst_split = -1
    # heaviest profiles first: they tend to be the worst and trigger pruning early
    for combo in itertools.combinations_with_replacement(reversed(weights), params.layers):
        if combo[0] == W:
            continue
        extra, layer = _profile_extra(combo, W)
        if extra > worst:
            worst, worst_profile, worst_split = extra, combo, layer
            if stop_above is not None and worst > stop_above:
                break
    return WorstCaseBreakdown(params.n_tests, worst, worst_profile, worst_split)


def integer_root(t: int, k: int) -> tuple[int, bool]:
    """Smallest ``q`` with ``q**k >= t`` and whether equality holds."""
    q = max(1, int(round(t ** (1.0 / k))))
    while q**k < t:
        q += 1
    while q > 1 and (q - 1) ** k >= t:
        q -= 1
    return q, q**k == t


def optimize_params(t: int, mode: Mode = "le", max_inner_len: int = 16) -> OptimizationResult:
    """Cheapest concatenated code for ``t`` items (worst-case total tests).

    Mode ``"le"`` allows ``q**layers >= t``; mode ``"eq"`` requires equality.
    Ties prefer fewer first-stage tests, then smaller ``q``.
    """
    if t < 2:
        raise ValueError("t must be >= 2")
    if mode not in ("le", "eq"):
        raise ValueError(f"unknown mode {mode!r}")
    candidates = []
    for layers in range(1, t.bit_length() + 1):
        q, exact = integer_root(t, layers)
        q = max(q, 2)
        if mode == "eq" and not (exact and q**layers == t):
            continue
        # worst-case cost does not depend on q beyond C(N', W) >= q, so the
        # smallest admissible q dominates larger ones
        candidates.append((q, layers))
    if not candidates:
        raise ValueError(f"t={t} is not an exact power q**layers with q >= 2")

    grid = []
    for q, layers in candidates:
        for n in range(2, max_inner_len + 1):
            for w in range(1, n):
                if math.comb(n, w) >= q:
                    grid.append((layers * n, q, layers, n, w))
    grid.sort()

    best: OptimizationResult | None = None
    for stage1, q, layers, n, w in grid:
        if best is not None and stage1 >= best.total:
            break
        params = ConcatParams(q, layers, n, w)
        limit = None if best is None else best.total - stage1
        wc = worst_case_total(params, t, stop_above=limit)
        if best is None or wc.total < best.total:
            best = OptimizationResult(t, params, wc.total, mode, wc)
    if best is None:
        raise ParameterError(f"no admissible code for t={t} with inner length <= {max_inner_len}")
    return best


def info_bound(t: int, s: int = 2) -> int:
    """Fewest tests able to distinguish all defect sets of size <= s."""
    if t < 1 or s < 1:
        raise ValueError("need t >= 1 and s >= 1")
    return ceil_log2(sum(math.comb(t, k) for k in range(s + 1)))


def rate_finite(inner_len: int, inner_weight: int) -> float:
    """Normalized test count of a fixed inner code as the number of layers grows."""
    n, W = inner_len, inner_weight
    if not 0 < W < n:
        raise ValueError("need 0 < W < N'")
    extra = max(
        math.log2(math.comb(wp, W) * math.comb(W, 2 * W - wp))
        for wp in range(W + 1, min(2 * W, n) + 1)
    )
    return (n + extra) / math.log2(math.comb(n, W))


def rate_f(w: float, w_prime: float) -> float:
    """Asymptotic normalized test count for relative weight ``w`` and heavy weight ``w_prime``."""
    eps = 1e-12
    if not (0 < w < 1 and w - eps <= w_prime <= min(1.0, 2 * w) + eps):
        raise ValueError(f"(w, w') = ({w}, {w_prime}) outside 0 < w <= w' <= min(1, 2w)")
    w_prime = min(max(w_prime, w), min(1.0, 2 * w))
    a = min(1.0, w / w_prime)
    b = min(max((2 * w - w_prime) / w, 0.0), 1.0)
    return (1.0 + w_prime * entropy(a) + w * entropy(b)) / entropy(w)


def _sup_over_heavy(w: float, tol: float) -> tuple[float, float]:
    lo, hi = w, min(1.0, 2 * w)
    res = minimize_scalar(lambda y: -rate_f(w, y), bounds=(lo, hi), method="bounded",
                          options={"xatol": tol})
    best_y, best_v = res.x, -res.fun
    for y in (lo, hi):
        v = rate_f(w, y)
        if v > best_v:
            best_y, best_v = y, v
    return best_v, best_y


def optimize_rate(grid_step: float = 0.01, refine_tol: float = 1e-9) -> RatePoint:
    """Minimize over ``w`` the worst heavy weight ``w'`` of :func:`rate_f`.

    Coarse grid over ``w`` followed by bounded Brent refinement around the
    best grid point; the inner supremum is refined the same way.
    """
    if not 0 < grid_step < 0.1:
        raise ValueError("grid_step must lie in (0, 0.1)")
    ws = np.arange(grid_step, 1.0, grid_step)
    values = [_sup_over_heavy(float(w), refine_tol)[0] for w in ws]
    i = int(np.argmin(values))
    lo = float(ws[max(i - 1, 0)])
    hi = float(ws[min(i + 1, len(ws) - 1)])
    res = minimize_scalar(lambda w: _sup_over_heavy(w, refine_tol)[0], bounds=(lo, hi),
                          method="bounded", options={"xatol": refine_tol})
    value, w_prime = _sup_over_heavy(res.x, refine_tol)
    return RatePoint(float(res.x), float(w_prime), float(value))


def stationarity_residual(x: float, y: float) -> float:
    """Residual of the stationarity condition for the heavy weight ``y`` at weight ``x``."""
    return (y - x) ** 2 - 2 * x * y + y**2


def general_bound(s: int, params: ConcatParams) -> int:
    """Test budget of the recursive splitting strategy for up to ``s`` defectives."""
    if s < 1:
        raise ValueError("s must be >= 1")
    return (2 * s - 1) * params.n_tests + params.q * (s - 1)
