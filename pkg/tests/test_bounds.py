import functools
import itertools
import math

import pytest

from gtsearch.bounds import (
    OPTIMAL_W,
    general_bound,
    info_bound,
    optimize_params,
    optimize_rate,
    rate_f,
    rate_finite,
    stage_costs,
    stationarity_residual,
    worst_case_total,
)
from gtsearch.codes import ConcatParams
from gtsearch.combinatorics import entropy


def slow_clog(x):
    m = 0
    while 2**m < x:
        m += 1
    return m


def oracle_worst(params):
    """Every ordered profile, every heavy layer, counted with a naive ceil-log."""
    W, n = params.inner_weight, params.inner_len
    worst = 0
    for prof in itertools.product(range(W, min(2 * W, n) + 1), repeat=params.layers):
        costs = []
        for l, wl in enumerate(prof):
            if wl == W:
                continue
            rest = [wj for j, wj in enumerate(prof) if j != l]
            s2 = max(math.comb(wl, W) - 2, 0)
            s3 = slow_clog(math.prod(math.comb(wj, W) for wj in rest))
            s4 = slow_clog(2 * math.prod(math.comb(W, 2 * W - wj) for wj in rest))
            costs.append(s2 + s3 + s4)
        if costs:
            worst = max(worst, min(costs))
    return params.n_tests + worst


def test_stage_costs_examples():
    assert stage_costs((2, 2), 0, ConcatParams(3, 2, 3, 1)) == (0, 1, 1)
    assert stage_costs((4, 4, 4), 0, ConcatParams(10, 3, 5, 2)) == (4, 6, 1)
    p = ConcatParams(10, 2, 5, 2)
    assert stage_costs((4, 3), 0, p) == (4, 2, 2)
    assert stage_costs((4, 3), 1, p) == (1, 3, 1)


def test_stage_costs_forced_complement():
    p = ConcatParams(20, 4, 7, 3)
    for split_w in range(4, 7):
        assert stage_costs((split_w, 6, 6, 6), 0, p)[2] == 1


def test_stage_costs_rejects_light_layer():
    with pytest.raises(ValueError):
        stage_costs((1, 2), 0, ConcatParams(3, 2, 3, 1))


@pytest.mark.parametrize(
    "params,t,total,profile",
    [
        (ConcatParams(3, 2, 3, 1), 9, 8, (2, 2)),
        (ConcatParams(10, 3, 5, 2), 1000, 26, (4, 4, 4)),
        (ConcatParams(4, 5, 4, 1), 1000, 25, (2, 2, 2, 2, 2)),
    ],
)
def test_worst_case_total_examples(params, t, total, profile):
    wc = worst_case_total(params, t)
    assert wc.total == total
    assert wc.stage1 == params.n_tests
    assert wc.worst_profile == profile


@pytest.mark.parametrize(
    "params",
    [ConcatParams(3, 2, 3, 1), ConcatParams(10, 3, 5, 2), ConcatParams(4, 5, 4, 1),
     ConcatParams(15, 3, 6, 2), ConcatParams(21, 4, 7, 2), ConcatParams(30, 3, 8, 3),
     ConcatParams(6, 4, 4, 2)],
)
def test_worst_case_matches_ordered_oracle(params):
    assert worst_case_total(params, params.capacity).total == oracle_worst(params)


def test_optimize_small_cases():
    assert optimize_params(784).total == 24
    assert optimize_params(10**6, "eq").total == 48
    res = optimize_params(2)
    assert res.params == ConcatParams(2, 1, 2, 1)
    assert res.total == worst_case_total(ConcatParams(2, 1, 2, 1), 2).total


@functools.lru_cache(maxsize=None)
def oracle_worst_shape(layers, n, w):
    # worst case does not depend on q; any q the inner code supports will do
    return oracle_worst(ConcatParams(2, layers, n, w))


def test_optimize_matches_bruteforce_search():
    """Full search over every (q, layers, N', W) without pruning, small t."""
    for t in (5, 9, 12, 28, 50):
        best = None
        for layers in range(1, 7):
            for q in range(2, t + 1):
                if q**layers < t:
                    continue
                for n in range(2, 11):
                    for w in range(1, n):
                        if math.comb(n, w) >= q:
                            best = min(best or 10**9, oracle_worst_shape(layers, n, w))
                if q**layers >= t:
                    break
        assert optimize_params(t, max_inner_len=10).total == best


def test_optimize_exact_mode():
    # 12 is only a first power, so exact mode is confined to one layer
    res = optimize_params(12, "eq")
    assert (res.params.q, res.params.layers) == (12, 1)
    assert optimize_params(1000, "eq").total == 26
    assert optimize_params(1000, "le").total == 25
    with pytest.raises(ValueError):
        optimize_params(1, "eq")


def test_optimize_non_decreasing():
    totals = [optimize_params(t).total for t in range(2, 400)]
    assert totals == sorted(totals)


@pytest.mark.parametrize("t,s,expected", [(1000, 2, 19), (784, 2, 19), (1, 1, 1), (9, 2, 6)])
def test_info_bound(t, s, expected):
    assert info_bound(t, s) == expected


def test_info_bound_below_achievable():
    for t in list(range(2, 300, 7)) + [10**3, 10**4, 10**5, 10**6]:
        assert info_bound(t, 2) <= optimize_params(t).total


def test_rate_finite_examples():
    assert rate_finite(2, 1) == 3.0
    direct = (7 + max(math.log2(math.comb(3, 2) * math.comb(2, 1)), math.log2(math.comb(4, 2)))) / math.log2(21)
    assert rate_finite(7, 2) == pytest.approx(direct, rel=1e-12)


def test_rate_finite_trends_toward_two():
    vals = [rate_finite(n, round(n * OPTIMAL_W)) for n in (10, 40, 160, 640, 2560)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert all(v > 2 for v in vals)
    assert vals[-1] < 2.05


def test_rate_f_special_values():
    assert rate_f(OPTIMAL_W, 0.5) == pytest.approx(2.0, abs=1e-9)
    for w in (0.1, 0.2, 0.3, 0.45):
        assert rate_f(w, w) == pytest.approx(1 / entropy(w), rel=1e-12)
        assert rate_f(w, 2 * w) == pytest.approx((1 + 2 * w) / entropy(w), rel=1e-12)
    with pytest.raises(ValueError):
        rate_f(0.3, 0.2)


def test_rate_f_continuous():
    w = 0.3
    ys = [w + i * (0.3 / 2000) for i in range(2001)]
    vals = [rate_f(w, y) for y in ys]
    assert max(abs(a - b) for a, b in zip(vals, vals[1:])) < 1e-2


def test_optimize_rate():
    point = optimize_rate(0.01)
    assert point.value == pytest.approx(2.0, abs=1e-3)
    assert point.w == pytest.approx(0.29289, abs=1e-3)
    assert point.w_prime == pytest.approx(0.5, abs=1e-3)


def test_stationarity():
    assert stationarity_residual(OPTIMAL_W, 0.5) == pytest.approx(0.0, abs=1e-12)
    for x in (0.1, 0.3):
        assert stationarity_residual(x, x) == pytest.approx(-x * x, abs=1e-15)


def test_stationarity_brackets_numeric_sup():
    """Residual changes sign across the numerically found supremum for fixed w."""
    w = 0.29
    ys = [w + i * (w / 4000) for i in range(1, 4000)]
    y_star = max(ys, key=lambda y: rate_f(w, y))
    assert stationarity_residual(w, y_star - 0.01) < 0 < stationarity_residual(w, y_star + 0.01)


def test_general_bound():
    p = ConcatParams(3, 2, 4, 2)
    assert general_bound(1, p) == 8
    assert general_bound(2, p) == 27
