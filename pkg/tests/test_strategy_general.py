import itertools

import pytest

from gtsearch.bounds import general_bound
from gtsearch.codes import ConcatParams
from gtsearch.errors import InconsistentOutcome
from gtsearch.session import Oracle, Session, run_session, verify_exhaustive
from gtsearch.strategy_general import (
    GeneralRun,
    GeneralStrategy,
    GroupState,
    advance_round,
    choose_group_params,
    run_general,
)


def test_choose_group_params():
    assert choose_group_params(9, 3) == ConcatParams(3, 2, 4, 2)
    assert choose_group_params(2, 2) == ConcatParams(2, 1, 2, 1)
    for size in range(2, 200):
        for q in (2, 3, 5, 7):
            p = choose_group_params(size, q)
            assert p.capacity >= size
            assert p.inner_weight * 2 == p.inner_len
    with pytest.raises(ValueError):
        choose_group_params(1, 3)


def test_single_defect_resolves_without_split():
    session = Session(Oracle(9, {4}))
    groups = advance_round([GroupState.new(list(range(9)), 3)], session, 3)
    assert [g.resolved for g in groups] == [4]
    assert len(session.stages) == 1


def test_pair_splits_into_two_positive_groups():
    session = Session(Oracle(9, {0, 4}))
    stats = GeneralRun()
    groups = advance_round([GroupState.new(list(range(9)), 3)], session, 3, stats)
    assert stats.splits == 1
    assert len(groups) == 2
    assert all(len([d for d in (0, 4) if d in g.members]) == 1 for g in groups)


def test_positive_group_tested_negative_is_inconsistent():
    session = Session(Oracle(9, set()))
    with pytest.raises(InconsistentOutcome):
        advance_round([GroupState.new(list(range(9)), 3)], session, 3)


def test_run_general_edge_cases():
    tr = run_session(GeneralStrategy(), Oracle(27, ()))
    assert tr.diagnosis == () and tr.n_stages == 1
    tr = run_session(GeneralStrategy(), Oracle(27, {13}))
    assert tr.diagnosis == (13,) and tr.n_stages == 1
    assert run_session(GeneralStrategy(), Oracle(1, {0})).diagnosis == (0,)
    assert run_session(GeneralStrategy(), Oracle(1, ())).diagnosis == ()


def test_split_always_yields_two_positive_subgroups():
    t = 27
    for s in itertools.combinations(range(t), 3):
        session = Session(Oracle(t, s))
        groups = [GroupState.new(list(range(t)), 3)]
        first = True
        while any(g.active for g in groups):
            before = len([g for g in groups if g.active])
            stats = GeneralRun()
            groups = advance_round(groups, session, 3, stats, initial=first)
            first = False
            holding = [g for g in groups if any(d in g.members for d in s)]
            # every group that still exists contains at least one defective
            assert len(holding) == len(groups)
            if stats.splits:
                assert len(groups) >= before + stats.splits
        assert sorted(g.resolved for g in groups) == list(s)


@pytest.mark.parametrize("t,s,q", [(27, 3, 3), (20, 4, 3), (30, 3, 4), (16, 4, 2)])
def test_exhaustive_general(t, s, q):
    for k in range(s + 1):
        for defects in itertools.combinations(range(t), k):
            stats = GeneralRun()
            tr = run_general(Session(Oracle(t, defects)), q, stats)
            assert tr.diagnosis == defects
            assert tr.n_stages <= 2 * max(k, 1) - 1
            assert stats.splits <= max(k - 1, 0)
            top = max(stats.params_used, key=lambda p: p.n_tests)
            assert tr.n_tests <= general_bound(max(k, 1), top)


def test_verify_general_report():
    rep = verify_exhaustive(27, 3, GeneralStrategy)
    assert rep.ok and rep.cases == 1 + 27 + 351 + 2925
    assert rep.max_stages <= 5
