import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from seedfolio.bandit import (
    UcbtState,
    checkpoints,
    learning_curve,
    run_online,
    select_arm,
    ucbt_score,
    update,
)
from seedfolio.matrix_game import InvalidInput


def mp_score(r, n, t, c=2, rho="2.1"):
    mpmath.mp.dps = 50
    lg = mpmath.log(4 * mpmath.mpf(t) ** mpmath.mpf(rho))
    s = mpmath.mpf(r) / n + mpmath.sqrt(c * lg / n) / 100 + 16 * lg / (100 * n)
    return float(min(mpmath.mpf(1), s))


def state(wins, plays):
    return UcbtState(np.array(wins), np.array(plays), int(np.sum(plays)) + 1)


def test_score_unplayed_is_one():
    for t in (1, 2, 1000, 10**9):
        s = UcbtState(np.zeros(2, int), np.zeros(2, int), 1)
        assert ucbt_score(s, 0) == 1.0
    s = state([0, 0], [5, 0])
    assert ucbt_score(s, 1) == 1.0


def test_score_capped():
    assert ucbt_score(state([1000], [1000]), 0) == 1.0


def test_score_high_precision_oracle():
    s = state([2, 0], [4, 11])  # t = 16
    assert s.t == 16
    assert ucbt_score(s, 0) == pytest.approx(mp_score(2, 4, 16), abs=1e-12)
    for r, n, t in ((0, 1, 2), (3, 50, 400), (7, 9, 10_000), (0, 3000, 5000)):
        plays = [n, t - 1 - n]
        s = state([r, 0], plays)
        assert ucbt_score(s, 0) == pytest.approx(mp_score(r, n, t), abs=1e-12)


def test_select_examples():
    assert select_arm(UcbtState.fresh(5)) == 0
    s = update(UcbtState.fresh(2), 0, False)
    assert ucbt_score(s, 0) < 1.0
    assert select_arm(s) == 1
    s1 = UcbtState.fresh(1)
    for g in range(20):
        assert select_arm(s1) == 0
        s1 = update(s1, 0, g % 2 == 0)


def test_update_examples():
    s = update(UcbtState.fresh(3), 0, True)
    assert s.wins.tolist() == [1, 0, 0] and s.plays.tolist() == [1, 0, 0] and s.t == 2
    s2 = update(s, 0, False)
    assert s2.wins.tolist() == [1, 0, 0] and s2.plays.tolist() == [2, 0, 0]
    assert s.plays.tolist() == [1, 0, 0]  # previous state untouched
    with pytest.raises(InvalidInput):
        update(s, 3, True)


def test_state_validation():
    with pytest.raises(InvalidInput):
        UcbtState(np.array([2]), np.array([1]), 2)
    with pytest.raises(InvalidInput):
        UcbtState(np.array([0, 0]), np.array([1, 1]), 2)
    with pytest.raises(InvalidInput):
        UcbtState.fresh(0)


def test_tie_break_prefers_higher_mean():
    # t = 11: one play is too few to pull either arm below the cap
    s = state([0, 1, 0], [1, 1, 8])
    assert ucbt_score(s, 0) == ucbt_score(s, 1) == 1.0
    assert select_arm(s) == 1


def test_tie_break_unplayed_first():
    s = state([1, 0, 0], [1, 0, 0])
    assert ucbt_score(s, 0) == 1.0
    assert select_arm(s) == 1


def test_checkpoints():
    assert checkpoints(8).tolist() == [1, 2, 4, 8]
    assert checkpoints(10).tolist() == [1, 2, 4, 8, 10]
    assert checkpoints(1).tolist() == [1]


def test_run_online_learns_deterministic_winner():
    run = run_online(UcbtState.fresh(2), lambda arm, g, rng: arm == 0, 128)
    assert run.losing_rate[-1] <= 0.02
    assert run.arms[-64:] == [0] * 64
    assert run.iterations.tolist() == [1, 2, 4, 8, 16, 32, 64, 128]


def test_run_online_all_lose():
    run = run_online(UcbtState.fresh(3), lambda arm, g, rng: False, 64)
    assert run.losing_rate[-1] == 1.0
    fast = run_online(UcbtState.fresh(3), np.zeros(3), 64)
    assert fast.losing_rate[-1] == 1.0


def test_run_online_probability_vector_matches_callable_semantics():
    run = run_online(UcbtState.fresh(2), np.array([1.0, 0.0]), 128, rng_seed=4)
    assert run.state.t == 129
    assert run.state.plays.sum() == 128
    assert run.losing_rate[-1] <= 0.02
    with pytest.raises(InvalidInput):
        run_online(UcbtState.fresh(2), np.array([1.0]), 8)
    with pytest.raises(InvalidInput):
        run_online(UcbtState.fresh(2), np.array([1.0, 0.0]), 0)


def test_run_online_resumes_from_state():
    s = update(UcbtState.fresh(2), 1, False)
    run = run_online(s, np.array([0.8, 0.2]), 50, rng_seed=1)
    assert run.state.t == 52


def test_bernoulli_arms_concentrate():
    # pilot run: mean share 0.9988, worst replication 0.9956
    curve = learning_curve([0.9, 0.5], 1 << 13, 1000, seed=0)
    share = curve.final_plays[:, 0] / curve.final_plays.sum(axis=1)
    assert share.mean() >= 0.95


def test_learning_curve_csv_and_shapes():
    curve = learning_curve(np.array([[0.2, 0.7], [0.6, 0.1]]), 64, 2, seed=3)
    assert curve.replications == 2
    assert curve.iterations.tolist() == [1, 2, 4, 8, 16, 32, 64]
    lines = curve.to_csv().splitlines()
    assert lines[0].startswith("iteration,losing_rate_mean")
    assert len(lines) == 8
    with pytest.raises(InvalidInput):
        learning_curve(np.ones((3, 2)) * 0.5, 8, 2)


@given(
    st.lists(st.tuples(st.integers(0, 40), st.integers(0, 40)), min_size=1, max_size=8),
    st.integers(0, 500),
)
def test_scores_in_unit_interval(pairs, extra_t):
    wins = [min(a, b) for a, b in pairs]
    plays = [max(a, b) for a, b in pairs]
    s = UcbtState(np.array(wins), np.array(plays), sum(plays) + 1)
    for i in range(len(pairs)):
        assert 0.0 <= ucbt_score(s, i) <= 1.0


@given(st.lists(st.tuples(st.integers(0, 4), st.booleans()), min_size=1, max_size=100))
def test_update_preserves_counting(moves):
    s = UcbtState.fresh(5)
    for arm, won in moves:
        s = update(s, arm, won)
        assert s.plays.sum() == s.t - 1
        assert np.all(s.wins <= s.plays) and np.all(s.wins >= 0)


@given(st.integers(1, 12), st.integers(0, 2**31))
def test_unplayed_arm_never_passed_over(k, seed):
    """Among arms with score exactly 1, an unplayed arm beats a played one."""
    gen = np.random.default_rng(seed)
    s = UcbtState.fresh(k)
    for _ in range(3 * k):
        arm = select_arm(s)
        scores = [ucbt_score(s, i) for i in range(k)]
        unplayed_top = [i for i in range(k) if s.plays[i] == 0 and scores[i] == 1.0]
        if unplayed_top:
            assert s.plays[arm] == 0
        s = update(s, arm, bool(gen.random() < 0.5))
    assert np.all(s.plays > 0)
