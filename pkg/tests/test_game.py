import math

import numpy as np
import pytest

from dynomd import game as G
from dynomd.errors import ConfigError, ConvergenceError, DimensionError, DomainError

from oracles import game_value_grid

PENNIES = [[1.0, -1.0], [-1.0, 1.0]]


def test_default_L():
    assert G.default_L(10, 2) == 1 / math.sqrt(math.log(200))
    assert G.default_L(1, 1) == 1.0


def test_game_step_size_examples():
    assert G.game_step_size(1.0, 10, 2, 0.0, 0.0) == 1 / 32
    assert G.game_step_size(1.0, 10, 2, 1.0, 4.0) == 1 / 32
    assert G.game_step_size(1 / 32, 10, 2, 1.0, 4.0) == pytest.approx(math.log(200) / 32 / 3, rel=1e-15)
    with pytest.raises(DomainError):
        G.game_step_size(1.0, 10, 2, 4.0, 1.0)


def _softmax_step(x, g, eta):
    w = np.asarray(x) * np.exp(-eta * np.asarray(g))
    return w / w.sum()


def test_player_update_first_round():
    st = G.PlayerState.initial(2, 10, 1.0)
    np.testing.assert_allclose(st.x_play, [0.5, 0.5])
    assert st.eta == 1 / 32
    g = np.array([1.0, 0.0])
    x_next, st2 = G.player_update(st, g)
    xh = _softmax_step([0.5, 0.5], g, 1 / 32)
    xm = 0.99 * xh + 0.01 / 2
    np.testing.assert_allclose(st2.x_hat, xh, atol=1e-16)
    np.testing.assert_allclose(st2.x_hat_mixed, xm, atol=1e-16)
    assert st2.dev_acc == 1.0 and st2.dev_acc_prev == 0.0
    # log(200) / (1 + 0) far exceeds the cap
    assert st2.eta == 1 / 32
    np.testing.assert_allclose(x_next, _softmax_step(xm, g, 1 / 32), atol=1e-16)


def test_player_update_with_own_prediction():
    st = G.PlayerState.initial(3, 5, 0.5)
    x_next, st2 = G.player_update(st, [0.3, -0.2, 0.1], predicted=[0.0, 0.0, 0.0])
    np.testing.assert_allclose(x_next, st2.x_hat_mixed, atol=1e-16)
    with pytest.raises(DimensionError):
        G.player_update(st, [0.1, 0.2])


def test_mixing_floor():
    sched = G.random_schedule(400, 3, 4, 3, seed=2)
    tr = G.run_honest_game(sched)
    assert tr.x_hat_mixed.min() >= tr.beta / 4 - 1e-12
    assert tr.f_hat_mixed.min() >= tr.beta / 3 - 1e-12


def test_minimax_known_values():
    assert G.minimax_value(PENNIES) == pytest.approx(0.0, abs=1e-6)
    assert G.minimax_value([[0.3, 0.3], [0.3, 0.3]]) == pytest.approx(0.3, abs=1e-6)
    sol = G.minimax_solution([[0.5, -0.2], [-0.3, 0.4]])
    # equalizer at x = (3/7, 4/7)
    assert sol.value == pytest.approx(0.1, abs=1e-6)
    assert sol.gap <= 1e-6
    np.testing.assert_allclose(sol.x, [3 / 7, 4 / 7], atol=1e-5)


@pytest.mark.parametrize("shape,seed", [((2, 2), 0), ((3, 2), 1), ((2, 3), 2), ((3, 3), 3), ((4, 3), 4)])
def test_minimax_matches_grid(shape, seed):
    A = np.random.default_rng(seed).uniform(-1, 1, shape)
    assert G.minimax_value(A) == pytest.approx(game_value_grid(A), abs=1e-4)


def test_minimax_pure_saddle():
    A = [[0.2, 0.9], [-0.5, 0.1]]
    sol = G.minimax_solution(A)
    assert sol.value == pytest.approx(0.2, abs=1e-6)


def test_minimax_errors():
    with pytest.raises(DomainError):
        G.minimax_value([[2.0]])
    with pytest.raises(ConvergenceError) as exc:
        G.minimax_solution(np.random.default_rng(0).uniform(-1, 1, (5, 5)), tol=1e-15, max_iter=300)
    assert exc.value.gap > 0


def test_honest_matches_prescribed_opponent_bitwise():
    sched = G.random_schedule(300, 3, 2, 2, seed=5)
    x0, f0 = [0.7, 0.3], [0.2, 0.5, 0.3]
    a = G.run_honest_game(sched, L=0.8, x0=x0, f0=f0)
    b = G.run_vs_adversary(sched, 0.8, G.PrescribedOpponent(f0=f0), x0=x0)
    for key in ("x", "f", "payoff", "eta", "eta_prime", "F", "A_acc"):
        assert getattr(a, key).tobytes() == getattr(b, key).tobytes(), key


def test_single_round_regret():
    tr = G.run_honest_game(G.GameSchedule.fixed([[0.4, -0.9], [1.0, 0.2]], 1))
    assert tr.T == 1
    assert tr.regret_against(G.best_constant_action(tr)) <= 2.0


def test_zero_matrix():
    tr = G.run_honest_game(G.GameSchedule.fixed(np.zeros((2, 3)), 50))
    assert np.all(tr.payoff == 0.0)
    np.testing.assert_allclose(tr.x, np.full((50, 3), 1 / 3), atol=1e-15)
    assert tr.honest_gap == pytest.approx(0.0, abs=1e-6)


def test_payoff_bounded():
    tr = G.run_vs_adversary(G.random_schedule(200, 3, 3, 4, seed=1), None, G.UniformRandomOpponent(4))
    assert np.abs(tr.payoff).max() <= 1.0


@pytest.mark.parametrize("opponent", [G.UniformRandomOpponent(1), G.GreedyOpponent()])
def test_dishonest_bound(opponent):
    sched = G.random_schedule(600, 3, 3, 2, seed=7)
    tr = G.run_vs_adversary(sched, None, opponent)
    u = G.best_constant_action(tr)
    assert tr.regret_against(u) <= tr.dishonest_rhs(0.0) + 1e-6
    U = G.best_switching_actions(tr)
    assert tr.regret_against(U) <= tr.dishonest_rhs(G.path_length(U)) + 1e-6


def test_dishonest_rhs_value():
    lt = math.log(200)
    expected = 2 * lt * 3 * (32 * 0.5 + 2 * 2 / (lt * 0.5)) + lt * 0.25 * 2
    assert G.dishonest_rhs(10, 2, 0.5, 1.0, 4.0) == pytest.approx(expected, rel=1e-15)
    with pytest.raises(DomainError):
        G.dishonest_rhs(1, 1, 1.0, 0.0, 0.0)


def test_opponent_protocol_violation():
    seq = np.tile([0.5, 0.5], (10, 1))
    seq[2] = [0.9, 0.9]
    with pytest.raises(DomainError, match="round 3"):
        G.run_vs_adversary(G.GameSchedule.fixed(PENNIES, 10), None, G.FixedSequence(seq))

    class Bad(G.GreedyOpponent):
        def act(self, t):
            return np.array([1.0, 1.0]) if t == 4 else super().act(t)

    with pytest.raises(DomainError, match="round 4"):
        G.run_vs_adversary(G.GameSchedule.fixed(PENNIES, 10), None, Bad())


def test_fixed_sequence_shape_checked():
    with pytest.raises(DimensionError):
        G.run_vs_adversary(G.GameSchedule.fixed(PENNIES, 10), None, G.FixedSequence(np.full((9, 2), 0.5)))


def test_piecewise_minimax():
    A = [[0.5, -0.2], [-0.3, 0.4]]
    sched = G.GameSchedule((A, PENNIES), (30, 20))
    tr = G.run_honest_game(sched)
    np.testing.assert_allclose(tr.minimax[:30], 0.1, atol=1e-6)
    np.testing.assert_allclose(tr.minimax[30:], 0.0, atol=1e-6)
    assert sched.switches == 1
    d = sched.drift()
    assert d[30] == pytest.approx(0.8) and d.sum() == pytest.approx(0.8)


def test_best_response_counts():
    tr = G.run_vs_adversary(G.GameSchedule.fixed(PENNIES, 40), 1.0,
                            G.FixedSequence(np.tile([[1.0, 0.0], [0.0, 1.0]], (20, 1))))
    # Player I's best vertex flips every round
    assert tr.c_T == 2 * 39


def test_lcon():
    tr = G.run_honest_game(G.GameSchedule.fixed(PENNIES, 100), L=60.0)
    assert tr.lcon
    assert tr.honest_gap <= tr.honest_rhs()
    assert not G.run_honest_game(G.GameSchedule.fixed(PENNIES, 100)).lcon


def test_schedule_construction():
    s = G.GameSchedule.from_sequence([PENNIES, PENNIES, np.zeros((2, 2)), PENNIES])
    assert s.durations == (2, 1, 1) and s.T == 4 and s.switches == 2
    np.testing.assert_array_equal(s.index, [0, 0, 1, 2])
    np.testing.assert_array_equal(s.matrix_at(3), np.zeros((2, 2)))
    with pytest.raises(DomainError):
        G.GameSchedule.fixed([[1.5, 0.0]], 3)
    assert G.GameSchedule.fixed([[1.0 + 1e-13, 0.0]], 3).T == 3
    with pytest.raises(DimensionError):
        G.GameSchedule((PENNIES, [[0.0]]), (1, 1))
    with pytest.raises(ConfigError):
        G.GameSchedule((PENNIES,), (0,))


def test_random_schedule():
    s = G.random_schedule(100, 2, 3, 4, seed=1)
    assert s.switches == 4 and s.T == 100 and (s.m, s.n) == (2, 3)
    assert np.array_equal(s.stack, G.random_schedule(100, 2, 3, 4, seed=1).stack)
    with pytest.raises(ConfigError):
        G.random_schedule(3, 2, 2, 3)


def test_schedule_io(tmp_path):
    s = G.random_schedule(20, 2, 2, 2, seed=0)
    p = tmp_path / "s.json"
    s.to_json(p)
    back = G.GameSchedule.from_json(p)
    assert back.durations == s.durations
    assert all(np.array_equal(a, b) for a, b in zip(back.matrices, s.matrices))
    c = tmp_path / "s.csv"
    c.write_text("duration,rows,cols,entries\n3,2,2,1,-1,-1,1\n2,2,2,0,0,0,0.5\n")
    cs = G.GameSchedule.from_csv(c)
    assert cs.durations == (3, 2)
    np.testing.assert_array_equal(cs.matrices[0], PENNIES)
    c.write_text("3,2,2,1,-1,-1\n")
    with pytest.raises(ConfigError, match="line 1"):
        G.GameSchedule.from_csv(c)
    p.write_text('{"matrices": [[[1, 0]]],\n "durations": [1,]}')
    with pytest.raises(ConfigError, match="line 2"):
        G.GameSchedule.from_json(p)


def test_transcript_csv(tmp_path):
    tr = G.run_honest_game(G.GameSchedule.fixed(PENNIES, 5))
    p = tmp_path / "g.csv"
    tr.to_csv(p)
    rows = p.read_text().splitlines()
    assert rows[0] == "t,block,x_0,x_1,f_0,f_1,payoff,eta,eta_prime,F,A_acc,minimax"
    assert len(rows) == 6
