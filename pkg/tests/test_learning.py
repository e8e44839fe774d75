from collections import Counter

import numpy as np
import pytest
from scipy.stats import chisquare

from cce_learning.game import Game, example1_game
from cce_learning.learning import (
    AgentState,
    C,
    D,
    LearnerConfig,
    RngBundle,
    acceptance_select,
    contentment_probability,
    evaluation_phase,
    periods_for_steps,
    run_period,
    sample_transitions,
    simulate,
    state_update,
    trial_select,
)
from cce_learning.signals import Strategy, enumerate_strategies

from conftest import constant_game

T, M, B = 0, 1, 2
L, R = 0, 2
CFG = LearnerConfig(epsilon=0.1, delta=0.05, c=2.25)


def test_config_validation():
    with pytest.raises(ValueError):
        LearnerConfig(epsilon=1.0)
    with pytest.raises(ValueError):
        LearnerConfig(delta=-0.1)
    with pytest.raises(ValueError):
        LearnerConfig(omega=0)
    with pytest.raises(ValueError):
        LearnerConfig(c=2.0).for_game(example1_game())
    assert LearnerConfig().for_game(example1_game()).c == 2.25
    assert LearnerConfig.theoretical_phase_len(0.3, 2, 2.25) == 752  # ceil(0.3 ** -5.5)


def test_acceptance_rule():
    sb, st = Strategy((T,)), Strategy((B,))
    assert acceptance_select(C, sb, st, 0.5, 0.6, 0.05) == st
    assert acceptance_select(C, sb, st, 0.5, 0.55, 0.05) == sb  # strict improvement only
    assert acceptance_select(C, sb, st, 0.5, 0.54, 0.05) == sb
    assert acceptance_select(D, sb, st, 0.9, 0.1, 0.05) == st


def test_content_update_rules():
    rng = np.random.default_rng(0)
    sb, st = Strategy((T,)), Strategy((B,))
    # experimented: stays content with the accepted strategy
    assert state_update(C, sb, st, st, 0.5, 0.1, CFG, rng) == AgentState(st, C)
    # payoff fell by more than delta
    assert state_update(C, sb, sb, sb, 0.5, 0.4, CFG, rng) == AgentState(sb, D)
    zero = LearnerConfig(epsilon=0.0, delta=0.05, c=2.25)
    assert state_update(C, sb, sb, sb, 0.5, 0.46, zero, rng) == AgentState(sb, C)


def test_contentment_probability():
    assert contentment_probability(0.1, 0.6) == pytest.approx(0.1**0.4)
    assert contentment_probability(0.1, 1.0) == 1.0
    assert contentment_probability(0.0, 1.0) == 0.0
    rng = np.random.default_rng(5)
    s = Strategy((T,))
    draws = [state_update(D, s, s, s, 0.2, 0.6, CFG, rng).mood is C for _ in range(100_000)]
    assert np.mean(draws) == pytest.approx(0.398, abs=0.01)


def test_discontent_trials_uniform():
    strategies = enumerate_strategies(3, 2)
    rng = np.random.default_rng(1)
    state = AgentState(strategies[0], D)
    counts = Counter(trial_select(state, CFG, rng, strategies, 3) for _ in range(100_000))
    observed = [counts[s] for s in strategies]
    assert chisquare(observed).pvalue > 0.01


def test_content_experiments_are_constant():
    strategies = enumerate_strategies(3, 2)
    cfg = LearnerConfig(epsilon=0.5, c=1.0)
    rng = np.random.default_rng(2)
    base = Strategy((T, B))
    trials = [trial_select(AgentState(base, C), cfg, rng, strategies, 3) for _ in range(40_000)]
    changed = [t for t in trials if t != base]
    assert all(t.is_constant for t in changed)
    assert len(changed) / len(trials) == pytest.approx(0.5, abs=0.01)
    assert chisquare(list(Counter(changed).values())).pvalue > 0.01


def test_evaluation_concentrates():
    game = example1_game()
    rng = np.random.default_rng(3)
    u = evaluation_phase(game, (Strategy((T, B)), Strategy((R, L))), rng, 10_000)
    assert u == pytest.approx([0.8, 0.8], abs=0.02)


def test_determinism():
    game = example1_game()
    cfg = LearnerConfig(epsilon=0.1, periods=50, seed=7)
    a = simulate(game, cfg)
    b = simulate(game, cfg)
    assert [r.accepted for r in a.records] == [r.accepted for r in b.records]
    assert np.array_equal(a.phase_at_target, b.phase_at_target)
    c = simulate(game, LearnerConfig(epsilon=0.1, periods=50, seed=8))
    assert [r.accepted for r in a.records] != [r.accepted for r in c.records]


def test_signal_is_shared_not_forked():
    # with both agents on (T,B) / (R,L) the payoffs are perfectly coordinated
    game = example1_game()
    cfg = LearnerConfig(epsilon=0.0, delta=0.0).for_game(game)
    state = (AgentState(Strategy((T, B)), C), AgentState(Strategy((R, L)), C))
    rngs = RngBundle.from_seed(0, 2)
    _, rec = run_period(game, state, cfg, rngs)
    # shared signal: every step lands on (T,R) or (B,L), each worth 0.75 or 0.85
    assert 0.75 <= rec.u_b[0] <= 0.85
    assert rec.u_b[0] + rec.u_b[1] == pytest.approx(1.6)
    # forked signals would put mass on zero-payoff cells
    z1, z2 = np.random.default_rng(1).random(5000), np.random.default_rng(2).random(5000)
    a = np.ravel_multi_index((Strategy((T, B)).actions_for(z1), Strategy((R, L)).actions_for(z2)), game.shape)
    assert game.payoffs[:, a].sum(axis=0).mean() < 1.0


def test_unperturbed_fixed_points():
    game = example1_game()
    cfg = LearnerConfig(epsilon=0.0, delta=0.0).for_game(game)
    rngs = RngBundle.from_seed(4, 2)
    content = (AgentState(Strategy((T,)), C), AgentState(Strategy((M,)), C))
    for _ in range(20):
        nxt, _ = run_period(game, content, cfg, rngs)
        assert nxt == content
    state = (AgentState(Strategy((T,)), D), AgentState(Strategy((L,)), D))
    for _ in range(20):
        state, _ = run_period(game, state, cfg, rngs)
        assert all(a.mood is D for a in state)


def test_learning_rejects_out_of_range():
    g = Game.from_table((("a", "b"), ("c",)), [[[2], [0]], [[0], [0]]])
    with pytest.raises(ValueError):
        simulate(g, LearnerConfig(periods=1))


def test_simulation_accounting():
    game = example1_game()
    cfg = LearnerConfig(epsilon=0.1, periods=periods_for_steps(1000, 50))
    res = simulate(game, cfg, horizon=1000)
    assert res.phase_at_target.shape == (7, 3)
    assert res.step_at_target().size == 1000
    assert res.summary["steps"] == 1000
    assert len(res.records) == 7
    assert 0 <= res.summary["fraction_at_target"] <= 1


def test_constant_game_every_state_is_target():
    g = constant_game(1)
    res = simulate(g, LearnerConfig(epsilon=0.1, periods=5))
    assert res.fraction_at_target() == 1.0


def _one_period_frequencies(game, state, cfg, reps, seed):
    strategies = [enumerate_strategies(m, cfg.omega) for m in game.shape]
    index = [{s: j for j, s in enumerate(ss)} for ss in strategies]
    counts = Counter()
    for r in range(reps):
        nxt, _ = run_period(game, state, cfg, RngBundle.from_seed(seed + r, game.n), strategies)
        counts[tuple((index[i][a.baseline], a.mood is C) for i, a in enumerate(nxt))] += 1
    return counts


def test_batch_sampler_matches_run_period():
    game = example1_game()
    cfg = LearnerConfig(epsilon=0.4, delta=0.1, phase_len=5).for_game(game)
    state = (AgentState(Strategy((T,)), D), AgentState(Strategy((L, R)), C))
    reps = 4000
    slow = _one_period_frequencies(game, state, cfg, reps, 0)
    base, content = sample_transitions(game, state, cfg, np.random.default_rng(9), 40_000)
    fast = Counter(
        tuple((int(b), bool(c)) for b, c in zip(brow, crow)) for brow, crow in zip(base, content)
    )
    for key in set(slow) | set(fast):
        p_slow, p_fast = slow[key] / reps, fast[key] / 40_000
        sigma = np.sqrt(max(p_slow, p_fast, 1 / reps) * (1 - min(p_slow, p_fast)) / reps)
        assert abs(p_slow - p_fast) <= 5 * sigma, key
