import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cce_learning.equilibria import (
    cce_check,
    efficient_cce,
    efficient_realizable,
    efficient_realizable_cce,
    learning_target,
)
from cce_learning.game import Game, JointDistribution, shapley_game, welfare

from conftest import games, random_game, zero_game


def solve_exact(A, b):
    """Gaussian elimination over the rationals; None if singular."""
    n = len(A)
    M = [list(map(Fraction, row)) + [Fraction(v)] for row, v in zip(A, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            return None
        M[col], M[piv] = M[piv], M[col]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col] / M[col][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return [M[r][n] / M[r][r] for r in range(n)]


def vertex_oracle(game):
    """Best welfare over CCE polytope vertices, found by exact enumeration.

    Constraints: gain rows <= 0, q >= 0, sum q = 1. A vertex is fixed by the
    equality plus (dim - 1) active inequalities.
    """
    m = game.num_joint
    rows = []
    for i in range(game.n):
        for dev in range(game.shape[i]):
            row = []
            for k in range(m):
                a = list(game.joint_actions(k))
                u = game.payoff(i, a)
                a[i] = dev
                row.append(game.payoff(i, a) - u)
            rows.append(row)
    ineq = rows + [[-Fraction(int(j == k)) for j in range(m)] for k in range(m)]
    best = None
    for active in itertools.combinations(range(len(ineq)), m - 1):
        A = [ineq[r] for r in active] + [[Fraction(1)] * m]
        q = solve_exact(A, [0] * (m - 1) + [1])
        if q is None or any(sum(r[j] * q[j] for j in range(m)) > 0 for r in ineq):
            continue
        w = sum(q[k] * game.welfare_of(game.joint_actions(k)) for k in range(m))
        best = w if best is None else max(best, w)
    return best


def test_certificate_examples(ex1):
    tl = JointDistribution.point_mass(ex1, (0, 0))
    cert = cce_check(ex1, tl)
    assert not cert.is_cce
    assert cert.worst_violation == pytest.approx(1.0)
    assert cert.violating == (0, 1)  # Row switches to M
    target = JointDistribution.from_cells(ex1, {("T", "R"): "1/2", ("B", "L"): "1/2"})
    assert cce_check(ex1, target).is_cce
    assert cce_check(ex1, target, tol=0).is_cce
    assert cce_check(ex1, target.as_array()).is_cce


def test_certificate_validation(ex1):
    with pytest.raises(ValueError):
        cce_check(ex1, np.ones(4) / 4)
    with pytest.raises(ValueError):
        cce_check(ex1, JointDistribution.uniform(9), tol=-1)


def test_example1_lp(ex1):
    sol = efficient_cce(ex1)
    assert sol.status == "optimal"
    assert sol.value == pytest.approx(1.6, abs=1e-8)
    assert cce_check(ex1, sol.q).is_cce
    assert sol.degenerate


def test_shapley_lp():
    sol = efficient_cce(shapley_game("0.1"))
    assert sol.value == pytest.approx(0.9, abs=1e-8)
    assert cce_check(shapley_game("0.1"), sol.q).is_cce


def test_example1_realizable(ex1):
    best = efficient_realizable_cce(ex1, 2)
    assert best.value == Fraction(8, 5)
    want = {
        JointDistribution.from_cells(ex1, {("T", "R"): "1/2", ("B", "L"): "1/2"}).masses,
    }
    assert best.target_set() == want
    assert len(best.profiles) == 2
    assert learning_target(ex1, 2).target_set() == want


def test_omega1_example1_has_pure_cce_targets(ex1):
    best = efficient_realizable_cce(ex1, 1)
    # pure CCE of Example 1 all have welfare 1
    assert best.value == 1


def test_no_realizable_cce_falls_back():
    # matching pennies: no pure CCE, so Omega = 1 has nothing
    g = Game.from_table((("H", "T"), ("H", "T")), [[[1, 0], [0, 1]], [[0, 1], [1, 0]]])
    assert efficient_realizable_cce(g, 1) is None
    fallback = learning_target(g, 1)
    assert fallback.value == 1
    assert fallback == efficient_realizable(g, 1)


def test_dominant_cell_game():
    g = Game.from_table((("a", "b"), ("c", "d")), [[[1, 0], [0, 0]], [[1, 0], [0, 0]]])
    sol = efficient_cce(g)
    assert sol.value == pytest.approx(2)
    assert sol.q[0] == pytest.approx(1)
    assert not sol.degenerate


def test_zero_game():
    g = zero_game((2, 3))
    sol = efficient_cce(g)
    assert sol.value == pytest.approx(0)
    assert cce_check(g, sol.q).is_cce


@pytest.mark.parametrize("seed", range(12))
def test_lp_matches_vertex_enumeration(seed):
    game = random_game(np.random.default_rng(seed), (2, 2))
    sol = efficient_cce(game, check_degenerate=False)
    assert sol.value == pytest.approx(float(vertex_oracle(game)), abs=1e-8)


@settings(max_examples=40, deadline=None)
@given(games(max_players=2, max_actions=2))
def test_lp_matches_vertex_enumeration_property(game):
    sol = efficient_cce(game, check_degenerate=False)
    assert sol.value == pytest.approx(float(vertex_oracle(game)), abs=1e-8)


@settings(max_examples=40, deadline=None)
@given(games(max_players=3, max_actions=2))
def test_lp_bounds(game):
    sol = efficient_cce(game, check_degenerate=False)
    assert np.all(sol.q >= 0)
    assert sol.q.sum() == pytest.approx(1)
    assert cce_check(game, sol.q).is_cce
    w = [game.welfare_of(a) for a in itertools.product(*(range(k) for k in game.shape))]
    assert float(min(w)) - 1e-9 <= sol.value <= float(max(w)) + 1e-9


@settings(max_examples=25, deadline=None)
@given(games(max_players=2, max_actions=2))
def test_realizable_below_lp_and_monotone(game):
    lp = efficient_cce(game, check_degenerate=False).value
    prev = None
    for omega in (1, 2):
        best = efficient_realizable_cce(game, omega)
        if best is None:
            assert prev is None
            continue
        assert float(best.value) <= lp + 1e-9
        for q in best.distributions:
            assert cce_check(game, q, tol=0).is_cce
            assert welfare(game, q, exact=True) == best.value
        if prev is not None:
            assert best.value >= prev
        prev = best.value
    # omega = 2 contains every omega = 1 profile
    assert float(efficient_realizable(game, 2).value) >= float(efficient_realizable(game, 1).value)
