import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import strategies as st

from cce_learning.game import Game, example1_game, shapley_game


@pytest.fixture
def ex1():
    return example1_game()


@pytest.fixture
def shapley_raw():
    return shapley_game("0.1")


def random_game(rng, sizes, denominator=20, name="random"):
    """Game with payoffs k/denominator, k uniform on 0..denominator."""
    n = len(sizes)
    total = int(np.prod(sizes))
    rows = [[Fraction(int(rng.integers(denominator + 1)), denominator) for _ in range(total)] for _ in range(n)]
    acts = tuple(tuple(f"a{i}{k}" for k in range(m)) for i, m in enumerate(sizes))
    return Game(acts, tuple(map(tuple, rows)), name)


def zero_game(sizes=(2, 2)):
    total = int(np.prod(sizes))
    acts = tuple(tuple(f"a{k}" for k in range(m)) for m in sizes)
    return Game(acts, tuple((Fraction(0),) * total for _ in sizes), "zero")


def constant_game(value, sizes=(2, 2)):
    total = int(np.prod(sizes))
    acts = tuple(tuple(f"a{k}" for k in range(m)) for m in sizes)
    return Game(acts, tuple((Fraction(value),) * total for _ in sizes), "constant")


@st.composite
def games(draw, max_players=3, max_actions=3, levels=4):
    n = draw(st.integers(2, max_players))
    sizes = [draw(st.integers(1, max_actions)) for _ in range(n)]
    total = int(np.prod(sizes))
    rows = [
        tuple(Fraction(draw(st.integers(0, levels)), levels) for _ in range(total)) for _ in range(n)
    ]
    acts = tuple(tuple(f"a{k}" for k in range(m)) for m in sizes)
    return Game(acts, tuple(rows), "hyp")


@st.composite
def distributions(draw, size):
    weights = [draw(st.integers(0, 5)) for _ in range(size)]
    if sum(weights) == 0:
        weights[draw(st.integers(0, size - 1))] = 1
    total = sum(weights)
    return tuple(Fraction(w, total) for w in weights)


def joint_actions(game):
    return itertools.product(*(range(k) for k in game.shape))


ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
