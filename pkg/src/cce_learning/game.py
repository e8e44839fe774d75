"""Finite strategic-form games and exact joint distributions.

Joint actions are indexed in mixed-radix order with player 0 most significant,
i.e. ``numpy.ravel_multi_index(a, shape)`` with C ordering.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

MAX_INTERDEPENDENCE_PLAYERS = 6
MAX_INTERDEPENDENCE_JOINT = 10**5


def to_fraction(x) -> Fraction:
    """Exact rational for ``x``; floats go through their shortest repr so 0.85 -> 17/20."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    xf = float(x)
    if not math.isfinite(xf):
        raise ValueError(f"non-finite payoff {x!r}")
    return Fraction(repr(xf))


@dataclass(frozen=True)
class Game:
    """A finite game ``(N, {A_i}, {U_i})`` with a dense payoff table.

    ``exact_payoffs[i][k]`` is player ``i``'s payoff at joint action index ``k``.
    The float table ``payoffs`` mirrors it for simulation.
    """

    action_sets: tuple[tuple[str, ...], ...]
    exact_payoffs: tuple[tuple[Fraction, ...], ...]
    name: str = ""
    payoffs: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        action_sets = tuple(tuple(str(a) for a in acts) for acts in self.action_sets)
        object.__setattr__(self, "action_sets", action_sets)
        if len(action_sets) < 2:
            raise ValueError("a game needs at least two players")
        for i, acts in enumerate(action_sets):
            if not acts:
                raise ValueError(f"player {i} has no actions")
            if len(set(acts)) != len(acts):
                raise ValueError(f"player {i} has duplicate action labels")
        exact = tuple(tuple(to_fraction(u) for u in row) for row in self.exact_payoffs)
        object.__setattr__(self, "exact_payoffs", exact)
        if len(exact) != self.n:
            raise ValueError(f"expected payoffs for {self.n} players, got {len(exact)}")
        for i, row in enumerate(exact):
            if len(row) != self.num_joint:
                raise ValueError(
                    f"payoffs[{i}] has {len(row)} entries, expected {self.num_joint}"
                )
        table = np.array([[float(u) for u in row] for row in exact], dtype=float)
        table.setflags(write=False)
        object.__setattr__(self, "payoffs", table)

    @classmethod
    def from_table(cls, action_sets, payoffs, name: str = "") -> "Game":
        """Build from a nested ``(n, |A|)`` table or a tensor of shape ``(n, *sizes)``."""
        arr = np.asarray(payoffs, dtype=object)
        rows = [[to_fraction(u) for u in np.ravel(arr[i])] for i in range(arr.shape[0])]
        return cls(tuple(tuple(a) for a in action_sets), tuple(map(tuple, rows)), name)

    @property
    def n(self) -> int:
        return len(self.action_sets)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.action_sets)

    @property
    def num_joint(self) -> int:
        return math.prod(self.shape)

    @property
    def in_unit_range(self) -> bool:
        return all(0 <= u <= 1 for row in self.exact_payoffs for u in row)

    def tensor(self, player: int) -> np.ndarray:
        return self.payoffs[player].reshape(self.shape)

    def joint_index(self, actions: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(actions), self.shape))

    def joint_actions(self, index: int) -> tuple[int, ...]:
        return tuple(int(a) for a in np.unravel_index(index, self.shape))

    def all_joint_actions(self) -> Iterable[tuple[int, ...]]:
        return itertools.product(*(range(k) for k in self.shape))

    def action_index(self, player: int, label: str) -> int:
        try:
            return self.action_sets[player].index(label)
        except ValueError:
            raise ValueError(f"player {player} has no action {label!r}") from None

    def payoff(self, player: int, actions: Sequence[int]) -> Fraction:
        return self.exact_payoffs[player][self.joint_index(actions)]

    def welfare_of(self, actions: Sequence[int]) -> Fraction:
        k = self.joint_index(actions)
        return sum((row[k] for row in self.exact_payoffs), Fraction(0))


@dataclass(frozen=True)
class JointDistribution:
    """Exact probability vector over joint actions (mixed-radix order)."""

    masses: tuple[Fraction, ...]

    def __post_init__(self):
        masses = tuple(to_fraction(m) for m in self.masses)
        object.__setattr__(self, "masses", masses)
        if any(m < 0 for m in masses):
            raise ValueError("negative probability mass")
        if sum(masses, Fraction(0)) != 1:
            raise ValueError("masses must sum to exactly 1")

    @classmethod
    def point_mass(cls, game: Game, actions: Sequence[int]) -> "JointDistribution":
        m = [Fraction(0)] * game.num_joint
        m[game.joint_index(actions)] = Fraction(1)
        return cls(tuple(m))

    @classmethod
    def from_cells(cls, game: Game, cells: dict) -> "JointDistribution":
        """``cells`` maps action-index tuples (or label tuples) to masses."""
        m = [Fraction(0)] * game.num_joint
        for a, p in cells.items():
            idx = [
                game.action_index(i, x) if isinstance(x, str) else int(x)
                for i, x in enumerate(a)
            ]
            m[game.joint_index(idx)] += to_fraction(p)
        return cls(tuple(m))

    @classmethod
    def uniform(cls, size: int) -> "JointDistribution":
        return cls((Fraction(1, size),) * size)

    def __len__(self) -> int:
        return len(self.masses)

    def as_array(self) -> np.ndarray:
        return np.array([float(m) for m in self.masses])

    def support(self) -> dict[int, Fraction]:
        return {k: m for k, m in enumerate(self.masses) if m}


def _check_dim(game: Game, q) -> None:
    if len(q) != game.num_joint:
        raise ValueError(
            f"distribution has {len(q)} entries but the game has {game.num_joint} joint actions"
        )


def expected_utility(game: Game, q, exact: bool = False):
    """Per-player expected payoff under ``q``.

    With ``exact=True`` and a :class:`JointDistribution`, returns a tuple of
    Fractions; otherwise a float array.
    """
    _check_dim(game, q)
    if exact:
        if not isinstance(q, JointDistribution):
            q = JointDistribution(q)
        support = q.support()
        return tuple(
            sum((row[k] * m for k, m in support.items()), Fraction(0))
            for row in game.exact_payoffs
        )
    qa = q.as_array() if isinstance(q, JointDistribution) else np.asarray(q, dtype=float)
    return game.payoffs @ qa


def welfare(game: Game, q, exact: bool = False):
    eu = expected_utility(game, q, exact=exact)
    return sum(eu, Fraction(0)) if exact else float(np.sum(eu))


def is_interdependent(game: Game) -> tuple[bool, tuple[tuple[int, ...], frozenset[int]] | None]:
    """Exhaustive interdependence check.

    Returns ``(True, None)`` or ``(False, (a, J))`` where no player outside
    ``J`` is affected by any change of ``J``'s actions at ``a``.
    """
    if game.n > MAX_INTERDEPENDENCE_PLAYERS or game.num_joint > MAX_INTERDEPENDENCE_JOINT:
        raise ValueError("game too large for exhaustive interdependence check")
    shape = game.shape
    tensors = [game.tensor(i) for i in range(game.n)]
    players = range(game.n)
    for size in range(1, game.n):
        for J in itertools.combinations(players, size):
            varies = np.zeros([1 if j in J else shape[j] for j in players], dtype=bool)
            for i in players:
                if i in J:
                    continue
                t = tensors[i]
                spread = t.max(axis=J, keepdims=True) - t.min(axis=J, keepdims=True)
                varies |= spread > 0
            if not varies.all():
                rest = np.argwhere(~varies)[0]
                a = tuple(0 if j in J else int(rest[j]) for j in players)
                return False, (a, frozenset(J))
    return True, None


def normalize_payoffs(action_sets, raw_payoffs, name: str = "") -> Game:
    """Map each player's payoffs affinely onto [0, 1] (constant players go to 1/2)."""
    arr = np.asarray(raw_payoffs, dtype=object)
    rows = []
    for i in range(arr.shape[0]):
        vals = [to_fraction(u) for u in np.ravel(arr[i])]
        lo, hi = min(vals), max(vals)
        if lo == hi:
            rows.append(tuple(Fraction(1, 2) for _ in vals))
        else:
            rows.append(tuple((u - lo) / (hi - lo) for u in vals))
    return Game(tuple(tuple(a) for a in action_sets), tuple(rows), name)


def example1_game() -> Game:
    """Two-player 3x3 game whose efficient CCE mixes (T,R) and (B,L) equally."""
    row = [[0, 0, "0.85"], [1, 0, 0], ["0.75", 0, 0]]
    col = [[0, 1, "0.75"], [0, 0, 0], ["0.85", 0, 0]]
    return Game.from_table((("T", "M", "B"), ("L", "M", "R")), [row, col], "example1")


def shapley_game(eps: Fraction | float | str = "0.1", normalize: bool = False) -> Game:
    """Shapley-like cyclic game with off-cycle penalty ``-eps``."""
    e = to_fraction(eps)
    row = [[1, -e, 0], [0, 1, -e], [-e, 0, 1]]
    col = [[-e, 1, 0], [0, -e, 1], [1, 0, -e]]
    acts = (("T", "M", "B"), ("L", "M", "R"))
    if normalize:
        return normalize_payoffs(acts, [row, col], "shapley")
    return Game.from_table(acts, [row, col], "shapley")
