"""Signal-based strategies: maps from a common signal z in [0, 1] to actions.

A strategy ``(a^1, ..., a^w)`` splits [0, 1] into ``w`` equal intervals and plays
``a^k`` on the k-th one. Intervals are half-open except the last, which
includes z = 1.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .game import Game, JointDistribution

MAX_STRATEGIES = 10**5
MAX_PROFILES = 10**6


@dataclass(frozen=True, order=True)
class Strategy:
    actions: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(int(a) for a in self.actions))
        if not self.actions:
            raise ValueError("a strategy needs at least one interval")

    @property
    def omega(self) -> int:
        return len(self.actions)

    @property
    def is_constant(self) -> bool:
        return self.omega == 1

    def __call__(self, z):
        return strategy_action(self, z)

    def actions_for(self, z: np.ndarray) -> np.ndarray:
        """Vectorized evaluation over an array of signals."""
        k = np.minimum((np.asarray(z) * self.omega).astype(np.intp), self.omega - 1)
        return np.asarray(self.actions, dtype=np.intp)[k]


JointStrategy = tuple[Strategy, ...]


def strategy_action(s: Strategy, z) -> int:
    if not 0 <= z <= 1:
        raise ValueError(f"signal {z!r} outside [0, 1]")
    k = min(math.floor(z * s.omega), s.omega - 1)
    return s.actions[k]


def validate_strategy(s: Strategy, num_actions: int, omega_max: int | None = None) -> None:
    if omega_max is not None and s.omega > omega_max:
        raise ValueError(f"strategy granularity {s.omega} exceeds {omega_max}")
    if any(not 0 <= a < num_actions for a in s.actions):
        raise ValueError(f"strategy {s.actions} uses an action outside 0..{num_actions - 1}")


def joint_distribution(game: Game, profile: Sequence[Strategy]) -> JointDistribution:
    """Exact ``q(s)`` by counting cells of the common refinement grid."""
    if len(profile) != game.n:
        raise ValueError(f"expected {game.n} strategies, got {len(profile)}")
    for i, s in enumerate(profile):
        validate_strategy(s, game.shape[i])
    L = math.lcm(*(s.omega for s in profile))
    counts: dict[int, int] = {}
    for g in range(L):
        # cell midpoint (g + 1/2)/L lies in interval g // (L/w) of a width-w strategy
        a = tuple(s.actions[g // (L // s.omega)] for s in profile)
        k = game.joint_index(a)
        counts[k] = counts.get(k, 0) + 1
    masses = [Fraction(0)] * game.num_joint
    for k, c in counts.items():
        masses[k] = Fraction(c, L)
    return JointDistribution(tuple(masses))


def count_strategies(num_actions: int, omega: int) -> int:
    return sum(num_actions**w for w in range(1, omega + 1))


def enumerate_strategies(num_actions: int, omega: int) -> list[Strategy]:
    """All strategies of granularity 1..omega, ordered by granularity then lexicographically."""
    if omega < 1:
        raise ValueError("omega must be >= 1")
    if count_strategies(num_actions, omega) > MAX_STRATEGIES:
        raise ValueError("strategy set too large to enumerate")
    return [
        Strategy(acts)
        for w in range(1, omega + 1)
        for acts in itertools.product(range(num_actions), repeat=w)
    ]


def strategy_sets(game: Game, omega: int) -> list[list[Strategy]]:
    return [enumerate_strategies(k, omega) for k in game.shape]


def enumerate_profiles(game: Game, omega: int) -> list[JointStrategy]:
    sets = strategy_sets(game, omega)
    if math.prod(len(s) for s in sets) > MAX_PROFILES:
        raise ValueError("joint strategy set too large to enumerate")
    return [tuple(p) for p in itertools.product(*sets)]


def realizable_distributions(game: Game, omega: int) -> list[tuple[JointStrategy, JointDistribution]]:
    """Every profile in S paired with its exact joint distribution."""
    return [(p, joint_distribution(game, p)) for p in enumerate_profiles(game, omega)]


def parse_strategy(text: str, labels: Sequence[str]) -> Strategy:
    """Parse ``"T,B"`` against a player's action labels."""
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ValueError("empty strategy")
    try:
        return Strategy(tuple(list(labels).index(p) for p in parts))
    except ValueError:
        raise ValueError(f"unknown action in {text!r}; valid: {list(labels)}") from None


def format_strategy(s: Strategy, labels: Sequence[str]) -> str:
    return ",".join(labels[a] for a in s.actions)
