"""Stochastic stability of the learning dynamics.

The recurrent classes of the unperturbed process are the all-content states
(one singleton per joint strategy) and one class holding every all-discontent
state. Node ``i < m`` of a resistance graph is the all-content state for
profile ``i``; node ``m`` is the all-discontent class.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .arborescence import INF, is_strongly_connected, min_in_arborescence_cost, shortest_path_closure
from .equilibria import cce_check
from .game import Game, JointDistribution, expected_utility, to_fraction
from .learning import (
    AgentState,
    C,
    D,
    LearnerConfig,
    Mood,
    PopulationState,
    acceptance_select,
    sample_transitions,
    state_update,
)
from .signals import Strategy, enumerate_profiles, joint_distribution, strategy_sets

MAX_STATES = 10**5


class UnderSampledError(RuntimeError):
    """No transitions were observed within the sample budget."""


@dataclass(frozen=True)
class StateSpace:
    """All population states, each agent holding (strategy index, mood)."""

    strategies: list[list[Strategy]]

    @property
    def radices(self) -> tuple[int, ...]:
        return tuple(2 * len(s) for s in self.strategies)

    @property
    def size(self) -> int:
        return math.prod(self.radices)

    def encode(self, state: Sequence[tuple[int, Mood]]) -> int:
        digits = [2 * j + (0 if m is C else 1) for j, m in state]
        return int(np.ravel_multi_index(digits, self.radices))

    def decode(self, index: int) -> tuple[tuple[int, Mood], ...]:
        digits = np.unravel_index(index, self.radices)
        return tuple((int(d) // 2, C if d % 2 == 0 else D) for d in digits)

    def population(self, index: int) -> PopulationState:
        return tuple(AgentState(self.strategies[i][j], m) for i, (j, m) in enumerate(self.decode(index)))


@dataclass(frozen=True)
class RecurrentClasses:
    game: Game
    omega: int
    strategies: list[list[Strategy]]
    profiles: list[tuple[Strategy, ...]]
    utilities: list[tuple[Fraction, ...]]
    distributions: list[JointDistribution]
    c_star: frozenset[int]

    @property
    def num_content(self) -> int:
        return len(self.profiles)

    @property
    def d0(self) -> int:
        return len(self.profiles)

    @property
    def num_nodes(self) -> int:
        return len(self.profiles) + 1

    def welfare(self, x: int) -> Fraction:
        return sum(self.utilities[x], Fraction(0))

    def entry_resistance(self, x: int) -> Fraction:
        return sum((1 - u for u in self.utilities[x]), Fraction(0))

    def label(self, node: int) -> str:
        if node == self.d0:
            return "D0"
        acts = self.game.action_sets
        return "(" + "|".join(
            ",".join(acts[i][a] for a in s.actions) for i, s in enumerate(self.profiles[node])
        ) + ")"

    def content_state(self, x: int) -> PopulationState:
        return tuple(AgentState(s, C) for s in self.profiles[x])

    def discontent_state(self) -> PopulationState:
        return tuple(AgentState(s[0], D) for s in self.strategies)


def enumerate_recurrent_classes(game: Game, omega: int) -> RecurrentClasses:
    profiles = enumerate_profiles(game, omega)
    dists = [joint_distribution(game, p) for p in profiles]
    utils = [expected_utility(game, q, exact=True) for q in dists]
    star = frozenset(k for k, q in enumerate(dists) if cce_check(game, q).is_cce)
    return RecurrentClasses(game, omega, strategy_sets(game, omega), profiles, utils, dists, star)


@dataclass(frozen=True)
class ResistanceGraph:
    """Exact class-to-class resistances stored as integers over a common denominator."""

    scaled: np.ndarray
    scale: int
    labels: list[str]

    @property
    def num_nodes(self) -> int:
        return self.scaled.shape[0]

    def weight(self, i: int, j: int) -> Fraction | None:
        w = self.scaled[i, j]
        return None if w >= INF else Fraction(int(w), self.scale)


def _scaled(matrix: list[list[Fraction | None]]) -> tuple[np.ndarray, int]:
    dens = [w.denominator for row in matrix for w in row if w is not None]
    scale = math.lcm(*dens) if dens else 1
    n = len(matrix)
    out = np.full((n, n), INF, dtype=np.int64)
    for i, row in enumerate(matrix):
        for j, w in enumerate(row):
            if w is not None:
                out[i, j] = int(w * scale)
    return out, scale


def one_step_resistances(classes: RecurrentClasses, c) -> list[list[Fraction | None]]:
    """Direct edges used by the tree accounting: leaving an all-content state
    toward D0 costs c (2c from a CCE state), and D0 enters x at sum_i (1 - U_i(s))."""
    c = to_fraction(c)
    m = classes.num_content
    mat: list[list[Fraction | None]] = [[None] * (m + 1) for _ in range(m + 1)]
    for x in range(m):
        mat[x][m] = 2 * c if x in classes.c_star else c
        mat[m][x] = classes.entry_resistance(x)
    return mat


def build_resistance_graph(classes: RecurrentClasses, c) -> ResistanceGraph:
    """Complete class graph whose weights are minimal path resistances over the one-step edges."""
    scaled, scale = _scaled(one_step_resistances(classes, c))
    closed = shortest_path_closure(scaled)
    labels = [classes.label(k) for k in range(classes.num_nodes)]
    return ResistanceGraph(closed, scale, labels)


@dataclass(frozen=True)
class PotentialReport:
    potentials: tuple[Fraction, ...]
    argmin: tuple[int, ...]
    method: str


def _report(potentials: Sequence[Fraction], method: str) -> PotentialReport:
    lo = min(potentials)
    return PotentialReport(tuple(potentials), tuple(k for k, g in enumerate(potentials) if g == lo), method)


def stochastic_potentials_arborescence(graph: ResistanceGraph) -> PotentialReport:
    if not is_strongly_connected(graph.scaled):
        raise ValueError("resistance graph is not strongly connected")
    pots = [
        Fraction(min_in_arborescence_cost(graph.scaled, root), graph.scale)
        for root in range(graph.num_nodes)
    ]
    return _report(pots, "arborescence")


def stochastic_potentials_closed_form(classes: RecurrentClasses, c) -> PotentialReport:
    c = to_fraction(c)
    n_star = len(classes.c_star)
    n_rest = classes.num_content - n_star
    pots = []
    for x in range(classes.num_content):
        if x in classes.c_star:
            pots.append(n_rest * c + 2 * c * (n_star - 1) + classes.entry_resistance(x))
        else:
            pots.append((n_rest - 1) * c + 2 * c * n_star + classes.entry_resistance(x))
    pots.append(c * n_rest + 2 * c * n_star)
    return _report(pots, "closed-form")


@dataclass(frozen=True)
class StabilityPrediction:
    stable: tuple[int, ...]
    predicted: tuple[int, ...]
    branch: int  # 1: a realizable CCE exists, 2: none does
    matches: bool
    report: PotentialReport
    distributions: list[JointDistribution] = field(default_factory=list)


def stochastically_stable_states(classes: RecurrentClasses, c, report: PotentialReport | None = None) -> StabilityPrediction:
    """Minimum-potential classes, checked against the efficient-target prediction."""
    if report is None:
        report = stochastic_potentials_arborescence(build_resistance_graph(classes, c))
    pool = sorted(classes.c_star) if classes.c_star else list(range(classes.num_content))
    best = max(classes.welfare(x) for x in pool)
    predicted = tuple(x for x in pool if classes.welfare(x) == best)
    stable = report.argmin
    dists = [classes.distributions[x] for x in stable if x != classes.d0]
    return StabilityPrediction(
        stable, predicted, 1 if classes.c_star else 2, set(stable) == set(predicted), report, dists
    )


# -- unperturbed process --


def unperturbed_transitions(game: Game, omega: int) -> tuple[StateSpace, csr_matrix]:
    """Support of the epsilon = 0 chain over all population states.

    Phase averages are replaced by exact expected payoffs and the acceptance
    threshold delta is 0; the per-agent rules are those of the learning module.
    """
    strategies = strategy_sets(game, omega)
    space = StateSpace(strategies)
    if space.size > MAX_STATES:
        raise ValueError("state space too large for exhaustive construction")
    config = LearnerConfig(epsilon=0.0, delta=0.0, omega=omega).for_game(game)
    rng = np.random.default_rng(0)  # every branch below has probability 0 or 1
    util_cache: dict[tuple[Strategy, ...], tuple[float, ...]] = {}

    def utility(profile):
        if profile not in util_cache:
            util_cache[profile] = tuple(
                float(u) for u in expected_utility(game, joint_distribution(game, profile), exact=True)
            )
        return util_cache[profile]

    rows, cols = [], []
    for x in range(space.size):
        agents = space.population(x)
        base = tuple(a.baseline for a in agents)
        u_b = utility(base)
        choices = [strategies[i] if a.mood is D else [a.baseline] for i, a in enumerate(agents)]
        targets = set()
        for trial in itertools.product(*choices):
            u_t = utility(trial)
            accepted = tuple(
                acceptance_select(a.mood, base[i], trial[i], u_b[i], u_t[i], config.delta)
                for i, a in enumerate(agents)
            )
            u_a = utility(accepted)
            nxt = [
                state_update(a.mood, base[i], trial[i], accepted[i], u_b[i], u_a[i], config, rng)
                for i, a in enumerate(agents)
            ]
            targets.add(
                space.encode([(strategies[i].index(s.baseline), s.mood) for i, s in enumerate(nxt)])
            )
        rows.extend([x] * len(targets))
        cols.extend(sorted(targets))
    adj = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(space.size, space.size))
    return space, adj


def closed_classes(adj: csr_matrix) -> list[frozenset[int]]:
    """Strongly connected components with no edge leaving them."""
    ncomp, labels = connected_components(adj, directed=True, connection="strong")
    coo = adj.tocoo()
    leaves = np.zeros(ncomp, dtype=bool)
    leaves[labels[coo.row][labels[coo.row] != labels[coo.col]]] = True
    return [frozenset(np.flatnonzero(labels == k).tolist()) for k in range(ncomp) if not leaves[k]]


def expected_recurrent_classes(space: StateSpace) -> list[frozenset[int]]:
    """Expected recurrent classes: every all-content state alone, all all-discontent states together."""
    content, discontent = [], set()
    for x in range(space.size):
        moods = {m for _, m in space.decode(x)}
        if moods == {C}:
            content.append(frozenset([x]))
        elif moods == {D}:
            discontent.add(x)
    return content + [frozenset(discontent)]


# -- Monte-Carlo resistance estimates --


@dataclass(frozen=True)
class ResistanceFit:
    slope: float
    stderr: float
    epsilons: tuple[float, ...]
    probabilities: tuple[float, ...]
    samples: tuple[int, ...]
    hits: tuple[int, ...]


def empirical_resistance(
    classes: RecurrentClasses,
    config: LearnerConfig,
    source: int,
    target: int | None,
    epsilons: Sequence[float],
    seed: int = 0,
    min_hits: int = 400,
    max_samples: int = 2_000_000,
    chunk: int = 20_000,
    delta_equals_epsilon: bool = True,
) -> ResistanceFit:
    """Fit the exponent r in P(source -> target) ~ eps**r over one period.

    ``target=None`` counts any departure from ``source``. Sampling for each
    epsilon continues in chunks until ``min_hits`` transitions are seen or
    ``max_samples`` is reached.
    """
    game = classes.game
    config = replace(config, omega=classes.omega).for_game(game)
    start = classes.discontent_state() if source == classes.d0 else classes.content_state(source)
    index = [{s: j for j, s in enumerate(ss)} for ss in classes.strategies]
    start_idx = np.array([index[i][a.baseline] for i, a in enumerate(start)])

    def hit(base: np.ndarray, content: np.ndarray) -> np.ndarray:
        if target is None:
            if source == classes.d0:
                return content.any(axis=1)
            return ~(content.all(axis=1) & (base == start_idx).all(axis=1))
        if target == classes.d0:
            return ~content.any(axis=1)
        want = np.array([index[i][s] for i, s in enumerate(classes.profiles[target])])
        return content.all(axis=1) & (base == want).all(axis=1)

    rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(len(epsilons))]
    probs, samples, hits = [], [], []
    for eps, rng in zip(epsilons, rngs):
        cfg = replace(config, epsilon=eps, delta=eps if delta_equals_epsilon else config.delta)
        total = count = 0
        while count < min_hits and total < max_samples:
            size = min(chunk, max_samples - total)
            base, content = sample_transitions(game, start, cfg, rng, size, classes.strategies)
            count += int(hit(base, content).sum())
            total += size
        if count == 0:
            raise UnderSampledError(f"no transitions observed at epsilon={eps} in {total} samples")
        probs.append(count / total)
        samples.append(total)
        hits.append(count)

    x = np.log(np.asarray(epsilons, dtype=float))
    y = np.log(np.asarray(probs))
    # var(log p_hat) ~ (1 - p) / hits, floored at one sample's worth
    w = np.asarray(hits, dtype=float) / np.maximum(1 - np.asarray(probs), 1 / np.asarray(samples))
    X = np.column_stack([np.ones_like(x), x])
    cov = np.linalg.inv(X.T @ (w[:, None] * X))
    beta = cov @ X.T @ (w * y)
    return ResistanceFit(
        float(beta[1]), float(np.sqrt(cov[1, 1])), tuple(map(float, epsilons)), tuple(probs), tuple(samples), tuple(hits)
    )
