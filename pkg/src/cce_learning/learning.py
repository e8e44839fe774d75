"""Payoff-based learning with a common random signal.

Each period has three phases of ``phase_len`` time steps (evaluation, trial,
acceptance). Every agent sees the same signal at each step; private choices
(experimentation, mood switches) come from per-agent streams.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .equilibria import learning_target
from .game import Game
from .signals import JointStrategy, Strategy, enumerate_strategies, joint_distribution


class Mood(enum.Enum):
    CONTENT = "C"
    DISCONTENT = "D"


C, D = Mood.CONTENT, Mood.DISCONTENT


@dataclass(frozen=True)
class AgentState:
    baseline: Strategy
    mood: Mood


PopulationState = tuple[AgentState, ...]


@dataclass(frozen=True)
class LearnerConfig:
    """Parameters of the dynamics.

    ``c`` defaults to ``n + 0.25`` once the game is known (see :meth:`for_game`).
    ``phase_len`` is explicit; :meth:`theoretical_phase_len` gives ``ceil(1/delta**(n c + 1))``.
    ``epsilon = 0`` runs the unperturbed process.
    """

    epsilon: float = 0.01
    delta: float = 0.14
    c: float | None = None
    omega: int = 2
    phase_len: int = 50
    periods: int = 1000
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.epsilon < 1:
            raise ValueError("epsilon must lie in [0, 1)")
        if not 0 <= self.delta < 1:
            raise ValueError("delta must lie in [0, 1)")
        if self.omega < 1:
            raise ValueError("omega must be >= 1")
        if self.phase_len < 1:
            raise ValueError("phase_len must be >= 1")
        if self.periods < 0:
            raise ValueError("periods must be >= 0")

    def for_game(self, game: Game) -> "LearnerConfig":
        c = game.n + 0.25 if self.c is None else self.c
        if c <= game.n:
            raise ValueError(f"c must exceed the number of players ({game.n}), got {c}")
        return replace(self, c=c)

    @staticmethod
    def theoretical_phase_len(delta: float, n: int, c: float) -> int:
        return math.ceil(1 / delta ** (n * c + 1))

    @property
    def period_len(self) -> int:
        return 3 * self.phase_len


def _require_c(config: LearnerConfig) -> float:
    if config.c is None:
        raise ValueError("config.c is unset; call config.for_game(game) first")
    return config.c


@dataclass
class RngBundle:
    """Stream 0 drives the shared signal; stream ``i + 1`` is agent ``i``'s private stream."""

    signal: np.random.Generator
    agents: list[np.random.Generator]

    @classmethod
    def from_seed(cls, seed: int, n: int) -> "RngBundle":
        streams = np.random.SeedSequence(seed).spawn(n + 1)
        gens = [np.random.default_rng(s) for s in streams]
        return cls(gens[0], gens[1:])


@dataclass(frozen=True)
class PeriodRecord:
    k: int
    baseline: JointStrategy
    trial: JointStrategy
    accepted: JointStrategy
    u_b: tuple[float, ...]
    u_t: tuple[float, ...]
    u_a: tuple[float, ...]
    mood_before: tuple[Mood, ...]
    mood_after: tuple[Mood, ...]


def phase_average(game: Game, profile: Sequence[Strategy], z: np.ndarray) -> np.ndarray:
    """Average payoff of each player when ``profile`` is played against signals ``z``."""
    acts = tuple(s.actions_for(z) for s in profile)
    idx = np.ravel_multi_index(acts, game.shape)
    return game.payoffs[:, idx].mean(axis=1)


def evaluation_phase(
    game: Game, baselines: Sequence[Strategy], signal: np.random.Generator, phase_len: int
) -> np.ndarray:
    return phase_average(game, baselines, signal.random(phase_len))


def trial_select(
    state: AgentState,
    config: LearnerConfig,
    rng: np.random.Generator,
    strategies: Sequence[Strategy],
    num_actions: int,
) -> Strategy:
    if state.mood is D:
        return strategies[int(rng.integers(len(strategies)))]
    if rng.random() < config.epsilon ** _require_c(config):
        # content agents only experiment with signal-independent actions
        return Strategy((int(rng.integers(num_actions)),))
    return state.baseline


def acceptance_select(
    mood: Mood, s_b: Strategy, s_t: Strategy, u_b: float, u_t: float, delta: float
) -> Strategy:
    if mood is D:
        return s_t
    return s_t if u_t > u_b + delta else s_b


def contentment_probability(epsilon: float, u_a: float) -> float:
    # the unperturbed process never lets a discontent agent settle
    return epsilon ** (1.0 - u_a) if epsilon > 0 else 0.0


def state_update(
    mood: Mood,
    s_b: Strategy,
    s_t: Strategy,
    s_a: Strategy,
    u_b: float,
    u_a: float,
    config: LearnerConfig,
    rng: np.random.Generator,
) -> AgentState:
    if mood is D:
        p = contentment_probability(config.epsilon, u_a)
        return AgentState(s_a, C if rng.random() < p else D)
    if s_t != s_b:
        return AgentState(s_a, C)
    if u_a < u_b - config.delta:
        return AgentState(s_b, D)
    drop = rng.random() < config.epsilon ** (2 * _require_c(config))
    return AgentState(s_b, D if drop else C)


def run_period(
    game: Game,
    state: PopulationState,
    config: LearnerConfig,
    rngs: RngBundle,
    strategies: Sequence[Sequence[Strategy]] | None = None,
    k: int = 0,
) -> tuple[PopulationState, PeriodRecord]:
    if strategies is None:
        strategies = [enumerate_strategies(m, config.omega) for m in game.shape]
    p = config.phase_len
    baseline = tuple(x.baseline for x in state)
    moods = tuple(x.mood for x in state)

    u_b = evaluation_phase(game, baseline, rngs.signal, p)
    trial = tuple(
        trial_select(x, config, rngs.agents[i], strategies[i], game.shape[i])
        for i, x in enumerate(state)
    )
    u_t = phase_average(game, trial, rngs.signal.random(p))
    accepted = tuple(
        acceptance_select(moods[i], baseline[i], trial[i], u_b[i], u_t[i], config.delta)
        for i in range(game.n)
    )
    u_a = phase_average(game, accepted, rngs.signal.random(p))
    new_state = tuple(
        state_update(moods[i], baseline[i], trial[i], accepted[i], u_b[i], u_a[i], config, rngs.agents[i])
        for i in range(game.n)
    )
    record = PeriodRecord(
        k,
        baseline,
        trial,
        accepted,
        tuple(float(u) for u in u_b),
        tuple(float(u) for u in u_t),
        tuple(float(u) for u in u_a),
        moods,
        tuple(x.mood for x in new_state),
    )
    return new_state, record


def random_discontent_state(
    strategies: Sequence[Sequence[Strategy]], rngs: RngBundle
) -> PopulationState:
    return tuple(
        AgentState(s[int(rngs.agents[i].integers(len(s)))], D) for i, s in enumerate(strategies)
    )


@dataclass
class SimulationResult:
    config: LearnerConfig
    records: list[PeriodRecord]
    phase_at_target: np.ndarray  # (periods, 3) bool
    final_state: PopulationState
    horizon: int | None = None
    summary: dict = field(default_factory=dict)

    def step_at_target(self) -> np.ndarray:
        flags = np.repeat(self.phase_at_target.ravel(), self.config.phase_len)
        return flags if self.horizon is None else flags[: self.horizon]

    def fraction_at_target(self, start: int | None = None, stop: int | None = None) -> float:
        flags = self.step_at_target()[start:stop]
        return float(flags.mean()) if flags.size else float("nan")


def periods_for_steps(steps: int, phase_len: int) -> int:
    return math.ceil(steps / (3 * phase_len))


def simulate(
    game: Game,
    config: LearnerConfig,
    initial: PopulationState | None = None,
    target: set | None = None,
    horizon: int | None = None,
    keep_records: bool = True,
) -> SimulationResult:
    """Run ``config.periods`` periods.

    ``target`` is a set of exact mass tuples; it defaults to the efficient
    realizable CCE distributions (or the efficient realizable ones if no
    realizable CCE exists). ``horizon`` truncates the per-step series, and the
    summary reports the fraction of steps at target over its last half.
    """
    if not game.in_unit_range:
        raise ValueError("learning requires payoffs in [0, 1]; normalize the game first")
    config = config.for_game(game)
    strategies = [enumerate_strategies(m, config.omega) for m in game.shape]
    rngs = RngBundle.from_seed(config.seed, game.n)
    if target is None:
        target = learning_target(game, config.omega).target_set()
    state = random_discontent_state(strategies, rngs) if initial is None else tuple(initial)

    hits: dict[JointStrategy, bool] = {}

    def at_target(profile: JointStrategy) -> bool:
        if profile not in hits:
            hits[profile] = joint_distribution(game, profile).masses in target
        return hits[profile]

    records: list[PeriodRecord] = []
    flags = np.zeros((config.periods, 3), dtype=bool)
    for k in range(config.periods):
        state, rec = run_period(game, state, config, rngs, strategies, k)
        flags[k] = (at_target(rec.baseline), at_target(rec.trial), at_target(rec.accepted))
        if keep_records:
            records.append(rec)

    result = SimulationResult(config, records, flags, state, horizon)
    total = flags.size * config.phase_len if horizon is None else horizon
    result.summary = {
        "steps": total,
        "fraction_at_target": result.fraction_at_target(),
        "fraction_last_half": result.fraction_at_target(total - total // 2, total),
    }
    return result


# -- batched one-period sampler, used for transition-probability estimates --


def _action_grid(strategies: Sequence[Strategy], omega: int) -> tuple[int, np.ndarray]:
    L = math.lcm(*range(1, omega + 1))
    grid = np.array([[s.actions[g // (L // s.omega)] for g in range(L)] for s in strategies], dtype=np.intp)
    return L, grid


def sample_transitions(
    game: Game,
    state: PopulationState,
    config: LearnerConfig,
    rng: np.random.Generator,
    size: int,
    strategies: Sequence[Sequence[Strategy]] | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Simulate one period from ``state`` for ``size`` independent replicas.

    Returns ``(baselines, content)``: strategy indices into each player's
    enumerated strategy list and a content flag, both of shape ``(size, n)``.
    Applies the same rules as :func:`run_period`, vectorized over replicas.
    """
    config = config.for_game(game)
    if strategies is None:
        strategies = [enumerate_strategies(m, config.omega) for m in game.shape]
    n, p, eps = game.n, config.phase_len, config.epsilon
    grids = [_action_grid(s, config.omega) for s in strategies]
    index = [{s: j for j, s in enumerate(ss)} for ss in strategies]

    def payoffs(idx: np.ndarray) -> np.ndarray:
        z = rng.random((size, p))
        acts = []
        for i, (L, grid) in enumerate(grids):
            cell = np.minimum((z * L).astype(np.intp), L - 1)
            acts.append(grid[idx[:, i][:, None], cell])
        joint = np.ravel_multi_index(tuple(acts), game.shape)
        return game.payoffs[:, joint].mean(axis=2).T  # (size, n)

    base = np.array([[index[i][x.baseline] for i, x in enumerate(state)]] * size, dtype=np.intp)
    content_before = np.array([x.mood is C for x in state])

    u_b = payoffs(base)
    trial = base.copy()
    for i in range(n):
        if content_before[i]:
            # constant strategies come first in the enumeration, index == action
            exp = rng.random(size) < eps ** config.c
            const = rng.integers(game.shape[i], size=size)
            trial[:, i] = np.where(exp, const, base[:, i])
        else:
            trial[:, i] = rng.integers(len(strategies[i]), size=size)
    u_t = payoffs(trial)
    accepted = trial.copy()
    for i in range(n):
        if content_before[i]:
            accepted[:, i] = np.where(u_t[:, i] > u_b[:, i] + config.delta, trial[:, i], base[:, i])
    u_a = payoffs(accepted)

    new_base = accepted.copy()
    content = np.zeros((size, n), dtype=bool)
    for i in range(n):
        draw = rng.random(size)
        if content_before[i]:
            experimented = trial[:, i] != base[:, i]
            keep = (u_a[:, i] >= u_b[:, i] - config.delta) & (draw >= eps ** (2 * config.c))
            content[:, i] = experimented | keep
            new_base[:, i] = np.where(experimented, accepted[:, i], base[:, i])
        else:
            prob = eps ** (1.0 - u_a[:, i]) if eps > 0 else np.zeros(size)
            content[:, i] = draw < prob
    return new_base, content
