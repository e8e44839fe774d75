"""Coarse correlated equilibria: membership tests, the welfare LP, and searches
over the distributions realizable by signal-based strategies."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog

from .game import Game, JointDistribution, expected_utility
from .signals import JointStrategy, realizable_distributions

DEFAULT_TOL = 1e-9


class NumericalFailure(RuntimeError):
    """The LP solver did not report an optimal solution."""


@dataclass(frozen=True)
class CceCertificate:
    is_cce: bool
    worst_violation: float
    violating: tuple[int, int] | None = None  # (player, deviation action)


@dataclass(frozen=True)
class EfficientCceSolution:
    q: np.ndarray
    value: float
    status: str = "optimal"
    degenerate: bool = False


@dataclass(frozen=True)
class RealizableOptimum:
    value: Fraction
    profiles: list[JointStrategy] = field(default_factory=list)
    distributions: list[JointDistribution] = field(default_factory=list)

    def target_set(self) -> set[tuple[Fraction, ...]]:
        return {q.masses for q in self.distributions}


def deviation_matrix(game: Game) -> tuple[np.ndarray, list[tuple[int, int]]]:
    """Rows are ``U_i(a'_i, a_-i) - U_i(a)`` over joint actions, one per (i, a'_i)."""
    rows, labels = [], []
    for i in range(game.n):
        t = game.tensor(i)
        for dev in range(game.shape[i]):
            swapped = np.take(t, [dev], axis=i)
            gain = np.broadcast_to(swapped, t.shape) - t
            rows.append(gain.ravel())
            labels.append((i, dev))
    return np.array(rows), labels


def _exact_gains(game: Game, q: JointDistribution) -> list[tuple[Fraction, tuple[int, int]]]:
    support = q.support()
    decoded = {k: game.joint_actions(k) for k in support}
    out = []
    for i in range(game.n):
        pay = game.exact_payoffs[i]
        base = sum((pay[k] * m for k, m in support.items()), Fraction(0))
        for dev in range(game.shape[i]):
            dev_val = Fraction(0)
            for k, m in support.items():
                a = list(decoded[k])
                a[i] = dev
                dev_val += pay[game.joint_index(a)] * m
            out.append((dev_val - base, (i, dev)))
    return out


def cce_check(game: Game, q, tol: float = DEFAULT_TOL) -> CceCertificate:
    """Evaluate every coarse-correlated deviation inequality.

    Exact rational arithmetic is used when ``q`` is a :class:`JointDistribution`.
    """
    if tol < 0:
        raise ValueError("tol must be non-negative")
    if len(q) != game.num_joint:
        raise ValueError(
            f"distribution has {len(q)} entries but the game has {game.num_joint} joint actions"
        )
    if isinstance(q, JointDistribution):
        gains = _exact_gains(game, q)
        worst, pair = max(gains, key=lambda g: g[0])
        ok = worst <= Fraction(tol)
        return CceCertificate(ok, float(worst), None if ok else pair)
    D, labels = deviation_matrix(game)
    g = D @ np.asarray(q, dtype=float)
    j = int(np.argmax(g))
    ok = bool(g[j] <= tol)
    return CceCertificate(ok, float(g[j]), None if ok else labels[j])


def _solve(c, A_ub, A_eq, b_eq, extra=None):
    A = A_ub if extra is None else np.vstack([A_ub, extra[0]])
    b = np.zeros(A_ub.shape[0]) if extra is None else np.concatenate([np.zeros(A_ub.shape[0]), [extra[1]]])
    res = linprog(
        c,
        A_ub=A,
        b_ub=b,
        A_eq=A_eq,
        b_eq=b_eq,
        bounds=(0, None),
        method="highs",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status != 0:
        raise NumericalFailure(f"LP solver failed: {res.message}")
    return res


def efficient_cce(game: Game, check_degenerate: bool = True) -> EfficientCceSolution:
    """Welfare-maximizing CCE by linear programming.

    The optimizer need not be unique; ``degenerate`` flags an optimal face
    that is wider than a point.
    """
    D, _ = deviation_matrix(game)
    w = game.payoffs.sum(axis=0)
    A_eq = np.ones((1, game.num_joint))
    res = _solve(-w, D, A_eq, [1.0])
    q = np.clip(res.x, 0.0, None)
    q /= q.sum()
    value = float(w @ q)
    cert = cce_check(game, q)
    if not cert.is_cce:
        raise NumericalFailure(f"LP optimizer violates CCE by {cert.worst_violation:.3g}")

    degenerate = False
    if check_degenerate:
        # probe the optimal face along a fixed direction
        direction = np.random.default_rng(0).standard_normal(game.num_joint)
        face = (-w[None, :], -(value - 1e-9))
        lo = _solve(direction, D, A_eq, [1.0], face)
        hi = _solve(-direction, D, A_eq, [1.0], face)
        degenerate = bool(np.max(np.abs(lo.x - hi.x)) > 1e-7)
    return EfficientCceSolution(q, value, "optimal", degenerate)


def _best(game: Game, pairs) -> RealizableOptimum | None:
    best: RealizableOptimum | None = None
    for profile, q in pairs:
        v = sum(expected_utility(game, q, exact=True), Fraction(0))
        if best is None or v > best.value:
            best = RealizableOptimum(v, [profile], [q])
        elif v == best.value:
            best.profiles.append(profile)
            best.distributions.append(q)
    return best


def efficient_realizable_cce(game: Game, omega: int, tol: float = DEFAULT_TOL) -> RealizableOptimum | None:
    """All welfare-maximizing profiles whose q(s) is a CCE, or None if there are none."""
    pairs = [(p, q) for p, q in realizable_distributions(game, omega) if cce_check(game, q, tol).is_cce]
    return _best(game, pairs)


def efficient_realizable(game: Game, omega: int) -> RealizableOptimum:
    """All welfare-maximizing profiles over the whole realizable set."""
    return _best(game, realizable_distributions(game, omega))


def learning_target(game: Game, omega: int) -> RealizableOptimum:
    """The distributions the learning dynamics should settle on for this game and omega."""
    best = efficient_realizable_cce(game, omega)
    return best if best is not None else efficient_realizable(game, omega)
