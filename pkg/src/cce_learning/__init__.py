"""Distributed learning of efficient coarse correlated equilibria with a common random signal."""

from .equilibria import cce_check, efficient_cce, efficient_realizable, efficient_realizable_cce
from .game import Game, JointDistribution, example1_game, expected_utility, shapley_game, welfare
from .learning import LearnerConfig, simulate
from .signals import Strategy, joint_distribution

__all__ = [
    "Game",
    "JointDistribution",
    "LearnerConfig",
    "Strategy",
    "cce_check",
    "efficient_cce",
    "efficient_realizable",
    "efficient_realizable_cce",
    "example1_game",
    "expected_utility",
    "joint_distribution",
    "shapley_game",
    "simulate",
    "welfare",
]
