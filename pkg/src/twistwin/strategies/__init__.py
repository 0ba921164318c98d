"""Alice's strategies and the tools they are built from."""

from .base import InductiveStrategy, StrategyAbort
from .blockade import (BlockadePlan, IntervalAvoidance, PreconditionViolation, avoid_point,
                       blockade, epsilon, far_count, partition_count, rounds_needed)
from .constants import (DEFAULT_N_CAP, CertificateTooWeak, StrategyAConstants, StrategyBConstants,
                        constants_A, constants_B)
from .empirical import RollingCover, strategy_empirical
from .localize import BallNotInCylinder, bad_interval, length_bound, target_window
from .strategy_a import StrategyA, strategy_A
from .strategy_b import StrategyB, class_words, strategy_B
from .verify import orbit_gaps, partial_quotients, verify_trace


def avoid_intervals(cube, axis: int, intervals, gamma, rounds: int = 0) -> IntervalAvoidance:
    """Stateful multi-round plan excluding every interval from Bob's cube."""
    return IntervalAvoidance(cube, axis, list(intervals), gamma, rounds)


__all__ = [
    "BallNotInCylinder", "BlockadePlan", "CertificateTooWeak", "DEFAULT_N_CAP", "InductiveStrategy",
    "IntervalAvoidance", "PreconditionViolation", "RollingCover", "StrategyA", "StrategyAConstants",
    "StrategyAbort", "StrategyB", "StrategyBConstants", "avoid_intervals", "avoid_point",
    "bad_interval", "blockade", "class_words", "constants_A", "constants_B", "epsilon", "far_count",
    "length_bound", "orbit_gaps", "partial_quotients", "partition_count", "rounds_needed",
    "strategy_A", "strategy_B", "strategy_empirical", "target_window", "verify_trace",
]
