"""Alice's strategy for full-branch sequences (possibly infinitely many branches)."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..dynamics import MapSequence, Node, children, root_node
from ..game import GameState
from ..numeric import to_text
from ..targets import TargetSequence
from .base import InductiveStrategy, StrategyAbort
from .constants import DEFAULT_N_CAP, StrategyBConstants, constants_B
from .localize import bad_interval


@dataclass
class WordCensus:
    """In-class cylinders meeting an interval, plus the nested-length bookkeeping."""

    nodes: list[Node] = field(default_factory=list)
    max_nested_gap: int = 0  # largest |v| - |u| over nested in-class words u ⊂ v
    max_depth: int = 0


def class_words(seq: MapSequence, lo, hi, lower, upper) -> WordCensus:
    """Words ``u`` with ``lower < |I_u| <= upper`` whose cylinder meets ``(lo, hi)``.

    Descends only while the cylinder is longer than ``lower``; cylinders shrink
    along every branch, so nothing below a short node can be in the class.
    """
    census = WordCensus()

    def prune(_deriv, length) -> bool:
        return length <= lower

    stack: list[tuple[Node, int | None]] = [(root_node(), None)]
    while stack:
        node, anchor = stack.pop()
        if node.depth and node.length <= upper:
            if anchor is None:
                anchor = node.depth
            census.nodes.append(node)
            census.max_nested_gap = max(census.max_nested_gap, node.depth - anchor)
            census.max_depth = max(census.max_depth, node.depth)
        for child in children(seq, 1, node, lo, hi, prune=prune):
            if child.length > lower:
                stack.append((child, anchor))
    census.nodes.sort(key=lambda n: (n.lo, n.depth))
    return census


class StrategyB(InductiveStrategy):
    """Stage ``k`` clears the bad sets of every word of class ``k + 2`` meeting ``B_{n_k}``.

    Local round 1 is the first cube with diameter below ``γ^{2s}``; stage
    ``k`` begins at the first local round with ``ρ_i < γ^{ks} ρ_1``.
    """

    name = "B"

    def __init__(self, seq: MapSequence, targets: TargetSequence, gamma, stages: int = 2,
                 constants: StrategyBConstants | None = None, n_cap: int = DEFAULT_N_CAP):
        constants = constants or constants_B(seq, gamma, targets, n_cap)
        super().__init__(seq, targets, constants, stages)
        self.stage_start: dict[int, int] = {}
        self.current = -1

    def wait_threshold(self) -> Fraction:
        return self.constants.wait_threshold

    def word_class(self, k: int) -> tuple[Fraction, Fraction]:
        return self.constants.class_bounds(k + 2)

    def play(self, state: GameState, i: int):
        cube = state.cube
        c = self.constants
        if i == 1:
            self.delta = c.delta(self.rho[1])
            return self.begin_stage(0, i, cube, state.round)
        k = self.current
        n_k = self.stage_start[k]
        if self.rho[i] < self.gamma ** ((k + 1) * c.s) * self.rho[1]:
            self.close_stage(k, cube)
            if k + 1 == self.stages:
                self.finished = True
                return None
            return self.begin_stage(k + 1, i, cube, state.round)
        if i == n_k + c.s and k + 1 == self.stages:
            self.close_stage(k, cube)
            self.finished = True
            return None
        if self.avoidance is not None and not self.avoidance.done:
            return self.continue_avoidance(cube)
        return self.pass_slab(cube)

    def close_stage(self, k: int, cube) -> None:
        record = self.stage_log[k]
        if "cleared" in record:
            return
        done = self.avoidance is not None and self.avoidance.done
        record["cleared"] = done and self.avoidance.cleared(cube)
        if not record["cleared"]:
            self.violations.append(f"stage {k}: cube still meets a bad interval when the stage ends")

    def begin_stage(self, k: int, i: int, cube, global_round: int):
        c = self.constants
        lo, hi = self.side(cube)
        self.current = k
        self.stage_start[k] = i
        lower, upper = self.word_class(k)
        census = class_words(self.seq, lo, hi, lower, upper)
        record = {"k": k, "n_k": i, "round": global_round, "rho": to_text(self.rho[i]),
                  "words": len(census.nodes), "max_nested_gap": census.max_nested_gap,
                  "max_depth": census.max_depth}
        self.stage_log.append(record)
        if census.max_nested_gap >= c.N:
            self.violations.append(f"stage {k}: nested words differ in length by "
                                   f"{census.max_nested_gap} >= N")
        if len(census.nodes) > 2 * c.N:
            raise StrategyAbort(f"stage {k}: {len(census.nodes)} words exceed 2N = {2 * c.N}")
        intervals = []
        limit = self.gamma**c.s1 * cube.radius
        worst = Fraction(0)
        for node in census.nodes:
            j = bad_interval(self.seq, self.targets, node.depth, cube, self.delta, node=node)
            if j is not None:
                intervals.append(j)
                worst = max(worst, j.length / limit)
        record["length_ratio"] = float(worst)
        return self.start_avoidance(cube, intervals, record)


def strategy_B(seq: MapSequence, targets: TargetSequence, gamma, stages: int = 2, **kwargs) -> StrategyB:
    return StrategyB(seq, targets, gamma, stages, **kwargs)
