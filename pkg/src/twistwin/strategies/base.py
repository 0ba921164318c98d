"""Shared machinery for the stateful Alice strategies."""

from __future__ import annotations

from fractions import Fraction

from ..dynamics import MapSequence, Node, children, root_node
from ..game import GameState
from ..geometry import Cube, Slab
from ..numeric import exact, to_text
from ..targets import TargetSequence
from .blockade import IntervalAvoidance, PreconditionViolation, avoid_point


class StrategyAbort(RuntimeError):
    """An internal invariant of the strategy failed; the run stops with a diagnostic."""


class CylinderPath:
    """Nested cylinders ``path[n]`` (depth ``n``) whose closures contain the current side.

    Bob's cubes are nested, so a node that contained an earlier side contains
    every later one and the path only ever grows.
    """

    def __init__(self, seq: MapSequence, start: int = 1):
        self.seq = seq
        self.start = start
        self.nodes: list[Node] = [root_node()]

    @property
    def depth(self) -> int:
        return len(self.nodes) - 1

    def extend(self, depth: int, lo, hi) -> bool:
        """Grow the path to ``depth``; False when ``[lo, hi]`` straddles a cylinder boundary."""
        while self.depth < depth:
            node = self.nodes[-1]
            found = None
            for child in children(self.seq, self.start, node, lo, hi):
                if child.lo <= lo and hi <= child.hi:
                    found = child
                    break
                if child.hi > lo and child.lo < hi:
                    return False
            if found is None:
                return False
            self.nodes.append(found)
        return True

    def __getitem__(self, depth: int) -> Node:
        return self.nodes[depth]


def nodes_meeting(seq: MapSequence, node: Node, depth: int, lo, hi) -> list[Node]:
    """All depth-``depth`` descendants of ``node`` meeting ``[lo, hi]``."""
    level = [node]
    while level and level[0].depth < depth:
        nxt = []
        for item in level:
            nxt.extend(children(seq, 1, item, lo, hi))
        level = nxt
    return level


def interior_endpoints(nodes, lo, hi) -> list:
    points = set()
    for node in nodes:
        for p in (node.lo, node.hi):
            if lo <= p <= hi:
                points.add(p)
    return sorted(points)


class InductiveStrategy:
    """Wait until Bob's cube is small, then run stages; subclasses fill in the stages."""

    name = "inductive"

    def __init__(self, seq: MapSequence, targets: TargetSequence, constants, stages: int = 2):
        if stages < 1:
            raise ValueError("at least one stage is required")
        self.seq = seq
        self.targets = targets
        self.constants = constants
        self.gamma = constants.gamma
        self.stages = stages
        self.offset: int | None = None  # global round index at which local round 1 starts
        self.rho: dict[int, Fraction] = {}
        self.path = CylinderPath(seq)
        self.avoidance: IntervalAvoidance | None = None
        self.stage_log: list[dict] = []
        self.violations: list[str] = []
        self.finished = False
        self.pass_rounds = 0
        self.delta: Fraction | None = None

    # -- helpers ---------------------------------------------------------------
    def local_index(self, state: GameState) -> int:
        return state.round - self.offset + 1  # type: ignore[operator]

    def pass_slab(self, cube: Cube) -> Slab:
        self.pass_rounds += 1
        return Slab.passing(cube)

    def side(self, cube: Cube):
        s = cube.side(0)
        return exact(s.lo), exact(s.hi)

    def point_slab(self, cube: Cube, point) -> Slab:
        return avoid_point(cube, 0, point, self.gamma).slab

    def start_avoidance(self, cube: Cube, intervals: list, record: dict) -> Slab:
        try:
            self.avoidance = IntervalAvoidance(cube, 0, intervals, self.gamma)
        except PreconditionViolation as exc:
            raise StrategyAbort(f"stage {record['k']}: {exc}") from exc
        record["intervals"] = len(intervals)
        record["avoid_rounds"] = self.avoidance.rounds
        return self.continue_avoidance(cube)

    def continue_avoidance(self, cube: Cube) -> Slab:
        assert self.avoidance is not None
        if self.avoidance.done:
            return self.pass_slab(cube)
        return self.avoidance.step(cube)

    def wait_threshold(self) -> Fraction:
        raise NotImplementedError

    def play(self, state: GameState, i: int) -> Slab | None:
        raise NotImplementedError

    # -- protocol ----------------------------------------------------------------
    def __call__(self, state: GameState) -> Slab | None:
        if self.finished:
            return None
        cube = state.cube
        if self.offset is None:
            if not exact(cube.diameter) < self.wait_threshold():
                return self.pass_slab(cube)
            self.offset = state.round
        i = self.local_index(state)
        self.rho[i] = exact(cube.diameter)
        if self.avoidance is not None and self.avoidance.done and not self.avoidance.cleared(cube):
            self.violations.append(f"local round {i}: avoidance finished but intervals remain")
            self.avoidance = None
        try:
            return self.play(state, i)
        except StrategyAbort as exc:
            self.violations.append(str(exc))
            self.finished = True
            return None

    def diagnostics(self) -> dict:
        return {
            "strategy": self.name,
            "constants": self.constants.to_json(),
            "offset": self.offset,
            "delta": None if self.delta is None else to_text(self.delta),
            "stages": self.stage_log,
            "violations": self.violations,
            "pass_rounds": self.pass_rounds,
            "completed": self.finished and not self.violations,
        }
