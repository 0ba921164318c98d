"""A lighter strategy for long runs with user-chosen ``δ``: cover bad intervals as they become urgent.

Every bad interval ``J`` (one per cylinder of depth ``<= horizon``) can be
hidden under a single slab only while ``|J| <= 2γr``.  Bob's radius drops by
at most a factor ``γ`` per round, so an interval with ``|J| > 2γ²r`` that is
not covered now may never be coverable again.  Each round Alice covers as many
of those urgent intervals as one slab allows, largest first.  Nothing here is
certified; runs are checked afterwards on the final center's orbit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..dynamics import MapSequence, Node, children, root_node
from ..game import GameState
from ..geometry import Cube, Interval, Slab
from ..numeric import exact, parse_rational, to_text
from ..targets import TargetSequence
from .localize import bad_interval


@dataclass
class _Entry:
    node: Node
    inf_derivative: Fraction
    expanded_at: Fraction | None = None  # prune threshold in force at the last expansion
    complete: bool = False  # every child has been enumerated
    kids: dict = field(default_factory=dict)
    interval: Interval | None = None
    resolved: bool = False  # the interval is covered, missed or cached as empty


class RollingCover:
    """Alice for empirical runs.

    ``delta`` is the target distance, ``horizon`` the deepest orbit time
    handled and ``lookahead`` sets how far below the urgent band intervals are
    still tracked (``γ^lookahead · 2r``).
    """

    name = "empirical"

    def __init__(self, seq: MapSequence, targets: TargetSequence, gamma, delta,
                 horizon: int = 200, lookahead: int = 3):
        self.seq = seq
        self.targets = targets
        self.gamma = parse_rational(gamma)
        self.delta = parse_rational(delta)
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        self.horizon = horizon
        self.lookahead = lookahead
        self.root = _Entry(root_node(), Fraction(1))
        self.covered = 0
        self.missed: list[int] = []  # depths of intervals that became too long to cover
        self.pass_rounds = 0
        self.slab_rounds = 0

    # -- tree maintenance --------------------------------------------------------
    def _bound(self, entry: _Entry, radius) -> Fraction:
        """Upper bound on ``|J|`` for the node and all of its descendants."""
        return (2 * self.delta + 2 * self.targets.lipschitz * radius) / entry.inf_derivative

    def _entry(self, node: Node) -> _Entry:
        low, _ = node.derivative_range(node.lo, node.hi)
        return _Entry(node, low)

    def _expand(self, entry: _Entry, lo, hi, floor) -> None:
        if entry.complete or (entry.expanded_at is not None and entry.expanded_at <= floor / self.gamma):
            return
        radius_scale = 2 * self.delta + 2 * self.targets.lipschitz * (hi - lo) / 2
        pruned = False

        def prune(tail_derivative, _length) -> bool:
            nonlocal pruned
            if radius_scale / tail_derivative < floor:
                pruned = True
            return pruned

        for child in children(self.seq, 1, entry.node, lo, hi, prune=prune):
            if child.word not in entry.kids:
                entry.kids[child.word] = self._entry(child)
        # the branch tail only needs revisiting if it was cut off
        complete = not pruned
        entry.expanded_at = floor
        entry.complete = complete

    def _collect(self, cube: Cube) -> list[_Entry]:
        """Nodes meeting the cube whose intervals are large enough to track."""
        side = cube.side(0)
        lo, hi = exact(side.lo), exact(side.hi)
        r = exact(cube.radius)
        floor = self.gamma**self.lookahead * 2 * r
        found = []
        stack = [self.root]
        while stack:
            entry = stack.pop()
            node = entry.node
            if not (node.lo <= hi and node.hi >= lo):
                continue
            if node.depth and not entry.resolved:
                found.append(entry)
            if node.depth >= self.horizon or self._bound(entry, r) < floor:
                continue
            self._expand(entry, lo, hi, floor)
            # cubes are nested: a child missing this cube misses every later one
            for word in [w for w, kid in entry.kids.items() if kid.node.hi < lo or kid.node.lo > hi]:
                del entry.kids[word]
            stack.extend(entry.kids.values())
        return found

    def _interval(self, entry: _Entry, cube: Cube) -> Interval | None:
        if entry.interval is not None:
            return entry.interval
        node = entry.node
        j = bad_interval(self.seq, self.targets, node.depth, cube, self.delta, node=node, exact=True)
        cacheable = self.targets.lipschitz == 0 or (
            node.composite.is_affine and self.targets.coordinate_affine(node.depth) is not None)
        if j is None:
            # windows of nested cubes are nested, so an empty answer stays empty
            entry.resolved = True
            return None
        if cacheable:
            entry.interval = j
        return j

    # -- protocol ------------------------------------------------------------------
    def __call__(self, state: GameState) -> Slab:
        cube = state.cube
        side = cube.side(0)
        lo, hi = exact(side.lo), exact(side.hi)
        r = exact(cube.radius)
        reach = self.gamma * r
        urgent_from = 2 * self.gamma * reach
        pending: list[tuple[Interval, _Entry]] = []
        for entry in self._collect(cube):
            j = self._interval(entry, cube)
            if j is None:
                continue
            if j.hi < lo or j.lo > hi:
                entry.resolved = True
                continue
            j = Interval(max(j.lo, lo), min(j.hi, hi))
            if j.length > 2 * reach:
                entry.resolved = True
                self.missed.append(entry.node.depth)
                continue
            pending.append((j, entry))
        if not pending:
            self.pass_rounds += 1
            return Slab.passing(cube)
        pending.sort(key=lambda item: (-item[0].length, item[0].lo))
        anchor = pending[0][0]
        best = None
        for start in {anchor.lo, anchor.hi - 2 * reach} | {j.lo for j, _ in pending}:
            end = start + 2 * reach
            if not (start <= anchor.lo and anchor.hi <= end):
                continue
            inside = [(j, e) for j, e in pending if start <= j.lo and j.hi <= end]
            score = (sum(1 for j, _ in inside if j.length > urgent_from), len(inside), -start)
            if best is None or score > best[0]:
                best = (score, start, inside)
        _, start, inside = best
        for _, entry in inside:
            entry.resolved = True
        self.covered += len(inside)
        self.slab_rounds += 1
        return Slab.axis_aligned(cube.dimension, 0, start + reach, reach)

    def diagnostics(self) -> dict:
        return {
            "strategy": self.name,
            "delta": to_text(self.delta),
            "horizon": self.horizon,
            "lookahead": self.lookahead,
            "covered": self.covered,
            "missed": len(self.missed),
            "missed_depths": sorted(set(self.missed))[:50],
            "slab_rounds": self.slab_rounds,
            "pass_rounds": self.pass_rounds,
        }


def strategy_empirical(seq: MapSequence, targets: TargetSequence, gamma, delta,
                       horizon: int = 200, lookahead: int = 3) -> RollingCover:
    return RollingCover(seq, targets, gamma, delta, horizon, lookahead)
