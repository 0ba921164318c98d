"""Forcing Bob's cubes away from axis-parallel hyperplanes.

A single round can push a fixed fraction of a family of parallel hyperplanes
at least ``γ|B|/4`` away from Bob's next cube; repeating the move on the
survivors clears any finite family of short intervals in logarithmically many
rounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from ..geometry import Cube, Interval, Slab
from ..numeric import floor_log, parse_rational


class PreconditionViolation(ValueError):
    """An interval handed to the avoidance routine is too long to be cleared in time."""


def epsilon(gamma) -> Fraction:
    """Survivor fraction of one blockade round, ``1 - γ/(4 + 6γ)``."""
    gamma = parse_rational(gamma)
    if not 0 < gamma < Fraction(1, 3):
        raise ValueError("gamma must lie in (0,1/3)")
    value = 1 - gamma / (4 + 6 * gamma)
    assert 1 - value < Fraction(1, 2)
    return value


def rounds_needed(gamma, count: int) -> int:
    """Rounds after which ``count`` short intervals are all excluded: ``⌊log_{1/ε} count⌋ + 1``."""
    if count <= 0:
        return 0
    return floor_log(1 / epsilon(gamma), Fraction(count)) + 1


def partition_count(gamma) -> int:
    """Number of equal pieces of ``[a - γ|B|/2, b + γ|B|/2]`` each no longer than ``γ|B|/2``."""
    gamma = parse_rational(gamma)
    return math.ceil(2 * (1 + gamma) / gamma)


@dataclass(frozen=True)
class BlockadePlan:
    axis: int
    slab: Slab
    case: str  # "case1_pass" or "case2_blockade"
    window: Interval | None = None
    covered: int = 0

    @property
    def center(self):
        return None if self.window is None else self.window.midpoint


def blockade(cube: Cube, axis: int, points: Sequence, gamma) -> BlockadePlan:
    """Alice's slab guaranteeing many of the hyperplanes ``x_axis = y_i`` end up far away.

    If at least half the points are already more than ``γ|B|/2`` from the cube
    Alice passes.  Otherwise the enlarged side is cut into equal closed pieces,
    the piece holding the most points (lowest index on ties) is chosen and a
    slab of halfwidth ``γ|B|/2`` is centred on it.
    """
    gamma = parse_rational(gamma)
    points = list(points)
    if not points:
        return BlockadePlan(axis, Slab.passing(cube), "case1_pass")
    c, r = cube.center[axis], cube.radius
    reach = gamma * r  # γ|B|/2
    left, right = c - r - reach, c + r + reach
    near = [y for y in points if left <= y <= right]
    if len(points) - len(near) >= math.ceil(Fraction(len(points), 2)):
        return BlockadePlan(axis, Slab.passing(cube), "case1_pass")
    pieces = partition_count(gamma)
    step = (right - left) / pieces
    counts = [0] * pieces
    for y in near:
        offset = (y - left) / step
        j = min(math.floor(offset), pieces - 1)
        counts[j] += 1
        # points on a shared boundary belong to both closed pieces
        if j > 0 and offset == j:
            counts[j - 1] += 1
    best = max(range(pieces), key=lambda j: (counts[j], -j))
    lo = left + best * step
    window = Interval(lo, lo + step)
    slab = Slab.axis_aligned(cube.dimension, axis, window.midpoint, reach)
    return BlockadePlan(axis, slab, "case2_blockade", window, counts[best])


def avoid_point(cube: Cube, axis: int, point, gamma) -> BlockadePlan:
    """One round after which the hyperplane ``x_axis = point`` misses Bob's cube."""
    return blockade(cube, axis, [point], gamma)


def far_count(cube: Cube, axis: int, points: Sequence, threshold) -> int:
    """How many hyperplanes ``x_axis = y`` lie strictly farther than ``threshold`` from the cube."""
    side = cube.side(axis)
    total = 0
    for y in points:
        gap = side.lo - y if y < side.lo else y - side.hi
        if gap > threshold:
            total += 1
    return total


@dataclass
class IntervalAvoidance:
    """Multi-round plan clearing ``intervals`` from the cube's projection on ``axis``.

    Built at the cube ``start``; each call to :meth:`step` re-runs the
    blockade on the midpoints of intervals still meeting the current cube.
    """

    start: Cube
    axis: int
    intervals: list
    gamma: Fraction
    rounds: int = 0
    played: int = 0
    history: list = field(default_factory=list)
    check_length: bool = True

    def __post_init__(self):
        self.gamma = parse_rational(self.gamma)
        if not self.rounds:
            self.rounds = rounds_needed(self.gamma, len(self.intervals))
        if self.check_length and self.intervals:
            limit = self.gamma**self.rounds * self.start.radius  # γ^s |B| / 2
            for j in self.intervals:
                if j.length > limit:
                    raise PreconditionViolation(
                        f"interval of length {float(j.length):.3e} exceeds γ^s|B|/2 = {float(limit):.3e}")

    def remaining(self, cube: Cube) -> list:
        side = cube.side(self.axis)
        return [j for j in self.intervals if j.meets(side)]

    @property
    def done(self) -> bool:
        return self.played >= self.rounds

    def step(self, cube: Cube) -> Slab:
        live = self.remaining(cube)
        plan = blockade(cube, self.axis, [j.midpoint for j in live], self.gamma)
        self.played += 1
        self.history.append(len(live))
        return plan.slab

    def cleared(self, cube: Cube) -> bool:
        return not self.remaining(cube)
