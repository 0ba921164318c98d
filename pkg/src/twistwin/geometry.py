"""Max-norm cubes, hyperplane slabs and the legality predicates built on them."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .numeric import Scalar, convert, decide, to_text


class InvalidSlab(ValueError):
    """The slab has an all-zero normal vector or a negative halfwidth."""


class InvalidCube(ValueError):
    """The cube has a non-positive radius or an empty center."""


@dataclass(frozen=True)
class Interval:
    """A real interval; open/closed ends are tracked explicitly."""

    lo: Scalar
    hi: Scalar
    closed_lo: bool = True
    closed_hi: bool = True

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"interval with lo > hi: [{self.lo}, {self.hi}]")
        if self.lo == self.hi and not (self.closed_lo and self.closed_hi):
            raise ValueError("a degenerate interval must be closed at both ends")

    @classmethod
    def open(cls, lo, hi) -> "Interval":
        return cls(lo, hi, False, False)

    @property
    def length(self) -> Scalar:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Scalar:
        return (self.lo + self.hi) / 2

    def contains(self, x) -> bool:
        left = self.lo <= x if self.closed_lo else self.lo < x
        right = x <= self.hi if self.closed_hi else x < self.hi
        return left and right

    def contains_interval(self, other: "Interval") -> bool:
        if other.lo < self.lo or other.hi > self.hi:
            return False
        if other.lo == self.lo and other.closed_lo and not self.closed_lo:
            return False
        if other.hi == self.hi and other.closed_hi and not self.closed_hi:
            return False
        return True

    def meets(self, other: "Interval") -> bool:
        """True when the two intervals share at least one point."""
        if self.hi < other.lo or other.hi < self.lo:
            return False
        if self.hi == other.lo:
            return self.closed_hi and other.closed_lo
        if other.hi == self.lo:
            return other.closed_hi and self.closed_lo
        return True

    def intersect(self, other: "Interval") -> "Interval | None":
        if not self.meets(other):
            return None
        if self.lo > other.lo:
            lo, cl = self.lo, self.closed_lo
        elif other.lo > self.lo:
            lo, cl = other.lo, other.closed_lo
        else:
            lo, cl = self.lo, self.closed_lo and other.closed_lo
        if self.hi < other.hi:
            hi, ch = self.hi, self.closed_hi
        elif other.hi < self.hi:
            hi, ch = other.hi, other.closed_hi
        else:
            hi, ch = self.hi, self.closed_hi and other.closed_hi
        if lo == hi and not (cl and ch):
            return None
        return Interval(lo, hi, cl, ch)

    def closure(self) -> "Interval":
        return Interval(self.lo, self.hi, True, True)

    def to_json(self) -> list[str]:
        return [to_text(self.lo), to_text(self.hi)]


@dataclass(frozen=True)
class Cube:
    """Closed max-norm ball: the product of ``[c_j - r, c_j + r]``."""

    center: tuple
    radius: Scalar

    def __post_init__(self):
        if len(self.center) == 0:
            raise InvalidCube("cube center must have at least one coordinate")
        if not self.radius > 0:
            raise InvalidCube("cube radius must be positive")
        object.__setattr__(self, "center", tuple(self.center))

    @classmethod
    def from_bounds(cls, lows: Sequence, highs: Sequence) -> "Cube":
        """Build a cube from per-coordinate bounds (all side lengths must agree)."""
        sides = {hi - lo for lo, hi in zip(lows, highs)}
        if len(sides) != 1:
            raise InvalidCube("all sides of a max-norm ball must have the same length")
        side = sides.pop()
        return cls(tuple((lo + hi) / 2 for lo, hi in zip(lows, highs)), side / 2)

    @classmethod
    def from_json(cls, data: dict, mode: str = "rational", precision: int | None = None) -> "Cube":
        return cls(
            tuple(convert(v, mode, precision) for v in data["center"]),
            convert(data["radius"], mode, precision),
        )

    @property
    def dimension(self) -> int:
        return len(self.center)

    @property
    def diameter(self) -> Scalar:
        return 2 * self.radius

    def side(self, axis: int = 0) -> Interval:
        c = self.center[axis]
        return Interval(c - self.radius, c + self.radius)

    def to_json(self) -> dict:
        return {"center": [to_text(c) for c in self.center], "radius": to_text(self.radius)}


@dataclass(frozen=True)
class Slab:
    """Closed ``halfwidth``-neighbourhood of the hyperplane ``<normal, x> = offset``."""

    normal: tuple
    offset: Scalar
    halfwidth: Scalar

    def __post_init__(self):
        object.__setattr__(self, "normal", tuple(self.normal))
        if all(n == 0 for n in self.normal):
            raise InvalidSlab("slab normal must not be the zero vector")
        if self.halfwidth < 0:
            raise InvalidSlab("slab halfwidth must be nonnegative")

    @classmethod
    def axis_aligned(cls, dimension: int, axis: int, center, halfwidth) -> "Slab":
        normal = tuple(1 if j == axis else 0 for j in range(dimension))
        return cls(normal, center, halfwidth)

    @classmethod
    def passing(cls, cube: Cube) -> "Slab":
        """A zero-width slab whose hyperplane lies outside both the cube and [0,1]^d."""
        offset = cube.center[0] - cube.radius - 1
        return cls.axis_aligned(cube.dimension, 0, offset, 0 * cube.radius)

    @classmethod
    def from_json(cls, data: dict, mode: str = "rational", precision: int | None = None) -> "Slab":
        return cls(
            tuple(convert(v, mode, precision) for v in data["normal"]),
            convert(data["offset"], mode, precision),
            convert(data["halfwidth"], mode, precision),
        )

    @property
    def axis(self) -> int | None:
        """Index ``j`` when the normal is the unit vector ``e_j``, else ``None``."""
        nonzero = [j for j, n in enumerate(self.normal) if n != 0]
        if len(nonzero) == 1 and self.normal[nonzero[0]] == 1:
            return nonzero[0]
        return None

    @property
    def is_pass(self) -> bool:
        return self.halfwidth == 0

    @property
    def dual_norm(self) -> Scalar:
        total = 0 * self.offset
        for n in self.normal:
            total = total + abs(n)
        return total

    def to_json(self) -> dict:
        return {
            "normal": [to_text(n) for n in self.normal],
            "offset": to_text(self.offset),
            "halfwidth": to_text(self.halfwidth),
        }


def _functional_range(cube: Cube, slab: Slab):
    """Min and max of ``<n, x> - b`` over the cube (attained at two corners)."""
    if len(slab.normal) != cube.dimension:
        raise ValueError("slab and cube dimensions differ")
    value = -slab.offset
    for n, c in zip(slab.normal, cube.center):
        value = value + n * c
    spread = cube.radius * slab.dual_norm
    return value - spread, value + spread


def slab_distance(cube: Cube, slab: Slab) -> Scalar:
    """Max-norm distance from the cube to the slab's core hyperplane."""
    lo, hi = _functional_range(cube, slab)
    norm = slab.dual_norm
    if lo > 0:
        return lo / norm
    if hi < 0:
        return -hi / norm
    return 0 * norm


def cube_avoids_slab(cube: Cube, slab: Slab) -> bool | None:
    """Whether the closed cube misses the closed slab (``None`` if undecidable)."""

    def check():
        lo, hi = _functional_range(cube, slab)
        reach = slab.halfwidth * slab.dual_norm
        return lo > reach or hi < -reach

    return decide(check)


def cube_inside(inner: Cube, outer: Cube) -> bool | None:
    """Componentwise containment of closed cubes (``None`` if undecidable)."""
    if inner.dimension != outer.dimension:
        raise ValueError("cube dimensions differ")

    def check():
        for ci, co in zip(inner.center, outer.center):
            if ci - inner.radius < co - outer.radius:
                return False
            if ci + inner.radius > co + outer.radius:
                return False
        return True

    return decide(check)


def center_in_unit_cube(cube: Cube) -> bool | None:
    return decide(lambda: all(0 <= c <= 1 for c in cube.center))


def hyperplane_distance(cube: Cube, axis: int, y) -> Scalar:
    """Distance from the cube to ``{x : x_axis = y}``."""
    c = cube.center[axis]
    gap = abs(y - c) - cube.radius
    return gap if gap > 0 else 0 * gap


def unit_cube(dimension: int = 1) -> Cube:
    half = Fraction(1, 2)
    return Cube(tuple(half for _ in range(dimension)), half)
