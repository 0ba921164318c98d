"""Localizing the points of a cube whose orbit comes within ``δ`` of the target."""

from __future__ import annotations

from fractions import Fraction

from ..dynamics import MapSequence, Node, containing_node
from ..geometry import Cube, Interval
from ..targets import TargetSequence, target_coordinate


class BallNotInCylinder(ValueError):
    """The cube's first side is not inside a single depth-``n`` cylinder."""


def _clipped_side(cube: Cube, node: Node):
    side = cube.side(0)
    lo = side.lo if side.lo > node.lo else node.lo
    hi = side.hi if side.hi < node.hi else node.hi
    if lo > hi:
        return None
    return lo, hi


def locate(seq: MapSequence, n: int, cube: Cube, node: Node | None = None) -> Node:
    if node is not None:
        return node
    side = cube.side(0)
    found = containing_node(seq, 1, n, side.lo, side.hi)
    if found is None:
        raise BallNotInCylinder(f"cube side [{float(side.lo)}, {float(side.hi)}] "
                                f"straddles depth-{n} cylinders")
    return found


def target_window(targets: TargetSequence, n: int, cube: Cube, delta):
    """``[t - δ - C r, t + δ + C r]`` with ``t = g_n(center)_1``: contains ``g_n(x)_1 ± δ`` for every ``x`` in the cube."""
    t = target_coordinate(targets, n, cube.center)
    pad = delta + targets.lipschitz * cube.radius
    return t - pad, t + pad


def bad_interval(seq: MapSequence, targets: TargetSequence, n: int, cube: Cube, delta,
                 node: Node | None = None, exact: bool = False) -> Interval | None:
    """A closed ``J`` with ``{x in cube : ‖T_{1,n}x - g_n(x)‖ <= δ} ⊆ {x_1 in J}``, or ``None`` if that set is empty.

    ``node`` is the depth-``n`` cylinder to work in; it is looked up when
    omitted (the cube must then lie in its closure).  When a node is given
    the cube's side is clipped to the cylinder's closure, so the result only
    covers the part of the cube inside that cylinder.  With ``exact=True``
    and an affine composite against a target whose first coordinate is affine
    in ``x_1``, the window is intersected with the exact solution set.
    """
    node = locate(seq, n, cube, node)
    if node.depth != n:
        raise ValueError(f"node has depth {node.depth}, expected {n}")
    clipped = _clipped_side(cube, node)
    if clipped is None:
        return None
    lo, hi = clipped
    wlo, whi = target_window(targets, n, cube, delta)
    f = node.composite
    ilo, ihi = f.image(lo, hi)
    wlo, whi = max(wlo, ilo), min(whi, ihi)
    if wlo > whi:
        return None
    jlo, jhi = f.inverse().image(wlo, whi)
    jlo, jhi = max(jlo, lo), min(jhi, hi)
    if exact and f.is_affine:
        line = targets.coordinate_affine(n)
        if line is not None:
            solved = _affine_solution(f.a / f.d, f.b / f.d, line[0], line[1], delta)
            if solved is False:
                return None
            if solved is not None:
                jlo, jhi = max(jlo, solved[0]), min(jhi, solved[1])
    if jlo > jhi:
        return None
    return Interval(jlo, jhi)


def _affine_solution(p, q, a, b, delta):
    """Solutions of ``|p x + q - (a x + b)| <= δ``: an interval, ``None`` (everything) or ``False`` (nothing)."""
    slope, gap = p - a, q - b
    if slope == 0:
        return None if abs(gap) <= delta else False
    u, v = (b - q - delta) / slope, (b - q + delta) / slope
    return (u, v) if u <= v else (v, u)


def length_bound(seq: MapSequence, targets: TargetSequence, n: int, cube: Cube, delta,
                 node: Node | None = None) -> Fraction:
    """``(2δ + C|B|) / inf |T_{1,n}'|`` over the cube's side (clipped to the cylinder)."""
    node = locate(seq, n, cube, node)
    clipped = _clipped_side(cube, node)
    if clipped is None:
        return Fraction(0)
    low, _ = node.derivative_range(*clipped)
    return (2 * delta + targets.lipschitz * cube.diameter) / low
