"""Reference computations that do not go through the package's own algorithms.

They use closed-form branch formulas, brute-force enumeration and direct
iteration, so a shared bug in the library cannot make both sides agree.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction


# -- geometry ------------------------------------------------------------------------


def corner_distance(lows, highs, normal, offset) -> Fraction:
    """Distance from a box to ``<n, x> = b`` measured by the 1-norm of ``n``, via all corners."""
    values = [sum(n * x for n, x in zip(normal, corner)) - offset
              for corner in itertools.product(*zip(lows, highs))]
    if min(values) <= 0 <= max(values):
        return Fraction(0)
    return min(abs(v) for v in values) / sum(abs(n) for n in normal)


# -- maps ------------------------------------------------------------------------------


def doubling_inverse(digit: int, x: Fraction) -> Fraction:
    return (x + digit) / 2


def qcantor_inverse(q: int, digit: int, x: Fraction) -> Fraction:
    return (x + digit) / q


def times_cylinder(qs, word) -> tuple[Fraction, Fraction]:
    """Cylinder of ``word`` for the ×q_1, ×q_2, ... sequence: pull ``[0, 1]`` back through inverse branches."""
    lo, hi = Fraction(0), Fraction(1)
    for q, digit in reversed(list(zip(qs, word))):
        lo, hi = qcantor_inverse(q, digit, lo), qcantor_inverse(q, digit, hi)
    return lo, hi


def beta_step(beta: Fraction, x: Fraction) -> Fraction:
    y = beta * x
    return y - math.floor(y)


def gauss_step(x: Fraction) -> Fraction:
    y = 1 / x
    return y - math.floor(y)


def gauss_cylinder(word) -> tuple[Fraction, Fraction]:
    """Endpoints of the continued-fraction cylinder ``[0; a_1, ..., a_n]``."""
    def value(tail):
        x = tail
        for a in reversed(word):
            x = 1 / (a + x)
        return x
    a, b = value(Fraction(0)), value(Fraction(1))
    return min(a, b), max(a, b)


def gauss_composite_derivative(x: Fraction, n: int) -> Fraction:
    """``|(T^n)'(x)| = prod 1/T^j(x)^2`` by direct iteration."""
    total = Fraction(1)
    for _ in range(n):
        total /= x * x
        x = gauss_step(x)
    return total


# -- game ------------------------------------------------------------------------------


def grid_bob_cubes(lo: Fraction, hi: Fraction, gamma: Fraction, slab_lo: Fraction, slab_hi: Fraction,
                   steps: int = 40):
    """Every legal Bob interval on a grid of radii and centers (1-D, closed slab ``[slab_lo, slab_hi]``)."""
    r = (hi - lo) / 2
    for i in range(steps + 1):
        radius = gamma * r + (r - gamma * r) * i / steps
        for j in range(steps + 1):
            c = lo + radius + (hi - lo - 2 * radius) * j / steps
            a, b = c - radius, c + radius
            if a < lo or b > hi or not 0 <= c <= 1:
                continue
            if b < slab_lo or a > slab_hi:
                yield a, b


def far_points(a: Fraction, b: Fraction, points, threshold) -> int:
    total = 0
    for y in points:
        gap = a - y if y < a else (y - b if y > b else Fraction(0))
        if gap > threshold:
            total += 1
    return total


# -- IFS -------------------------------------------------------------------------------


def similarity_cut_set(ratios, r, diameter=Fraction(1)) -> list[tuple]:
    """Words whose piece (diameter times the product of ratios) is below ``r`` while the parent's is not."""
    out = []
    stack = [((), Fraction(diameter))]
    while stack:
        word, size = stack.pop()
        if word and size < r:
            out.append(word)
            continue
        for i, ratio in enumerate(ratios, start=1):
            stack.append((word + (i,), size * ratio))
    return sorted(out)


def affine_piece(pairs, word, lo, hi) -> tuple[Fraction, Fraction]:
    """Image of ``[lo, hi]`` under ``f_{w_1} o ... o f_{w_n}`` with ``f_i(x) = ratio_i x + offset_i``."""
    for symbol in reversed(word):
        ratio, offset = pairs[symbol - 1]
        lo, hi = sorted((ratio * lo + offset, ratio * hi + offset))
    return lo, hi


def greedy_disjoint(intervals: list[tuple[Fraction, Fraction]]) -> list[int]:
    """Indices kept by scanning in order and keeping each interval disjoint from everything kept so far."""
    kept: list[int] = []
    for i, (a, b) in enumerate(intervals):
        if all(b < intervals[k][0] or a > intervals[k][1] for k in kept):
            kept.append(i)
    return kept


def cantor_measure(lo: float, hi: float, depth: int) -> float:
    """Cantor measure of ``[lo, hi]`` by summing depth-``depth`` basic intervals it meets (an upper bound)."""
    total = 0.0
    weight = 0.5**depth
    size = 3.0**-depth
    for digits in itertools.product((0, 2), repeat=depth):
        start = sum(d * 3.0 ** -(k + 1) for k, d in enumerate(digits))
        if start <= hi and start + size >= lo:
            total += weight
    return total
