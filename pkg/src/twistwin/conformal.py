"""One-dimensional contracting iterated function systems and separated subsystems.

Maps are fractional-linear contractions of an interval (similarities are the
affine case).  Piece diameters are measured on the attractor's convex hull:
exact for similarities, an outer enclosure otherwise.
"""

from __future__ import annotations

import bisect
import math
import random
from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from typing import Sequence

from scipy.optimize import brentq

from .dynamics import Mobius
from .numeric import parse_rational, to_text

Word = tuple[int, ...]


class InvalidIFS(ValueError):
    pass


class IFS1D:
    """Contractions ``φ_1..φ_m`` (words use the symbols ``1..m``)."""

    def __init__(self, maps: Sequence[Mobius], hull_iterations: int = 24):
        if len(maps) < 2:
            raise InvalidIFS("an IFS needs at least two maps")
        self.maps = tuple(maps)
        self.similar = all(m.is_affine for m in self.maps)
        self.hull = self._exact_hull() if self.similar else self._outer_hull(hull_iterations)
        lo, hi = self.hull
        if not hi > lo:
            raise InvalidIFS("the attractor is a single point")
        bounds = []
        for i, m in enumerate(self.maps, 1):
            if m.c != 0 and (m.c * lo + m.d) * (m.c * hi + m.d) <= 0:
                raise InvalidIFS(f"map {i} has a pole on the attractor hull")
            u, v = abs(m.derivative(lo)), abs(m.derivative(hi))
            low, high = min(u, v), max(u, v)
            if not (0 < low and high < 1):
                raise InvalidIFS(f"map {i} is not a contraction on the hull")
            bounds.append((low, high))
        self.ratio_bounds = tuple(bounds)
        self.distortion = self._distortion()

    # -- construction ------------------------------------------------------------
    @classmethod
    def similarities(cls, pairs: Sequence[tuple]) -> "IFS1D":
        """``x -> ratio * x + offset`` for each ``(ratio, offset)``."""
        return cls([Mobius.affine(parse_rational(r), parse_rational(t)) for r, t in pairs])

    @classmethod
    def from_spec(cls, spec: dict) -> "IFS1D":
        try:
            maps = []
            for item in spec["maps"]:
                if "mobius" in item:
                    maps.append(Mobius(*(parse_rational(v) for v in item["mobius"])))
                else:
                    ratio = parse_rational(item["ratio"])
                    if ratio == 0:
                        raise InvalidIFS("ratio must be nonzero")
                    maps.append(Mobius.affine(ratio, parse_rational(item.get("offset", "0"))))
        except (KeyError, TypeError) as exc:
            raise InvalidIFS(f"bad IFS spec: {exc}") from exc
        return cls(maps)

    def to_json(self) -> dict:
        out = []
        for m in self.maps:
            if m.is_affine:
                out.append({"ratio": to_text(m.a), "offset": to_text(m.b)})
            else:
                out.append({"mobius": [to_text(v) for v in (m.a, m.b, m.c, m.d)]})
        return {"maps": out}

    def _exact_hull(self) -> tuple[Fraction, Fraction]:
        # hull endpoints are among fixed points of φ_i, φ_i∘φ_j and images φ_i(fix φ_j)
        def fixed(m: Mobius) -> Fraction:
            return m.b / (1 - m.a)

        points = [fixed(m) for m in self.maps]
        points += [fixed(inner.then(outer)) for outer in self.maps for inner in self.maps]
        points += [outer(p) for outer in self.maps for p in points[: len(self.maps)]]
        return min(points), max(points)

    def _outer_hull(self, iterations: int) -> tuple[Fraction, Fraction]:
        lo, hi = Fraction(0), Fraction(1)
        for m in self.maps:
            if not (0 <= m(lo) <= 1 and 0 <= m(hi) <= 1):
                raise InvalidIFS("non-affine maps must send [0,1] into itself")
        for _ in range(iterations):
            images = [m.image(lo, hi) for m in self.maps]
            lo, hi = min(u for u, _ in images), max(v for _, v in images)
            lo, hi = _round_out(lo, hi)
        return lo, hi

    def _distortion(self) -> Fraction:
        """``C`` with ``C^{-1} ‖φ_I'‖ <= |φ_I'(x)| <= C ‖φ_I'‖`` on the hull."""
        if self.similar:
            return Fraction(1)
        lo, hi = self.hull
        # |φ''/φ'| = |2c/(cx+d)|; summed along a word against geometric shrinking
        curvature = max(max(abs(2 * m.c / (m.c * x + m.d)) for x in (lo, hi)) for m in self.maps)
        rho = max(high for _, high in self.ratio_bounds)
        exponent = float(curvature * (hi - lo) / (1 - rho))
        return Fraction(math.exp(exponent)).limit_denominator(10**6) + Fraction(1, 10**6)

    # -- words ---------------------------------------------------------------------
    @property
    def size(self) -> int:
        return len(self.maps)

    @property
    def min_ratio(self) -> Fraction:
        return min(low for low, _ in self.ratio_bounds)

    def word_map(self, word: Word) -> Mobius:
        """``φ_{i_1} ∘ ... ∘ φ_{i_n}``."""
        composite = Mobius.identity()
        for symbol in reversed(word):
            composite = composite.then(self.maps[symbol - 1])
        return composite

    def piece(self, word: Word) -> tuple[Fraction, Fraction]:
        """Hull of ``K_I``: exact for similarities, an outer enclosure otherwise."""
        return self.word_map(word).image(*self.hull)

    def diameter(self, word: Word) -> Fraction:
        lo, hi = self.piece(word)
        return hi - lo


def _round_out(lo: Fraction, hi: Fraction, bits: int = 64) -> tuple[Fraction, Fraction]:
    scale = 1 << bits
    return (Fraction(math.floor(lo * scale), scale), Fraction(math.ceil(hi * scale), scale))


def lambda_r(ifs: IFS1D, r) -> list[Word]:
    """Cut set ``{I : |K_I| < r <= |K_{I^-}|}`` in lexicographic order."""
    r = parse_rational(r)
    if not r > 0:
        raise ValueError("r must be positive")
    out: list[Word] = []
    stack: list[tuple[Word, Mobius]] = [((), Mobius.identity())]
    lo, hi = ifs.hull
    while stack:
        word, composite = stack.pop()
        for symbol in range(ifs.size, 0, -1):
            child = ifs.maps[symbol - 1].then(composite)
            u, v = child.image(lo, hi)
            if v - u < r:
                out.append(word + (symbol,))
            else:
                stack.append((word + (symbol,), child))
    out.sort()
    return out


@dataclass
class Subsystem:
    ifs: IFS1D
    r: Fraction
    candidates: list[Word]
    words: list[Word]
    pieces: list[tuple[Fraction, Fraction]]
    gap: Fraction | None  # least distance between selected piece hulls
    dimension: "DimensionReport | None" = field(default=None, repr=False)

    @property
    def count(self) -> int:
        return len(self.words)

    @cached_property
    def sorted_pieces(self) -> tuple[list[Mobius], list[Fraction], list[Fraction]]:
        """Word maps and piece endpoints, left to right."""
        order = sorted(range(self.count), key=lambda j: self.pieces[j])
        return ([self.ifs.word_map(self.words[j]) for j in order],
                [self.pieces[j][0] for j in order], [self.pieces[j][1] for j in order])

    @property
    def irreducible(self) -> bool:
        """In one dimension: more than one separated piece."""
        return self.count >= 2

    def to_json(self) -> dict:
        return {
            "r": to_text(self.r),
            "candidates": len(self.candidates),
            "count": self.count,
            "words": ["".join(map(str, w)) if self.ifs.size < 10 else list(w) for w in self.words],
            "gap": None if self.gap is None else to_text(self.gap),
            "irreducible": self.irreducible,
        }


def maximal_disjoint(ifs: IFS1D, words: Sequence[Word], r=None) -> Subsystem:
    """Greedy maximal family of words with pairwise disjoint closed piece hulls."""
    chosen: list[Word] = []
    pieces: list[tuple[Fraction, Fraction]] = []
    for word in sorted(words):
        lo, hi = ifs.piece(word)
        if all(hi < a or lo > b for a, b in pieces):
            chosen.append(word)
            pieces.append((lo, hi))
    order = sorted(range(len(chosen)), key=lambda j: pieces[j])
    ordered = [pieces[j] for j in order]
    gap = min((b[0] - a[1] for a, b in zip(ordered, ordered[1:])), default=None)
    r = parse_rational(r) if r is not None else max((ifs.diameter(w) for w in words), default=Fraction(0))
    return Subsystem(ifs, r, list(words), chosen, pieces, gap)


def subsystem(ifs: IFS1D, r) -> Subsystem:
    return maximal_disjoint(ifs, lambda_r(ifs, r), r)


@dataclass(frozen=True)
class DimensionReport:
    lower_bound: float
    moran: float | None
    count: int
    c1: Fraction
    c2: Fraction

    def to_json(self) -> dict:
        return {"lower_bound": self.lower_bound, "moran": self.moran, "count": self.count,
                "c1": to_text(self.c1), "c2": to_text(self.c2)}


def _log(x: Fraction) -> float:
    return math.log(x.numerator) - math.log(x.denominator)


def moran_root(ratios: Sequence[float], xtol: float = 1e-12) -> float:
    """Root ``t`` of ``Σ ratio_i^t = 1``."""
    ratios = [float(abs(q)) for q in ratios]
    if len(ratios) < 2:
        return 0.0
    logs = [math.log(q) for q in ratios]

    def pressure(t: float) -> float:
        top = max(t * g for g in logs)
        return math.log(sum(math.exp(t * g - top) for g in logs)) + top

    upper = 1.0
    while pressure(upper) > 0:
        upper *= 2
    return brentq(pressure, 0.0, upper, xtol=xtol)


def subsystem_dimension(sub: Subsystem) -> DimensionReport:
    """Mass-distribution exponent ``log #I_r / log(1/(c_2 r))`` plus the Moran root for similarities."""
    if not sub.words:
        raise ValueError("empty subsystem")
    if sub.gap is None and sub.count > 1:
        raise ValueError("subsystem pieces are not separated")
    C = sub.ifs.distortion
    c2 = sub.ifs.min_ratio / (C * C)
    c1 = (sub.gap or Fraction(0)) / (C * C)
    scale = 1 / (c2 * sub.r)
    lower = _log(Fraction(sub.count)) / _log(scale) if sub.count > 1 else 0.0
    moran = None
    if sub.ifs.similar:
        moran = moran_root([_word_ratio(sub.ifs, w) for w in sub.words])
    report = DimensionReport(lower, moran, sub.count, c1, c2)
    sub.dimension = report
    return report


def _word_ratio(ifs: IFS1D, word: Word) -> float:
    return math.exp(_log(abs(ifs.word_map(word).a)))


@dataclass(frozen=True)
class MassReport:
    samples: int
    max_ratio: float
    violations: int
    exponent: float

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def to_json(self) -> dict:
        return {"samples": self.samples, "max_ratio": self.max_ratio,
                "violations": self.violations, "exponent": self.exponent}


def measure_upper(sub: Subsystem, lo: Fraction, hi: Fraction, resolution: Fraction,
                  max_depth: int = 16) -> Fraction:
    """Upper bound for ``μ([lo, hi])`` under the uniform word measure of the subsystem.

    Pieces inside the interval count fully, disjoint ones not at all, and
    straddling ones are refined until they are shorter than ``resolution``.
    The query is pulled back through each piece map, so only the (at most
    two) straddling pieces per level are visited.
    """
    ifs = sub.ifs
    maps, los, his = sub.sorted_pieces
    share = Fraction(1, len(maps))
    total = Fraction(0)
    stack: list[tuple[Mobius, Fraction, int]] = [(Mobius.identity(), Fraction(1), 0)]
    while stack:
        composite, mass, depth = stack.pop()
        # query in the coordinates of the pieces (composite is monotone on the hull)
        a, b = composite.inverse().image(lo, hi)
        first = bisect.bisect_left(los, a)
        last = bisect.bisect_right(his, b)  # pieces first..last-1 lie inside
        if last > first:
            total += mass * share * (last - first)
        edges = {bisect.bisect_right(los, a) - 1, bisect.bisect_right(los, b) - 1}
        for j in sorted(edges):
            if j < 0 or first <= j < last or his[j] < a or los[j] > b:
                continue
            child = maps[j].then(composite)
            u, v = child.image(*ifs.hull)
            if depth + 1 >= max_depth or v - u < resolution:
                total += mass * share
            else:
                stack.append((child, mass * share, depth + 1))
    return total


def mass_distribution_check(sub: Subsystem, samples: int = 1000, seed: int = 0,
                            intervals: Sequence[tuple] | None = None) -> MassReport:
    """Sample intervals ``B`` and test ``μ(B) <= (c_1 c_2 r)^{-t} |B|^t`` with ``t`` the lower bound."""
    report = sub.dimension or subsystem_dimension(sub)
    t = report.lower_bound
    if report.c1 == 0:
        raise ValueError("a single-piece subsystem has no separation constant")
    base = _log(report.c1 * report.c2 * sub.r)
    lo_hull, hi_hull = sub.ifs.hull
    width = hi_hull - lo_hull
    rng = random.Random(seed)
    if intervals is None:
        intervals = []
        for _ in range(samples):
            size = width * Fraction(10 ** rng.uniform(-12, 0)).limit_denominator(10**15)
            start = lo_hull - size + (width + size) * Fraction(rng.random())
            intervals.append((start, start + size))
    worst, bad = 0.0, 0
    for a, b in intervals:
        a, b = parse_rational(a), parse_rational(b)
        size = b - a
        mu = measure_upper(sub, a, b, size / 1000)
        if mu == 0:
            continue
        # compare in logs: bound = exp(-t·log(c1 c2 r) + t·log|B|)
        log_bound = -t * base + t * _log(size)
        ratio = math.exp(_log(mu) - log_bound)
        worst = max(worst, ratio)
        if ratio > 1 + 1e-9:
            bad += 1
    return MassReport(len(intervals), worst, bad, t)
