"""Piecewise expanding interval maps, their non-autonomous sequences and cylinders.

Every built-in branch is a fractional-linear (Möbius) map ``x -> (a x + b)/(c x + d)``
with rational coefficients.  Compositions of such branches are again Möbius, so
iterates, inverse branches and derivatives of ``T_{i,N}`` are computed exactly
by multiplying 2x2 matrices.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Sequence

from .geometry import Interval
from .numeric import Scalar, parse_rational, upper_fraction


class UnknownSymbol(KeyError):
    """A word uses a symbol outside the alphabet of the map at that time."""


class BoundaryOrbit(ValueError):
    """An orbit hit a branch endpoint (the point lies in the exceptional set)."""


class InsufficientCertificate(ValueError):
    """A non-affine branch carries no Hölder or Rényi distortion data."""


class UnsupportedAssumption(ValueError):
    """The map sequence does not satisfy the structural assumption required."""


class InvalidMapSpec(ValueError):
    """A JSON map description could not be turned into a map."""


@dataclass(frozen=True)
class Mobius:
    """The map ``x -> (a x + b) / (c x + d)``."""

    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction

    @classmethod
    def affine(cls, slope, intercept) -> "Mobius":
        return cls(Fraction(slope), Fraction(intercept), Fraction(0), Fraction(1))

    @classmethod
    def identity(cls) -> "Mobius":
        return cls(Fraction(1), Fraction(0), Fraction(0), Fraction(1))

    @property
    def det(self) -> Fraction:
        return self.a * self.d - self.b * self.c

    @property
    def is_affine(self) -> bool:
        return self.c == 0

    def __call__(self, x):
        if self.c == 0:
            if self.d == 1:
                return self.a * x + self.b
            return (self.a * x + self.b) / self.d
        return (self.a * x + self.b) / (self.c * x + self.d)

    def derivative(self, x):
        if self.c == 0:
            return self.a / self.d + 0 * x
        denom = self.c * x + self.d
        return self.det / (denom * denom)

    def then(self, outer: "Mobius") -> "Mobius":
        """The composition ``outer ∘ self``."""
        o = outer
        a = o.a * self.a + o.b * self.c
        b = o.a * self.b + o.b * self.d
        c = o.c * self.a + o.d * self.c
        d = o.c * self.b + o.d * self.d
        if c == 0 and d != 1:
            a, b, c, d = a / d, b / d, Fraction(0), Fraction(1)
        return Mobius(a, b, c, d)

    def inverse(self) -> "Mobius":
        m = Mobius(self.d, -self.b, -self.c, self.a)
        if m.c == 0 and m.d != 1:
            return Mobius(m.a / m.d, m.b / m.d, Fraction(0), Fraction(1))
        return m

    def image(self, lo, hi):
        """Image of ``[lo, hi]`` (assumed pole-free) as a sorted pair."""
        u, v = self(lo), self(hi)
        return (u, v) if u <= v else (v, u)


@dataclass(frozen=True)
class Branch:
    """One monotone piece ``T|_{I_i}`` of a piecewise map."""

    symbol: int
    lo: Fraction
    hi: Fraction
    mobius: Mobius
    renyi: Fraction | None = None
    holder: tuple[Fraction, Fraction] | None = None

    @property
    def domain(self) -> Interval:
        return Interval.open(self.lo, self.hi)

    @property
    def is_affine(self) -> bool:
        return self.mobius.is_affine

    @property
    def increasing(self) -> bool:
        return self.mobius.det > 0

    @property
    def image(self) -> tuple[Fraction, Fraction]:
        return self.mobius.image(self.lo, self.hi)

    @property
    def is_full(self) -> bool:
        return self.image == (0, 1)

    def forward(self, x):
        return self.mobius(x)

    def derivative(self, x):
        return self.mobius.derivative(x)

    def inverse(self, y):
        return self.mobius.inverse()(y)

    @property
    def derivative_range(self) -> tuple[Fraction, Fraction]:
        """Inf and sup of ``|T'|`` over the domain (monotone, so endpoints suffice)."""
        u = abs(self.mobius.derivative(self.lo))
        v = abs(self.mobius.derivative(self.hi))
        return (u, v) if u <= v else (v, u)


class PiecewiseMap:
    """A piecewise monotone expanding map of [0,1].

    Finite maps hold their branches in a tuple.  Infinite maps (Gauss, Lüroth)
    generate branch ``k`` on demand; their domains accumulate at 0 and are
    ordered so that branch ``k`` lies to the right of branch ``k+1``.
    """

    def __init__(
        self,
        name: str,
        branches: Sequence[Branch] | None = None,
        *,
        factory: Callable[[int], Branch] | None = None,
        full: bool | None = None,
        renyi: Fraction | None = None,
        tail_derivative: Callable[[int], Fraction] | None = None,
        key: tuple = (),
    ):
        if (branches is None) == (factory is None):
            raise ValueError("give exactly one of branches or factory")
        self.name = name
        self.key = key or (name,)
        self._branches = tuple(branches) if branches is not None else None
        self._factory = factory
        self._cache: dict[int, Branch] = {}
        self._lock = threading.Lock()
        self.renyi = renyi
        self._tail_derivative = tail_derivative
        if self._branches is not None:
            self._by_symbol = {b.symbol: b for b in self._branches}
            self._check_partition()
            self.full = all(b.is_full for b in self._branches) if full is None else full
        else:
            self._by_symbol = None
            self.full = bool(full)

    def _check_partition(self):
        bs = sorted(self._branches, key=lambda b: b.lo)
        if bs[0].lo != 0 or bs[-1].hi != 1:
            raise InvalidMapSpec(f"{self.name}: branch domains must cover [0,1]")
        for left, right in zip(bs, bs[1:]):
            if left.hi != right.lo:
                raise InvalidMapSpec(f"{self.name}: branch domains must tile [0,1]")
        for b in bs:
            lo, hi = b.image
            if lo < 0 or hi > 1:
                raise InvalidMapSpec(f"{self.name}: branch {b.symbol} leaves [0,1]")
            dmin, _ = b.derivative_range
            if dmin < 1:
                raise InvalidMapSpec(f"{self.name}: branch {b.symbol} has |T'| < 1")

    def __repr__(self) -> str:
        return f"PiecewiseMap({self.name!r})"

    @property
    def finite(self) -> bool:
        return self._branches is not None

    @property
    def branches(self) -> tuple[Branch, ...]:
        if self._branches is None:
            raise ValueError(f"{self.name} has infinitely many branches")
        return self._branches

    @property
    def affine(self) -> bool:
        if self._branches is not None:
            return all(b.is_affine for b in self._branches)
        return self.renyi is None

    def branch(self, symbol: int) -> Branch:
        if self._by_symbol is not None:
            try:
                return self._by_symbol[symbol]
            except KeyError:
                raise UnknownSymbol(f"{self.name}: no branch with symbol {symbol!r}") from None
        if not isinstance(symbol, int) or symbol < 1:
            raise UnknownSymbol(f"{self.name}: no branch with symbol {symbol!r}")
        hit = self._cache.get(symbol)
        if hit is None:
            hit = self._factory(symbol)  # type: ignore[misc]
            with self._lock:
                self._cache.setdefault(symbol, hit)
        return hit

    def branch_at(self, x) -> Branch:
        """Branch whose open domain contains ``x``; boundary points raise."""
        if self._branches is not None:
            for b in self._branches:
                if b.lo < x < b.hi:
                    return b
            raise BoundaryOrbit(f"{self.name}: point {x} is a branch endpoint or outside (0,1)")
        if not (0 < x < 1):
            raise BoundaryOrbit(f"{self.name}: point {x} outside (0,1)")
        k = math.floor(1 / x)
        b = self.branch(k)
        if b.lo < x < b.hi:
            return b
        raise BoundaryOrbit(f"{self.name}: point {x} is a branch endpoint")

    def branches_meeting(self, lo, hi) -> Iterator[Branch]:
        """Branches whose open domain meets the closed interval ``[lo, hi]``.

        For infinite maps the iterator is infinite when ``lo <= 0``; callers
        prune with :meth:`tail_bound`.
        """
        if self._branches is not None:
            for b in self._branches:
                if b.lo < hi and b.hi > lo:
                    yield b
            return
        if hi <= 0:
            return
        k = max(1, math.floor(1 / hi) if hi < 1 else 1)
        while True:
            b = self.branch(k)
            if b.hi <= lo:
                return
            if b.lo < hi:
                yield b
            k += 1

    def tail_bound(self, symbol: int) -> tuple[Fraction, Fraction]:
        """For infinite maps: ``(right end, inf|T'|)`` of the union of branches after ``symbol``."""
        if self._tail_derivative is None:
            raise ValueError(f"{self.name} has no tail")
        return self.branch(symbol).lo, self._tail_derivative(symbol)

    def __call__(self, x):
        return self.branch_at(x).forward(x)

    def max_derivative(self) -> Fraction:
        return max(b.derivative_range[1] for b in self.branches)

    def min_derivative(self) -> Fraction:
        if self._branches is None:
            return self.branch(1).derivative_range[0]
        return min(b.derivative_range[0] for b in self._branches)


# -- families ---------------------------------------------------------------


def times_map(m: int) -> PiecewiseMap:
    """``x -> m x mod 1`` with digits ``0..m-1``."""
    if m < 2:
        raise InvalidMapSpec("times map needs m >= 2")
    branches = [
        Branch(j, Fraction(j, m), Fraction(j + 1, m), Mobius.affine(m, -j)) for j in range(m)
    ]
    return PiecewiseMap(f"times{m}", branches, key=("times", m))


def beta_map(beta) -> PiecewiseMap:
    """β-transformation ``x -> β x mod 1`` with digits ``0..⌈β⌉-1``."""
    beta = parse_rational(beta)
    if beta <= 1:
        raise InvalidMapSpec("beta must exceed 1")
    count = math.ceil(beta)
    branches = []
    for j in range(count):
        lo = Fraction(j) / beta
        hi = min(Fraction(j + 1) / beta, Fraction(1))
        branches.append(Branch(j, lo, hi, Mobius.affine(beta, -j)))
    return PiecewiseMap(f"beta{beta}", branches, key=("beta", beta))


def qcantor_factor(q: int) -> PiecewiseMap:
    """``x -> q x mod 1`` with digits ``0..q-1``."""
    if q < 2:
        raise InvalidMapSpec("Q-Cantor entries must be at least 2")
    branches = [
        Branch(j, Fraction(j, q), Fraction(j + 1, q), Mobius.affine(q, -j)) for j in range(q)
    ]
    return PiecewiseMap(f"q{q}", branches, key=("qcantor", q))


def gauss_map() -> PiecewiseMap:
    """``x -> 1/x - ⌊1/x⌋``; branch ``k`` lives on ``(1/(k+1), 1/k)``."""

    def make(k: int) -> Branch:
        return Branch(
            k,
            Fraction(1, k + 1),
            Fraction(1, k),
            Mobius(Fraction(-k), Fraction(1), Fraction(1), Fraction(0)),
            renyi=Fraction(2),
        )

    return PiecewiseMap(
        "gauss",
        factory=make,
        full=True,
        renyi=Fraction(2),
        tail_derivative=lambda k: Fraction((k + 1) ** 2),
        key=("gauss",),
    )


def luroth_map() -> PiecewiseMap:
    """Lüroth map ``x -> k(k+1) x - k`` on ``(1/(k+1), 1/k)``."""

    def make(k: int) -> Branch:
        return Branch(k, Fraction(1, k + 1), Fraction(1, k), Mobius.affine(k * (k + 1), -k))

    return PiecewiseMap(
        "luroth",
        factory=make,
        full=True,
        tail_derivative=lambda k: Fraction((k + 1) * (k + 2)),
        key=("luroth",),
    )


def piecewise_affine_map(breakpoints, slopes, intercepts=None) -> PiecewiseMap:
    """Affine branches on consecutive breakpoints.

    Without explicit intercepts an increasing branch sends its left end to 0
    and a decreasing one sends its right end to 0.
    """
    pts = [parse_rational(p) for p in breakpoints]
    ks = [parse_rational(s) for s in slopes]
    if len(pts) != len(ks) + 1:
        raise InvalidMapSpec("need one more breakpoint than slopes")
    if intercepts is not None and len(intercepts) != len(ks):
        raise InvalidMapSpec("need one intercept per slope")
    branches = []
    for j, k in enumerate(ks):
        if k == 0:
            raise InvalidMapSpec("slopes must be nonzero")
        if intercepts is not None:
            b = parse_rational(intercepts[j])
        elif k > 0:
            b = -k * pts[j]
        else:
            b = -k * pts[j + 1]
        branches.append(Branch(j, pts[j], pts[j + 1], Mobius.affine(k, b)))
    return PiecewiseMap("piecewise_affine", branches, key=("pwa", tuple(pts), tuple(ks)))


# -- sequences --------------------------------------------------------------


@dataclass(frozen=True)
class ExpansionCertificate:
    """``|(T_{i,N0})'| >= eta`` on every depth-``N0`` cylinder, for every ``i``."""

    steps: int
    eta: Fraction

    def bound(self, depth: int) -> Fraction:
        return self.eta ** (depth // self.steps)


class MapSequence:
    """A periodic schedule of piecewise maps ``T_1, T_2, ...``.

    ``at(n)`` is 1-indexed.  All sequences here are periodic, so the set of
    distinct maps is finite and "for every start index" quantifiers reduce to
    one period.
    """

    def __init__(self, maps: Sequence[PiecewiseMap], schedule: Sequence[int] | None = None,
                 certificate: ExpansionCertificate | None = None, name: str | None = None):
        if not maps:
            raise InvalidMapSpec("a map sequence needs at least one map")
        self.maps = tuple(maps)
        self.schedule = tuple(schedule) if schedule is not None else tuple(range(len(maps)))
        if not self.schedule or any(not 0 <= j < len(maps) for j in self.schedule):
            raise InvalidMapSpec("schedule entries must index the map list")
        self.name = name or "+".join(m.name for m in self.maps)
        self._certificate = certificate
        self._distortion: Fraction | None = None
        self._lock = threading.Lock()

    def __repr__(self) -> str:
        return f"MapSequence({self.name!r}, period={self.period})"

    @classmethod
    def autonomous(cls, m: PiecewiseMap, certificate=None) -> "MapSequence":
        return cls([m], certificate=certificate, name=m.name)

    @property
    def period(self) -> int:
        return len(self.schedule)

    def at(self, n: int) -> PiecewiseMap:
        if n < 1:
            raise ValueError("time index starts at 1")
        return self.maps[self.schedule[(n - 1) % self.period]]

    @property
    def distinct_maps(self) -> tuple[PiecewiseMap, ...]:
        used = sorted(set(self.schedule))
        return tuple(self.maps[j] for j in used)

    @property
    def assumptions(self) -> frozenset[str]:
        """``{"A"}`` for (A'), ``{"B"}`` for (B'), possibly both."""
        tags = set()
        if all(m.finite for m in self.distinct_maps):
            tags.add("A")
        if all(m.full for m in self.distinct_maps):
            tags.add("B")
        return frozenset(tags)

    @property
    def affine(self) -> bool:
        return all(m.affine for m in self.distinct_maps)

    @property
    def certificate(self) -> ExpansionCertificate:
        if self._certificate is None:
            self._certificate = self._default_certificate()
        return self._certificate

    def _default_certificate(self) -> ExpansionCertificate:
        mins = [self.at(i).min_derivative() for i in range(1, self.period + 1)]
        if all(m > 1 for m in mins):
            return ExpansionCertificate(1, min(mins))
        # product over one period
        worst = None
        for start in range(1, self.period + 1):
            prod = Fraction(1)
            for j in range(self.period):
                prod *= self.at(start + j).min_derivative()
            worst = prod if worst is None else min(worst, prod)
        if worst is None or worst <= 1:
            raise InsufficientCertificate(
                f"{self.name}: no expansion certificate could be derived; supply one"
            )
        return ExpansionCertificate(self.period, worst)

    def max_derivative(self) -> Fraction:
        """The constant ``M``: sup of ``|T_n'|`` over all branches and times."""
        return max(m.max_derivative() for m in self.distinct_maps)

    def distortion_bound(self) -> Fraction:
        with self._lock:
            if self._distortion is None:
                self._distortion = _distortion_bound(self)
            return self._distortion


def _distortion_bound(seq: MapSequence) -> Fraction:
    if seq.affine:
        return Fraction(1)
    cert = seq.certificate
    if cert.eta <= 1:
        raise InsufficientCertificate("expansion constant must exceed 1")
    # Rényi data: |T''|/T'^2 <= R gives log C <= R * sum of cylinder lengths,
    # and a depth-m cylinder is no longer than eta^{-floor(m/N0)}.
    renyi = [m.renyi for m in seq.distinct_maps if not m.affine]
    if all(r is not None for r in renyi):
        r = max(renyi)
        eta = float(cert.eta)
        total = cert.steps * eta / (eta - 1)
        return upper_fraction(math.exp(float(r) * total))
    holders = []
    for m in seq.distinct_maps:
        if m.affine:
            continue
        if not m.finite:
            raise InsufficientCertificate(f"{m.name}: infinite map without Rényi data")
        for b in m.branches:
            if b.is_affine:
                continue
            if b.holder is None:
                raise InsufficientCertificate(f"{m.name}: branch {b.symbol} lacks Hölder data")
            holders.append(b.holder)
    kappa = min(float(k) for k, _ in holders)
    const = max(float(h) for _, h in holders)
    rho = float(cert.eta) ** (-1.0 / cert.steps)
    # log C <= H * sum_m sup|I_v|^kappa with |I_v| <= eta*rho^m
    total = const * (float(cert.eta) ** kappa) / (1 - rho**kappa)
    return upper_fraction(math.exp(total))


def distortion_bound(seq: MapSequence) -> Fraction:
    """Certified ``C_2 >= 1`` bounding derivative ratios of ``T_{1,n}`` on cylinders."""
    return seq.distortion_bound()


# -- cylinders and orbits ------------------------------------------------------


@dataclass(frozen=True)
class Cylinder:
    start: int
    word: tuple
    interval: Interval | None
    composite: Mobius | None = field(default=None, compare=False)

    @property
    def empty(self) -> bool:
        return self.interval is None

    @property
    def length(self):
        return Fraction(0) if self.interval is None else self.interval.length

    @property
    def depth(self) -> int:
        return len(self.word)


def cylinder(seq: MapSequence, start: int, word: Sequence[int]) -> Cylinder:
    """``I_u(start, |u|)`` by pulling the innermost domain back through inverse branches."""
    word = tuple(word)
    if not word:
        return Cylinder(start, word, Interval.open(Fraction(0), Fraction(1)), Mobius.identity())
    branches = [seq.at(start + j).branch(sym) for j, sym in enumerate(word)]
    lo, hi = branches[-1].lo, branches[-1].hi
    for b in reversed(branches[:-1]):
        ilo, ihi = b.image
        lo, hi = max(lo, ilo), min(hi, ihi)
        if lo >= hi:
            return Cylinder(start, word, None)
        lo, hi = b.mobius.inverse().image(lo, hi)
    composite = Mobius.identity()
    for b in branches:
        composite = composite.then(b.mobius)
    return Cylinder(start, word, Interval.open(lo, hi), composite)


def orbit(seq: MapSequence, start: int, length: int, x) -> list:
    """``[x, T_i x, T_{i+1} T_i x, ...]`` with ``length + 1`` entries."""
    values = [x]
    for j in range(length):
        x = seq.at(start + j)(x)
        values.append(x)
    return values


def compose_apply(seq: MapSequence, start: int, length: int, x):
    """``T_{start, length}(x)``; raises :class:`BoundaryOrbit` on branch endpoints."""
    for j in range(length):
        x = seq.at(start + j)(x)
    return x


def compose_derivative(seq: MapSequence, start: int, length: int, x):
    """Product of branch derivatives along the orbit of ``x``."""
    deriv = 1
    for j in range(length):
        b = seq.at(start + j).branch_at(x)
        deriv = deriv * b.derivative(x)
        x = b.forward(x)
    return deriv


def itinerary(seq: MapSequence, start: int, length: int, x) -> tuple:
    word = []
    for j in range(length):
        b = seq.at(start + j).branch_at(x)
        word.append(b.symbol)
        x = b.forward(x)
    return tuple(word)


def diameter_derivative_check(seq: MapSequence, cyl: Cylinder, x) -> Scalar:
    """``|I_u| * |(T_{i,N})'(x)|`` for a point inside a cylinder of a full-branch sequence."""
    if "B" not in seq.assumptions:
        raise UnsupportedAssumption("diameter/derivative duality needs full branches")
    if cyl.interval is None or not cyl.interval.contains(x):
        raise ValueError("sample point must lie inside the cylinder")
    return cyl.length * abs(compose_derivative(seq, cyl.start, cyl.depth, x))


def min_expansion(seq: MapSequence, depth: int, starts: Sequence[int] | None = None) -> Fraction:
    """Certified lower bound for ``inf |(T_{i,depth})'|`` over cylinders and start times."""
    if depth <= 0:
        return Fraction(1)
    starts = starts if starts is not None else range(1, seq.period + 1)
    per_step = None
    for i in starts:
        prod = Fraction(1)
        for j in range(depth):
            prod *= seq.at(i + j).min_derivative()
        per_step = prod if per_step is None else min(per_step, prod)
    cert = seq.certificate.bound(depth)
    return max(per_step, cert)  # type: ignore[type-var]


# -- cylinder tree walking -------------------------------------------------------


@dataclass
class Node:
    """A nonempty cylinder with the composite map sending it onto its image."""

    word: tuple
    lo: Fraction
    hi: Fraction
    composite: Mobius
    image_lo: Fraction
    image_hi: Fraction

    @property
    def depth(self) -> int:
        return len(self.word)

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    @property
    def interval(self) -> Interval:
        return Interval.open(self.lo, self.hi)

    def derivative_range(self, lo, hi):
        """Inf and sup of ``|F'|`` on ``[lo, hi]`` within the cylinder (monotone)."""
        u = abs(self.composite.derivative(lo))
        v = abs(self.composite.derivative(hi))
        return (u, v) if u <= v else (v, u)


def root_node() -> Node:
    zero, one = Fraction(0), Fraction(1)
    return Node((), zero, one, Mobius.identity(), zero, one)


def children(seq: MapSequence, start: int, node: Node, lo, hi,
             prune: Callable[[Fraction, Fraction], bool] | None = None) -> Iterator[Node]:
    """Depth+1 cylinders inside ``node`` meeting ``[lo, hi]``.

    ``prune(inf_derivative, piece_length)`` may return True to stop an
    infinite branch enumeration once the remaining tail is irrelevant; it is
    consulted with the tail's derivative bound and preimage length.
    """
    m = seq.at(start + node.depth)
    inv = node.composite.inverse()
    # restrict the query to the part of the image coming from [lo, hi]
    qlo, qhi = max(lo, node.lo), min(hi, node.hi)
    if qlo > qhi:
        return
    ilo, ihi = node.composite.image(qlo, qhi)
    for b in m.branches_meeting(ilo, ihi):
        plo, phi = max(b.lo, node.image_lo), min(b.hi, node.image_hi)
        if plo >= phi:
            continue
        clo, chi = inv.image(plo, phi)
        if clo < hi and chi > lo:
            comp = node.composite.then(b.mobius)
            jlo, jhi = b.mobius.image(plo, phi)
            yield Node(node.word + (b.symbol,), clo, chi, comp, jlo, jhi)
        if not m.finite:
            tail_right, tail_deriv = m.tail_bound(b.symbol)
            tlo, thi = max(Fraction(0), node.image_lo), min(tail_right, node.image_hi)
            if tlo >= thi:
                return
            xlo, xhi = inv.image(tlo, thi)
            if not (xlo < hi and xhi > lo):
                return
            if prune is not None:
                dlo, _ = node.derivative_range(xlo, xhi)
                if prune(dlo * tail_deriv, xhi - xlo):
                    return
            elif b.symbol > 10**6:
                raise ValueError("unbounded branch enumeration; supply a prune rule")


def cylinders_meeting(seq: MapSequence, start: int, depth: int, lo, hi) -> list[Node]:
    """All nonempty depth-``depth`` cylinders meeting ``[lo, hi]`` (finite maps only)."""
    level = [root_node()]
    for _ in range(depth):
        nxt: list[Node] = []
        for node in level:
            nxt.extend(children(seq, start, node, lo, hi))
        level = nxt
    return level


def cylinder_table(seq: MapSequence, depth: int, start: int = 1) -> list[Node]:
    """Every nonempty depth-``depth`` cylinder (finite-branch maps only)."""
    return cylinders_meeting(seq, start, depth, Fraction(0), Fraction(1))


def cylinder_endpoints(seq: MapSequence, start: int, depth: int, lo, hi) -> list[Fraction]:
    """Endpoints of depth-``depth`` cylinders lying in the closed interval ``[lo, hi]``."""
    points = set()
    for node in cylinders_meeting(seq, start, depth, lo, hi):
        for p in (node.lo, node.hi):
            if lo <= p <= hi:
                points.add(p)
    if not points:
        # no cylinder meets, but 0 or 1 may still be inside the query
        for p in (Fraction(0), Fraction(1)):
            if lo <= p <= hi:
                points.add(p)
    return sorted(points)


def containing_node(seq: MapSequence, start: int, depth: int, lo, hi,
                    hint: Node | None = None) -> Node | None:
    """The depth-``depth`` cylinder whose closure contains ``[lo, hi]``, if unique.

    ``hint`` may be an ancestor node already known to contain the interval.
    Returns ``None`` when the interval straddles two cylinders.
    """
    node = hint if hint is not None else root_node()
    while node.depth < depth:
        found = None
        for child in children(seq, start, node, lo, hi):
            if child.lo <= lo and hi <= child.hi:
                found = child
                break
            if child.hi > lo and child.lo < hi:
                # meets but does not contain
                return None
        if found is None:
            return None
        node = found
    return node


def min_cylinder_length(seq: MapSequence, depth: int, state_cap: int = 20000) -> Fraction:
    """The constant ``ℓ``: shortest nonempty depth-``depth`` cylinder over all start times.

    Affine maps are handled by dynamic programming over image intervals,
    keeping the largest slope product per image; non-affine or oversized
    instances fall back to a certified lower bound.
    """
    if "A" not in seq.assumptions:
        raise UnsupportedAssumption("ℓ is only defined for finitely many finite-branch maps")
    best = None
    for start in range(1, seq.period + 1):
        value = _min_length_from(seq, start, depth, state_cap)
        best = value if best is None else min(best, value)
    return best  # type: ignore[return-value]


def _beta_parameter(seq: MapSequence) -> Fraction | None:
    if seq.period == 1 and seq.maps[0].key[0] == "beta":
        return seq.maps[0].key[1]
    return None


def _min_length_from(seq: MapSequence, start: int, depth: int, state_cap: int) -> Fraction:
    if not seq.affine:
        return _min_length_lower_bound(seq, start, depth)
    beta = _beta_parameter(seq)
    if beta is not None:
        # reachable images are (0,1) and (0, t_j), t_j the left-limit orbit of 1
        t, shortest = Fraction(1), Fraction(1)
        for _ in range(depth):
            t = beta * t - (math.ceil(beta * t) - 1)
            shortest = min(shortest, t)
        return shortest / beta**depth
    # state: image interval of T_{start,j} on a cylinder -> max |slope product|
    states: dict[tuple[Fraction, Fraction], Fraction] = {(Fraction(0), Fraction(1)): Fraction(1)}
    for j in range(depth):
        m = seq.at(start + j)
        nxt: dict[tuple[Fraction, Fraction], Fraction] = {}
        for (ilo, ihi), slope in states.items():
            for b in m.branches_meeting(ilo, ihi):
                plo, phi = max(b.lo, ilo), min(b.hi, ihi)
                if plo >= phi:
                    continue
                img = b.mobius.image(plo, phi)
                s = slope * abs(b.mobius.a)
                if nxt.get(img, 0) < s:
                    nxt[img] = s
        states = nxt
        if len(states) > state_cap:
            return _min_length_lower_bound(seq, start, depth)
    # a cylinder with image J and slope product S has length |J|/S
    return min((hi - lo) / s for (lo, hi), s in states.items())


def _min_length_lower_bound(seq: MapSequence, start: int, depth: int) -> Fraction:
    """Crude but certified: shortest branch image over sup of the derivative product."""
    shortest = None
    sup = Fraction(1)
    for j in range(depth):
        m = seq.at(start + j)
        sup *= m.max_derivative()
        for b in m.branches:
            lo, hi = b.image
            ln = hi - lo
            shortest = ln if shortest is None else min(shortest, ln)
    return shortest / sup  # type: ignore[operator]


# -- product systems -------------------------------------------------------------


@dataclass
class ProductSystem:
    """``T_n = T_{n,1} ⊗ T_{n,2}``: an interval sequence on coordinate 1 and an opaque rest."""

    first: MapSequence
    rest: Callable[[int, tuple], tuple] | None = None

    def apply(self, n: int, x: tuple) -> tuple:
        head = self.first.at(n)(x[0])
        if len(x) == 1:
            return (head,)
        if self.rest is None:
            raise ValueError("multi-dimensional point but no second factor given")
        return (head,) + tuple(self.rest(n, tuple(x[1:])))


# -- JSON specs --------------------------------------------------------------------


def map_from_spec(spec: dict) -> MapSequence:
    """Build a :class:`MapSequence` from a JSON-style description."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise InvalidMapSpec("map spec must be an object with a 'kind'")
    kind = spec["kind"]
    cert = None
    if "certificate" in spec:
        c = spec["certificate"]
        cert = ExpansionCertificate(int(c["steps"]), parse_rational(c["eta"]))
    try:
        if kind == "beta":
            return MapSequence.autonomous(beta_map(spec["beta"]), cert)
        if kind == "times":
            return MapSequence.autonomous(times_map(int(spec["m"])), cert)
        if kind == "gauss":
            # |(T^2)'(x)| = 1/(x T x)^2 > 4 because x T(x) = 1 - kx < 1/2
            cert = cert or ExpansionCertificate(2, Fraction(4))
            return MapSequence.autonomous(gauss_map(), cert)
        if kind == "luroth":
            return MapSequence.autonomous(luroth_map(), cert)
        if kind == "qcantor":
            qs = [int(q) for q in spec["q"]]
            period = int(spec.get("period", len(qs)))
            if period < 1 or period > len(qs):
                raise InvalidMapSpec("period must be between 1 and len(q)")
            qs = qs[:period]
            distinct = sorted(set(qs))
            maps = [qcantor_factor(q) for q in distinct]
            schedule = [distinct.index(q) for q in qs]
            return MapSequence(maps, schedule, cert, name=f"qcantor{tuple(qs)}")
        if kind == "piecewise_affine":
            m = piecewise_affine_map(spec["breakpoints"], spec["slopes"], spec.get("intercepts"))
            return MapSequence.autonomous(m, cert)
        if kind == "sequence":
            items = [map_from_spec(item) for item in spec["items"]]
            maps = []
            for seq in items:
                if seq.period != 1:
                    raise InvalidMapSpec("sequence items must be single maps")
                maps.append(seq.maps[0])
            schedule = spec.get("schedule")
            if schedule in (None, "cycle"):
                schedule = list(range(len(maps)))
            return MapSequence(maps, [int(j) for j in schedule], cert)
    except (KeyError, TypeError) as exc:
        raise InvalidMapSpec(f"bad {kind!r} map spec: {exc}") from exc
    raise InvalidMapSpec(f"unknown map kind {kind!r}")
