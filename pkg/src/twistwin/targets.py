"""Target sequences ``g_n : [0,1]^d -> [0,1]^d`` with a declared Lipschitz constant."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

from .numeric import parse_rational, to_float, to_text


class InvalidTarget(ValueError):
    """A target value left the unit cube or the target spec is malformed."""


class TargetSequence:
    """Base class; subclasses implement :meth:`_value`."""

    kind = "custom"

    def __init__(self, dimension: int, lipschitz):
        if dimension < 1:
            raise InvalidTarget("dimension must be positive")
        self.dimension = dimension
        self.lipschitz = parse_rational(lipschitz)
        if self.lipschitz < 0:
            raise InvalidTarget("Lipschitz constant must be nonnegative")

    def _value(self, n: int, x: tuple) -> tuple:
        raise NotImplementedError

    def evaluate(self, n: int, x: Sequence) -> tuple:
        """``g_n(x)``, checked to lie in the unit cube."""
        x = tuple(x)
        if len(x) != self.dimension:
            raise InvalidTarget(f"expected a {self.dimension}-vector, got {len(x)} coordinates")
        value = tuple(self._value(n, x))
        for v in value:
            if v < 0 or v > 1:
                raise InvalidTarget(f"g_{n}({x}) = {value} escapes the unit cube")
        return value

    def coordinate_affine(self, n: int):
        """``(slope, intercept)`` when ``g_n(x)_1`` is affine in ``x_1`` alone, else ``None``."""
        return None

    def to_json(self) -> dict:
        return {"kind": self.kind, "dimension": self.dimension, "lipschitz": to_text(self.lipschitz)}


class ConstantTarget(TargetSequence):
    kind = "constant"

    def __init__(self, point: Sequence):
        point = tuple(parse_rational(p) for p in point)
        super().__init__(len(point), 0)
        self.point = point

    def _value(self, n, x):
        return self.point

    def coordinate_affine(self, n):
        return Fraction(0), self.point[0]

    def to_json(self):
        return {"kind": self.kind, "point": [to_text(p) for p in self.point]}


class IdentityTarget(TargetSequence):
    kind = "identity"

    def __init__(self, dimension: int = 1):
        super().__init__(dimension, 1)

    def _value(self, n, x):
        return x

    def coordinate_affine(self, n):
        return Fraction(1), Fraction(0)

    def to_json(self):
        return {"kind": self.kind, "dimension": self.dimension}


class PointSequenceTarget(TargetSequence):
    """``g_n ≡ y_n`` for a given point sequence (Lipschitz constant 0)."""

    kind = "point_sequence"

    def __init__(self, points: Sequence[Sequence] | None = None, *,
                 function: Callable[[int], Sequence] | None = None, dimension: int | None = None):
        if (points is None) == (function is None):
            raise InvalidTarget("give exactly one of points or function")
        if points is not None:
            pts = [tuple(parse_rational(v) for v in p) for p in points]
            if not pts:
                raise InvalidTarget("point sequence is empty")
            dims = {len(p) for p in pts}
            if len(dims) != 1:
                raise InvalidTarget("all points must have the same dimension")
            dimension = dims.pop()
            self.points = pts
            self.function = None
        else:
            self.points = None
            self.function = function
            dimension = dimension or 1
        super().__init__(dimension, 0)

    @classmethod
    def from_file(cls, path: str | Path) -> "PointSequenceTarget":
        """One whitespace- or comma-separated decimal vector per line."""
        points = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line and not line.startswith("#"):
                    points.append(line.replace(",", " ").split())
        return cls(points)

    def point(self, n: int) -> tuple:
        if self.points is not None:
            if n < 1 or n > len(self.points):
                raise InvalidTarget(f"point sequence has no entry for n={n}")
            return self.points[n - 1]
        return tuple(self.function(n))  # type: ignore[misc]

    def _value(self, n, x):
        return self.point(n)

    def coordinate_affine(self, n):
        return Fraction(0), self.point(n)[0]

    def to_json(self):
        if self.points is None:
            raise InvalidTarget("function-backed point sequences are not serializable")
        return {"kind": self.kind, "points": [[to_text(v) for v in p] for p in self.points]}


class AffineTarget(TargetSequence):
    """``g(x) = A x + b`` for every ``n``; ``A`` may be a scalar or a matrix."""

    kind = "affine"

    def __init__(self, scale, shift: Sequence):
        shift = tuple(parse_rational(v) for v in shift)
        d = len(shift)
        if isinstance(scale, (list, tuple)):
            matrix = [[parse_rational(v) for v in row] for row in scale]
            if len(matrix) != d or any(len(row) != d for row in matrix):
                raise InvalidTarget("affine matrix must be d x d")
        else:
            s = parse_rational(scale)
            matrix = [[s if i == j else Fraction(0) for j in range(d)] for i in range(d)]
        self.matrix = matrix
        self.shift = shift
        # operator norm for the max norm is the largest absolute row sum
        super().__init__(d, max(sum(abs(v) for v in row) for row in matrix))

    def _value(self, n, x):
        return tuple(sum((a * xi for a, xi in zip(row, x)), 0 * x[0]) + b
                     for row, b in zip(self.matrix, self.shift))

    def coordinate_affine(self, n):
        row = self.matrix[0]
        if any(v != 0 for v in row[1:]):
            return None
        return row[0], self.shift[0]

    def to_json(self):
        return {"kind": self.kind, "scale": [[to_text(v) for v in row] for row in self.matrix],
                "shift": [to_text(v) for v in self.shift]}


class CustomTarget(TargetSequence):
    """A black-box target; the declared constant is trusted and then audited."""

    kind = "custom"

    def __init__(self, function: Callable[[int, tuple], Sequence], dimension: int, lipschitz):
        super().__init__(dimension, lipschitz)
        self.function = function

    def _value(self, n, x):
        return tuple(self.function(n, x))


@dataclass
class AuditReport:
    max_ratio: float
    declared: Fraction
    passed: bool
    worst: tuple | None  # (n, x, y)

    def to_json(self) -> dict:
        return {
            "max_ratio": self.max_ratio,
            "declared": to_text(self.declared),
            "passed": self.passed,
            "worst": None if self.worst is None else {
                "n": self.worst[0], "x": [to_text(v) for v in self.worst[1]],
                "y": [to_text(v) for v in self.worst[2]]},
        }


def _rand_point(rng: random.Random, d: int, denominator: int) -> tuple:
    return tuple(Fraction(rng.randrange(denominator + 1), denominator) for _ in range(d))


def lipschitz_audit(ts: TargetSequence, samples: int = 1000, rng_seed: int = 0,
                    max_n: int = 50, denominator: int = 2**30) -> AuditReport:
    """Largest sampled ``‖g_n(x) - g_n(y)‖ / ‖x - y‖`` (max norm), exact arithmetic."""
    rng = random.Random(rng_seed)
    best = Fraction(0)
    worst = None
    for _ in range(samples):
        n = rng.randint(1, max_n)
        x = _rand_point(rng, ts.dimension, denominator)
        # mix near and far pairs
        if rng.random() < 0.5:
            y = _rand_point(rng, ts.dimension, denominator)
        else:
            eps = Fraction(rng.randint(1, 1000), denominator)
            y = tuple(min(Fraction(1), max(Fraction(0), v + (eps if rng.random() < 0.5 else -eps)))
                      for v in x)
        dist = max(abs(a - b) for a, b in zip(x, y))
        if dist == 0:
            continue
        try:
            gx, gy = ts.evaluate(n, x), ts.evaluate(n, y)
        except InvalidTarget:
            continue
        ratio = max(abs(a - b) for a, b in zip(gx, gy)) / dist
        if ratio > best:
            best, worst = ratio, (n, x, y)
    limit = ts.lipschitz * (1 + Fraction(1, 10**9))
    return AuditReport(float(best), ts.lipschitz, best <= limit, worst if best > limit else None)


def target_from_spec(spec: dict, dimension: int = 1) -> TargetSequence:
    """Build a target from a JSON-style description."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise InvalidTarget("target spec must be an object with a 'kind'")
    kind = spec["kind"]
    try:
        if kind == "constant":
            point = spec.get("point", spec.get("value"))
            if not isinstance(point, (list, tuple)):
                point = [point] * dimension
            return ConstantTarget(point)
        if kind == "identity":
            return IdentityTarget(int(spec.get("dimension", dimension)))
        if kind == "point_sequence":
            if "file" in spec:
                return PointSequenceTarget.from_file(spec["file"])
            return PointSequenceTarget(spec["points"])
        if kind == "affine":
            shift = spec.get("shift", ["0"] * dimension)
            if not isinstance(shift, (list, tuple)):
                shift = [shift] * dimension
            return AffineTarget(spec.get("scale", "1"), shift)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidTarget(f"bad {kind!r} target spec: {exc}") from exc
    raise InvalidTarget(f"unknown or non-serializable target kind {kind!r}")


def target_coordinate(ts: TargetSequence, n: int, x: Sequence):
    """First coordinate of ``g_n(x)``, computed in the number system of ``x``."""
    value = ts.evaluate(n, x)[0]
    if isinstance(x[0], float):
        return to_float(value)
    return value
