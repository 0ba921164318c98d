"""Scalar arithmetic shared by every module.

Two exact-ish number systems are supported:

* ``rational``: :class:`fractions.Fraction`, exact, never rounds.
* ``bigfloat``: :class:`Ball`, an outward-rounded interval with dyadic
  endpoints held to a fixed number of significant bits.  Comparisons whose
  operands overlap raise :class:`IndeterminateComparison` instead of guessing.

A third ``float`` mode exists for quick previews only.
"""

from __future__ import annotations

import math
import os
from fractions import Fraction
from typing import Iterable, Union

DEFAULT_PRECISION = 256
PRECISION_ENV = "TWISTWIN_PRECISION"

MODES = ("rational", "bigfloat", "float")


class IndeterminateComparison(ArithmeticError):
    """Raised when two big-float values cannot be ordered at current precision."""


class PrecisionExhausted(RuntimeError):
    """Raised by the game/strategies when an indeterminate comparison blocks progress."""


def default_precision() -> int:
    raw = os.environ.get(PRECISION_ENV)
    if raw is None:
        return DEFAULT_PRECISION
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"{PRECISION_ENV} must be an integer, got {raw!r}") from exc
    if value < 16:
        raise ValueError(f"{PRECISION_ENV} must be at least 16")
    return value


def _round_dyadic(q: Fraction, prec: int, upward: bool) -> Fraction:
    """Round ``q`` to ``prec`` significant bits, toward +inf if ``upward``."""
    if q == 0:
        return q
    num, den = q.numerator, q.denominator
    # exponent of the leading bit of |q|
    lead = abs(num).bit_length() - den.bit_length()
    shift = prec - lead
    scaled = Fraction(num * (1 << shift), den) if shift >= 0 else Fraction(num, den << -shift)
    k = math.floor(scaled) if not upward else math.ceil(scaled)
    if shift >= 0:
        return Fraction(k, 1 << shift)
    return Fraction(k << -shift, 1)


class Ball:
    """Closed interval ``[lo, hi]`` with dyadic endpoints of bounded size.

    Every operation rounds outward, so the true value always lies inside.
    """

    __slots__ = ("lo", "hi", "prec")

    def __init__(self, lo, hi=None, prec: int | None = None):
        self.prec = prec if prec is not None else default_precision()
        lo = Fraction(lo)
        hi = lo if hi is None else Fraction(hi)
        if lo > hi:
            raise ValueError("Ball lower end exceeds upper end")
        self.lo = _round_dyadic(lo, self.prec, upward=False)
        self.hi = _round_dyadic(hi, self.prec, upward=True)

    @classmethod
    def _raw(cls, lo: Fraction, hi: Fraction, prec: int) -> "Ball":
        obj = cls.__new__(cls)
        obj.prec = prec
        obj.lo = _round_dyadic(lo, prec, upward=False)
        obj.hi = _round_dyadic(hi, prec, upward=True)
        return obj

    # -- helpers ---------------------------------------------------------
    def _coerce(self, other) -> "Ball":
        if isinstance(other, Ball):
            return other
        if isinstance(other, (int, Fraction)):
            q = Fraction(other)
            return Ball._raw(q, q, self.prec)
        if isinstance(other, float):
            q = Fraction(other)
            return Ball._raw(q, q, self.prec)
        return NotImplemented

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def radius(self) -> Fraction:
        return (self.hi - self.lo) / 2

    @property
    def is_exact(self) -> bool:
        return self.lo == self.hi

    def __repr__(self) -> str:
        return f"Ball({float(self.lo)!r}, {float(self.hi)!r})"

    def __float__(self) -> float:
        return float(self.mid)

    # -- arithmetic ------------------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Ball._raw(self.lo + o.lo, self.hi + o.hi, max(self.prec, o.prec))

    __radd__ = __add__

    def __neg__(self):
        return Ball._raw(-self.hi, -self.lo, self.prec)

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Ball._raw(self.lo - o.hi, self.hi - o.lo, max(self.prec, o.prec))

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        products = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return Ball._raw(min(products), max(products), max(self.prec, o.prec))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if o.lo <= 0 <= o.hi:
            raise IndeterminateComparison("division by a ball containing zero")
        quotients = (self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi)
        return Ball._raw(min(quotients), max(quotients), max(self.prec, o.prec))

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return 1 / (self ** (-k))
        result = Ball._raw(Fraction(1), Fraction(1), self.prec)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __abs__(self):
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return Ball._raw(Fraction(0), max(-self.lo, self.hi), self.prec)

    # -- comparisons -----------------------------------------------------
    def __lt__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if self.hi < o.lo:
            return True
        if self.lo >= o.hi:
            return False
        raise IndeterminateComparison(f"cannot order {self!r} and {o!r}")

    def __le__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if self.hi <= o.lo:
            return True
        if self.lo > o.hi:
            return False
        raise IndeterminateComparison(f"cannot order {self!r} and {o!r}")

    def __gt__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o < self

    def __ge__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o <= self

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return False
        if self.is_exact and o.is_exact:
            return self.lo == o.lo
        if self.hi < o.lo or o.hi < self.lo:
            return False
        raise IndeterminateComparison(f"cannot decide equality of {self!r} and {o!r}")

    def __ne__(self, other):
        return not self.__eq__(other)

    __hash__ = None  # type: ignore[assignment]

    def __floor__(self):
        a, b = math.floor(self.lo), math.floor(self.hi)
        if a != b:
            raise IndeterminateComparison(f"floor of {self!r} is ambiguous")
        return a

    def __ceil__(self):
        a, b = math.ceil(self.lo), math.ceil(self.hi)
        if a != b:
            raise IndeterminateComparison(f"ceiling of {self!r} is ambiguous")
        return a


Scalar = Union[Fraction, Ball, float]


def parse_rational(value) -> Fraction:
    """Parse a decimal string, ``p/q`` string, int or Fraction exactly."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        # floats are accepted but read through their shortest decimal repr
        return Fraction(repr(value))
    if isinstance(value, str):
        text = value.strip()
        if "±" in text:
            text = text.split("±", 1)[0]
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a decimal number: {value!r}") from exc
    if isinstance(value, Ball):
        return value.mid
    raise TypeError(f"cannot read {type(value).__name__} as a number")


def convert(value, mode: str = "rational", precision: int | None = None) -> Scalar:
    """Bring ``value`` into the number system of ``mode``."""
    if mode == "rational":
        return parse_rational(value)
    if mode == "bigfloat":
        if isinstance(value, Ball):
            return value
        if isinstance(value, str) and "±" in value:
            mid_text, rad_text = value.split("±", 1)
            mid, rad = Fraction(mid_text), Fraction(rad_text)
            return Ball(mid - rad, mid + rad, precision)
        return Ball(parse_rational(value), None, precision)
    if mode == "float":
        return float(parse_rational(value)) if not isinstance(value, float) else value
    raise ValueError(f"unknown numeric mode {mode!r}; expected one of {MODES}")


def like(value, reference: Scalar) -> Scalar:
    """Convert an exact parameter to the number system of ``reference``."""
    if isinstance(reference, Ball):
        if isinstance(value, Ball):
            return value
        return Ball(Fraction(value), None, reference.prec)
    if isinstance(reference, float):
        return float(value)
    return value


def _exact_decimal(q: Fraction) -> str | None:
    """Terminating decimal expansion of ``q`` if one exists."""
    den = q.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return None
    digits = max(twos, fives)
    scaled = q.numerator * 10**digits // q.denominator
    sign = "-" if scaled < 0 else ""
    scaled = abs(scaled)
    if digits == 0:
        return f"{sign}{scaled}"
    text = str(scaled).rjust(digits + 1, "0")
    whole, frac = text[:-digits], text[-digits:].rstrip("0")
    return f"{sign}{whole}.{frac}" if frac else f"{sign}{whole}"


def to_text(value: Scalar) -> str:
    """Serialize a scalar without going through binary floating point.

    Rationals are written as decimals when the expansion terminates and is
    not much longer than ``p/q``, otherwise as ``p/q``.  Balls are written ``mid±radius`` (both exact).
    """
    if isinstance(value, Ball):
        mid = _exact_decimal(value.mid)
        rad = _exact_decimal(value.radius)
        if value.is_exact:
            return mid  # type: ignore[return-value]
        return f"{mid}±{rad}"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, int):
        return str(value)
    q = Fraction(value)
    text = _exact_decimal(q)
    ratio = f"{q.numerator}/{q.denominator}"
    if text is not None and len(text) <= len(ratio) + 8:
        return text
    return ratio


def to_float(value: Scalar) -> float:
    if isinstance(value, Ball):
        return float(value.mid)
    return float(value)


def exact(value: Scalar) -> Fraction:
    """Best exact representative (midpoint for balls)."""
    if isinstance(value, Ball):
        return value.mid
    return Fraction(value)


def decide(fn) -> bool | None:
    """Evaluate a predicate, mapping indeterminate comparisons to ``None``."""
    try:
        return bool(fn())
    except IndeterminateComparison:
        return None


def smin(values: Iterable[Scalar]) -> Scalar:
    it = iter(values)
    best = next(it)
    for v in it:
        if v < best:
            best = v
    return best


def smax(values: Iterable[Scalar]) -> Scalar:
    it = iter(values)
    best = next(it)
    for v in it:
        if v > best:
            best = v
    return best


def floor_log(base: Fraction, value: Fraction) -> int:
    """Exact ``floor(log_base(value))`` for rational ``base > 1`` and ``value >= 1``."""
    base = Fraction(base)
    value = Fraction(value)
    if base <= 1:
        raise ValueError("base must exceed 1")
    if value < 1:
        raise ValueError("value must be at least 1")
    # float estimate, then exact correction
    k = max(0, int(math.log(value) / math.log(base)) - 2)
    power = base**k
    while power * base <= value:
        power *= base
        k += 1
    while power > value:
        power /= base
        k -= 1
    return k


def upper_fraction(x: float, rel: float = 1e-9) -> Fraction:
    """A rational certainly at least the real number approximated by ``x``."""
    return Fraction(x) * (1 + Fraction(rel)) + Fraction(1, 10**15)
