"""Bob policies used to exercise Alice's strategies."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .dynamics import BoundaryOrbit, MapSequence
from .game import GameState, Trace
from .geometry import Cube, Slab
from .numeric import Ball, PrecisionExhausted, convert, exact, parse_rational, to_text
from .targets import TargetSequence

# a large prime keeps random centers off dyadic and other low-denominator boundaries
GRID_PRIME = 2**61 - 1


class PolicyError(ValueError):
    """Invalid policy parameters or no legal cube could be found."""


def _feasible_centers(cube: Cube, slab: Slab, radius: Fraction) -> list[tuple]:
    """Per-axis center ranges for sub-cubes of ``radius``; one entry per slab side.

    Each entry is ``(weight, ranges, axis, side)`` where ``ranges`` lists a
    closed ``[lo, hi]`` for every axis and, for axis-aligned slabs, the axis
    and the side of the slab (open inequality handled by the caller).
    """
    center = [exact(c) for c in cube.center]
    r = exact(cube.radius)
    box = [(max(c - r + radius, Fraction(0)), min(c + r - radius, Fraction(1))) for c in center]
    if any(lo > hi for lo, hi in box):
        return []
    axis = slab.axis
    if axis is None:
        return [(None, box, None, None)]
    z, eps = exact(slab.offset), exact(slab.halfwidth)
    out = []
    lo, hi = box[axis]
    # left of the slab: c' + radius < z - eps
    left_hi = min(hi, z - eps - radius)
    if lo < left_hi:
        ranges = list(box)
        ranges[axis] = (lo, left_hi)
        out.append((left_hi - lo, ranges, axis, "left"))
    right_lo = max(lo, z + eps + radius)
    if right_lo < hi:
        ranges = list(box)
        ranges[axis] = (right_lo, hi)
        out.append((hi - right_lo, ranges, axis, "right"))
    return out


def _grid_denominator(radius: Fraction, dyadic: bool) -> int:
    # grid spacing well below the new radius
    e = max(0, radius.denominator.bit_length() - radius.numerator.bit_length() + 41)
    return 2**e if dyadic else GRID_PRIME * 2**e


def _grid_point(rng: random.Random, lo: Fraction, hi: Fraction, den: int,
                open_lo: bool = False, open_hi: bool = False) -> Fraction | None:
    a = math.ceil(lo * den)
    if open_lo and Fraction(a, den) == lo:
        a += 1
    b = math.floor(hi * den)
    if open_hi and Fraction(b, den) == hi:
        b -= 1
    if a > b:
        return None
    return Fraction(rng.randint(a, b), den)


def _slab_clear(center: Sequence[Fraction], radius: Fraction, slab: Slab) -> bool:
    value = -exact(slab.offset)
    norm = Fraction(0)
    for n, c in zip(slab.normal, center):
        n = exact(n)
        value += n * c
        norm += abs(n)
    reach = (exact(slab.halfwidth) + radius) * norm
    return value > reach or value < -reach


class BobPolicy:
    """Base class: ``policy(state, slab) -> Cube``."""

    kind = "base"

    def __init__(self, gamma, lam=None, seed: int = 0):
        self.gamma = parse_rational(gamma)
        self.lam = self.gamma if lam is None else parse_rational(lam)
        if not (self.gamma <= self.lam < (1 - self.gamma) / 2):
            raise PolicyError("shrink factor must satisfy gamma <= lambda < (1-gamma)/2")
        self.seed = seed
        self.rng = random.Random(seed)
        self.moves = 0

    def _wrap(self, state: GameState, center, radius) -> Cube:
        cfg = state.config
        if cfg.mode == "rational":
            return Cube(tuple(center), radius)
        return Cube(tuple(convert(c, cfg.mode, cfg.precision) for c in center),
                    convert(radius, cfg.mode, cfg.precision))

    def _radius(self, state: GameState, factor: Fraction) -> Fraction:
        r = exact(state.cube.radius) * factor
        if state.config.mode != "rational" and isinstance(state.cube.radius, Ball):
            # round up to a dyadic so the radius stays exactly representable
            den = 2 ** (state.config.precision or 256)
            r = Fraction(math.ceil(r * den), den)
        return r

    def sample(self, state: GameState, slab: Slab, factor: Fraction | None = None) -> Cube | None:
        """A uniformly placed legal cube of radius ``factor·r`` (``None`` when none fits)."""
        factor = self.lam if factor is None else factor
        radius = self._radius(state, factor)
        options = _feasible_centers(state.cube, slab, radius)
        if not options:
            return None
        dyadic = state.config.mode == "bigfloat"
        den = _grid_denominator(radius, dyadic)
        if options[0][2] is None:
            box = options[0][1]
            for _ in range(400):
                center = [_grid_point(self.rng, lo, hi, den) for lo, hi in box]
                if None not in center and _slab_clear(center, radius, slab):
                    return self._wrap(state, center, radius)
            return self._corner_fallback(state, slab, box, radius, den)
        total = sum(w for w, *_ in options)
        pick = Fraction(self.rng.random()) * total
        chosen = options[-1]
        for opt in options:
            if pick < opt[0]:
                chosen = opt
                break
            pick -= opt[0]
        _, ranges, axis, side = chosen
        center = []
        for j, (lo, hi) in enumerate(ranges):
            if j == axis:
                point = _grid_point(self.rng, lo, hi, den, open_hi=side == "left", open_lo=side == "right")
            else:
                point = _grid_point(self.rng, lo, hi, den)
            if point is None:
                return None
            center.append(point)
        return self._wrap(state, center, radius)

    def _corner_fallback(self, state, slab, box, radius, den):
        # push every coordinate to the end of the box farthest from the hyperplane
        normal = [exact(n) for n in slab.normal]
        for sign in (1, -1):
            center = []
            for n, (lo, hi) in zip(normal, box):
                end = hi if (n * sign) > 0 else lo
                center.append(Fraction(math.floor(end * den), den) if end == hi
                              else Fraction(math.ceil(end * den), den))
            if _slab_clear(center, radius, slab) and all(lo <= c <= hi for c, (lo, hi) in zip(center, box)):
                return self._wrap(state, center, radius)
        return None

    def respond(self, state: GameState, slab: Slab) -> Cube | None:
        cube = self.sample(state, slab)
        if cube is None:
            cube = self.sample(state, slab, self.gamma)
        if cube is None:
            if state.config.mode == "bigfloat":
                # dyadic rounding of the radius left no room inside the cube
                raise PrecisionExhausted("no representable legal cube at the current precision")
            raise PolicyError("no legal cube exists for this slab")
        return cube

    def __call__(self, state: GameState, slab: Slab) -> Cube | None:
        self.moves += 1
        return self.respond(state, slab)

    def to_json(self) -> dict:
        return {"kind": self.kind, "lambda": to_text(self.lam), "seed": self.seed}

    def diagnostics(self) -> dict:
        return {"policy": self.to_json(), "moves": self.moves}


class RandomBob(BobPolicy):
    """Uniform legal cube of radius ``λr`` on a side of the slab chosen by feasible measure."""

    kind = "random"


class GreedyBob(BobPolicy):
    """Among random legal candidates, the one whose orbit comes closest to the target."""

    kind = "greedy"

    def __init__(self, gamma, seq: MapSequence, targets: TargetSequence, horizon: int = 10,
                 lam=None, seed: int = 0, candidates: int = 16):
        super().__init__(gamma, lam, seed)
        self.seq = seq
        self.targets = targets
        self.horizon = horizon
        self.candidates = candidates

    def score(self, center: Sequence) -> float:
        """``min_{n <= h} |T_{1,n}(c)_1 - g_n(c)_1|`` in double precision."""
        x = float(exact(center[0]))
        point = tuple(float(exact(c)) for c in center)
        best = math.inf
        for n in range(1, self.horizon + 1):
            try:
                x = float(self.seq.at(n)(Fraction(x)))
            except BoundaryOrbit:
                return 0.0
            target = float(self.targets.evaluate(n, tuple(Fraction(v) for v in point))[0])
            best = min(best, abs(x - target))
        return best

    def respond(self, state, slab):
        first = super().respond(state, slab)
        if self.horizon <= 0:
            return first
        pool = [first]
        for _ in range(self.candidates - 1):
            cube = self.sample(state, slab)
            if cube is not None:
                pool.append(cube)
        return min(pool, key=lambda c: self.score(c.center))

    def to_json(self):
        out = super().to_json()
        out["horizon"] = self.horizon
        return out


class ChaseBob(BobPolicy):
    """Legal cube of radius ``λr`` whose center is as close as possible to a fixed point."""

    kind = "chase"

    def __init__(self, gamma, point: Sequence, lam=None, seed: int = 0):
        super().__init__(gamma, lam, seed)
        self.point = tuple(parse_rational(v) for v in point)

    def _closest(self, state, slab, factor):
        radius = self._radius(state, factor)
        options = _feasible_centers(state.cube, slab, radius)
        if not options or options[0][2] is None:
            return None
        den = _grid_denominator(radius, state.config.mode == "bigfloat")
        best = None
        for _, ranges, axis, side in options:
            center = []
            for j, ((lo, hi), p) in enumerate(zip(ranges, self.point)):
                a = math.ceil(lo * den) + (1 if j == axis and side == "right" else 0)
                b = math.floor(hi * den) - (1 if j == axis and side == "left" else 0)
                if a > b:
                    break
                center.append(Fraction(min(max(round(p * den), a), b), den))
            else:
                dist = max(abs(c - p) for c, p in zip(center, self.point))
                if best is None or dist < best[0]:
                    best = (dist, center, radius)
        if best is None:
            return None
        return self._wrap(state, best[1], best[2])

    def respond(self, state, slab):
        cube = self._closest(state, slab, self.lam)
        if cube is None:
            cube = super().respond(state, slab)
        return cube

    def to_json(self):
        out = super().to_json()
        out["point"] = [to_text(v) for v in self.point]
        return out


class ScriptedBob:
    """Plays a fixed list of cubes, then stops."""

    kind = "scripted"

    def __init__(self, cubes: Sequence[Cube]):
        self.cubes = list(cubes)

    def __call__(self, state: GameState, slab: Slab) -> Cube | None:
        return self.cubes[state.round] if state.round < len(self.cubes) else None

    def diagnostics(self) -> dict:
        return {"policy": {"kind": self.kind}, "moves": len(self.cubes)}


class ReplayBob(ScriptedBob):
    """Reproduces the Bob moves recorded in a trace."""

    kind = "replay"

    def __init__(self, trace: Trace):
        super().__init__([cube for _, cube in trace.rounds])


@dataclass
class ShrinkBob:
    """Deterministic: keeps the corner of the cube farthest from the slab and shrinks by ``λ``."""

    gamma: Fraction
    lam: Fraction

    kind = "shrink"

    def __call__(self, state: GameState, slab: Slab) -> Cube | None:
        lam = parse_rational(self.lam)
        cube = state.cube
        r = cube.radius * lam
        c = list(cube.center)
        axis = slab.axis if slab.axis is not None else 0
        z = slab.offset
        if z >= c[axis]:
            c[axis] = c[axis] - cube.radius + r
        else:
            c[axis] = c[axis] + cube.radius - r
        return Cube(tuple(c), r)

    def diagnostics(self) -> dict:
        return {"policy": {"kind": self.kind, "lambda": str(self.lam)}}


def policy_from_spec(spec: dict, gamma, seq: MapSequence | None = None,
                     targets: TargetSequence | None = None, trace: Trace | None = None):
    """Build a policy from ``{"kind": "random", "lambda": "0.3", "seed": 42}`` and friends."""
    kind = spec.get("kind", "random")
    lam = spec.get("lambda")
    seed = int(spec.get("seed", 0))
    if kind == "random":
        return RandomBob(gamma, lam, seed)
    if kind == "greedy":
        if seq is None or targets is None:
            raise PolicyError("greedy Bob needs the map and the target")
        return GreedyBob(gamma, seq, targets, int(spec.get("horizon", 10)), lam, seed,
                         int(spec.get("candidates", 16)))
    if kind == "chase":
        point = spec.get("point", ["0"])
        if not isinstance(point, (list, tuple)):
            point = [point]
        return ChaseBob(gamma, point, lam, seed)
    if kind == "shrink":
        return ShrinkBob(parse_rational(gamma), parse_rational(lam if lam is not None else gamma))
    if kind == "replay":
        if trace is None:
            raise PolicyError("replay Bob needs a trace")
        return ReplayBob(trace)
    raise PolicyError(f"unknown Bob policy {kind!r}")
