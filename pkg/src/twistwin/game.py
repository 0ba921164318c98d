"""Protocol engine for the γ-hyperplane absolute game on [0,1]^d."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Callable, Optional

from .geometry import Cube, Slab, center_in_unit_cube, cube_avoids_slab, cube_inside
from .numeric import (
    MODES,
    IndeterminateComparison,
    PrecisionExhausted,
    convert,
    decide,
    default_precision,
    parse_rational,
    to_text,
)


class InvalidConfig(ValueError):
    pass


class IllegalMove(ValueError):
    """A move broke one or more rules; ``predicates`` names each broken rule."""

    def __init__(self, player: str, predicates: list[str], move: Any = None):
        self.player = player
        self.predicates = list(predicates)
        self.move = move
        super().__init__(f"illegal {player} move: {', '.join(self.predicates)}")


@dataclass(frozen=True)
class GameConfig:
    gamma: Fraction
    dimension: int = 1
    mode: str = "rational"
    precision: int | None = None
    max_rounds: int = 100

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidConfig(f"unknown numeric mode {self.mode!r}")
        gamma = parse_rational(self.gamma)
        if not (0 < gamma < Fraction(1, 3)):
            raise InvalidConfig("gamma must lie in (0,1/3)")
        object.__setattr__(self, "gamma", gamma)
        if self.dimension < 1:
            raise InvalidConfig("dimension must be positive")
        if self.max_rounds < 0:
            raise InvalidConfig("max_rounds must be nonnegative")
        if self.mode == "bigfloat" and self.precision is None:
            object.__setattr__(self, "precision", default_precision())

    def scalar(self, value):
        return convert(value, self.mode, self.precision)

    @property
    def gamma_scalar(self):
        return self.scalar(self.gamma)

    def to_json(self) -> dict:
        out = {"gamma": to_text(self.gamma), "dimension": self.dimension, "mode": self.mode,
               "max_rounds": self.max_rounds}
        if self.precision is not None:
            out["precision"] = self.precision
        return out

    @classmethod
    def from_json(cls, data: dict) -> "GameConfig":
        return cls(parse_rational(data["gamma"]), int(data.get("dimension", 1)),
                   data.get("mode", "rational"), data.get("precision"),
                   int(data.get("max_rounds", 100)))


@dataclass(frozen=True)
class GameState:
    """Position after ``round`` completed exchanges; ``pending`` is Alice's unanswered slab."""

    config: GameConfig
    cube: Cube
    history: tuple = ()
    pending: Optional[Slab] = None
    status: str = "running"

    @property
    def round(self) -> int:
        return len(self.history)

    @property
    def radius(self):
        return self.cube.radius


def check_initial(config: GameConfig, cube: Cube) -> list[str]:
    problems = []
    if cube.dimension != config.dimension:
        problems.append("dimension_mismatch")
        return problems
    inside = center_in_unit_cube(cube)
    if inside is None:
        problems.append("indeterminate")
    elif not inside:
        problems.append("center_outside_unit_cube")
    return problems


def new_game(config: GameConfig, initial: Cube) -> GameState:
    problems = check_initial(config, initial)
    if problems:
        raise IllegalMove("bob", problems, initial)
    return GameState(config, initial)


def alice_problems(state: GameState, slab: Slab) -> list[str]:
    problems = []
    if state.status != "running":
        problems.append("game_not_running")
    if state.pending is not None:
        problems.append("out_of_turn")
    if len(slab.normal) != state.config.dimension:
        problems.append("dimension_mismatch")
        return problems
    limit = state.config.gamma * state.cube.diameter / 2
    ok = decide(lambda: slab.halfwidth <= limit)
    if ok is None:
        problems.append("indeterminate")
    elif not ok:
        problems.append("halfwidth_too_large")
    return problems


def alice_move(state: GameState, slab: Slab) -> GameState:
    """Record Alice's slab; its halfwidth may not exceed ``γ|B_i|/2``."""
    problems = alice_problems(state, slab)
    if problems:
        raise IllegalMove("alice", problems, slab)
    return replace(state, pending=slab)


def bob_problems(state: GameState, cube: Cube) -> list[str]:
    problems = []
    if state.status != "running":
        problems.append("game_not_running")
    if state.pending is None:
        problems.append("out_of_turn")
        return problems
    if cube.dimension != state.config.dimension:
        problems.append("dimension_mismatch")
        return problems
    checks = (
        ("not_nested", cube_inside(cube, state.cube)),
        ("meets_slab", cube_avoids_slab(cube, state.pending)),
        ("radius_too_small", decide(lambda: cube.radius >= state.config.gamma * state.cube.radius)),
        ("center_outside_unit_cube", center_in_unit_cube(cube)),
    )
    indeterminate = False
    for name, verdict in checks:
        if verdict is None:
            indeterminate = True
        elif not verdict:
            problems.append(name)
    if indeterminate:
        problems.append("indeterminate")
    return problems


def bob_move(state: GameState, cube: Cube) -> GameState:
    """Record Bob's cube: nested, disjoint from Alice's slab, radius at least ``γ`` times the old one."""
    problems = bob_problems(state, cube)
    if problems:
        raise IllegalMove("bob", problems, cube)
    return replace(state, cube=cube, history=state.history + ((state.pending, cube),), pending=None)


AliceCallback = Callable[[GameState], Optional[Slab]]
BobCallback = Callable[[GameState, Slab], Optional[Cube]]


@dataclass
class Trace:
    config: GameConfig
    initial: Cube
    rounds: list = field(default_factory=list)  # list of (Slab, Cube)
    status: str = "finished"
    error: dict | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def cubes(self) -> list[Cube]:
        return [self.initial] + [cube for _, cube in self.rounds]

    @property
    def radii(self) -> list:
        return [c.radius for c in self.cubes]

    @property
    def final_cube(self) -> Cube:
        return self.cubes[-1]

    @property
    def final_center(self) -> tuple:
        return self.final_cube.center

    def to_json(self) -> dict:
        out = {
            **self.config.to_json(),
            "initial": self.initial.to_json(),
            "rounds": [{"alice": s.to_json(), "bob": c.to_json()} for s, c in self.rounds],
            "radii": [to_text(r) for r in self.radii],
            "final_cube": self.final_cube.to_json(),
            "final_center": [to_text(v) for v in self.final_center],
            "status": self.status,
            "diagnostics": self.diagnostics,
        }
        if self.error is not None:
            out["error"] = self.error
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, data: dict) -> "Trace":
        config = GameConfig.from_json(data)
        mode, prec = config.mode, config.precision
        rounds = [(Slab.from_json(r["alice"], mode, prec), Cube.from_json(r["bob"], mode, prec))
                  for r in data.get("rounds", [])]
        return cls(config, Cube.from_json(data["initial"], mode, prec), rounds,
                   data.get("status", "finished"), data.get("error"), data.get("diagnostics", {}))

    @classmethod
    def loads(cls, text: str) -> "Trace":
        return cls.from_json(json.loads(text))


def _diagnostics(player) -> dict:
    getter = getattr(player, "diagnostics", None)
    if callable(getter):
        return getter()
    return {}


def run(config: GameConfig, alice: AliceCallback, bob: BobCallback, initial: Cube) -> Trace:
    """Alternate the two callbacks until ``max_rounds`` or until one returns ``None``.

    Illegal moves and precision exhaustion end the game early; the offending
    move and reason are stored in ``Trace.error``.
    """
    state = new_game(config, initial)
    trace = Trace(config, initial)
    while state.round < config.max_rounds:
        player, move = "alice", None
        try:
            move = alice(state)
            if move is None:
                trace.status = "alice_exhausted"
                break
            state = alice_move(state, move)
            player = "bob"
            move = bob(state, move)
            if move is None:
                trace.status = "bob_exhausted"
                break
            state = bob_move(state, move)
        except IllegalMove as exc:
            trace.status = "illegal_move"
            trace.error = {"player": exc.player, "predicates": exc.predicates,
                           "move": exc.move.to_json() if hasattr(exc.move, "to_json") else None}
            break
        except (IndeterminateComparison, PrecisionExhausted) as exc:
            trace.status = "precision_exhausted"
            trace.error = {"player": player, "message": str(exc)}
            break
        trace.rounds.append(state.history[-1])
    trace.diagnostics = {"alice": _diagnostics(alice), "bob": _diagnostics(bob)}
    return trace


def replay(trace: Trace) -> Trace:
    """Re-check every recorded move and rebuild the trace from scratch."""
    moves = list(trace.rounds)
    def alice(state):
        return moves[state.round][0] if state.round < len(moves) else None

    def bob(state, slab):
        return moves[state.round][1]

    config = replace(trace.config, max_rounds=max(trace.config.max_rounds, len(moves)))
    out = run(config, alice, bob, trace.initial)
    out.config = trace.config
    if out.status == "alice_exhausted" and len(out.rounds) == len(moves):
        out.status = trace.status
        out.error = trace.error
    out.diagnostics = trace.diagnostics
    return out
