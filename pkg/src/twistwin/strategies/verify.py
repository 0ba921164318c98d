"""After-the-fact checks of finished games: stage claims, structural lemmas and the final orbit."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable

from ..dynamics import MapSequence, containing_node
from ..game import Trace
from ..geometry import Cube
from ..numeric import exact, parse_rational, to_text
from ..targets import TargetSequence
from .localize import bad_interval
from .strategy_b import class_words

DEFAULT_HORIZON = 200


def orbit_gaps(seq: MapSequence, targets: TargetSequence, point: tuple, times: Iterable[int]) -> dict[int, Fraction]:
    """Exact ``|T_{1,n}(x)_1 - g_n(x)_1|`` for each requested ``n``."""
    wanted = set(times)
    out: dict[int, Fraction] = {}
    if not wanted:
        return out
    point = tuple(exact(v) for v in point)
    y = point[0]
    for n in range(1, max(wanted) + 1):
        y = seq.at(n)(y)
        if n in wanted:
            out[n] = abs(y - targets.evaluate(n, point)[0])
    return out


def partial_quotients(x: Fraction, count: int) -> list[int]:
    """Leading continued-fraction digits ``a_1, a_2, ...`` of ``x`` in ``(0, 1)``."""
    digits = []
    while x and len(digits) < count:
        inv = 1 / x
        a = inv.numerator // inv.denominator
        digits.append(a)
        x = inv - a
    return digits


def _summary(gaps: dict[int, Fraction], delta: Fraction) -> dict:
    if not gaps:
        return {"checked": 0, "max_n": 0, "min_distance": None, "min_ratio": None,
                "worst_n": None, "failures": []}
    worst = min(gaps, key=gaps.__getitem__)
    return {
        "checked": len(gaps),
        "max_n": max(gaps),
        "min_distance": to_text(gaps[worst]),
        "min_ratio": float(gaps[worst] / delta),
        "worst_n": worst,
        "failures": sorted(n for n, g in gaps.items() if not g > delta)[:50],
    }


def _on_boundary(seq: MapSequence, x, depth: int) -> bool:
    node = None
    for n in range(1, depth + 1):
        node = containing_node(seq, 1, n, x, x, hint=node)
        if node is None or x in (node.lo, node.hi):
            return True
    return False


def _side(cube: Cube):
    side = cube.side(0)
    return exact(side.lo), exact(side.hi)


def _cube_at(trace: Trace, global_round: int) -> tuple[Cube, int]:
    cubes = trace.cubes
    index = min(global_round, len(cubes) - 1)
    return cubes[index], index


def verify_a(seq: MapSequence, targets: TargetSequence, trace: Trace) -> dict:
    info = trace.diagnostics.get("alice", {})
    consts = info["constants"]
    N, s = int(consts["N"]), int(consts["s"])
    delta = parse_rational(info["delta"])
    stages = info.get("stages", [])
    gaps = []
    for prev, cur in zip(stages, stages[1:]):
        gap = cur["m_k"] - prev["m_k"]
        gaps.append({"k": cur["k"], "gap": gap, "ok": 0 <= gap <= N})
    claims = []
    times: set[int] = set()
    for record in stages:
        if "cleared" not in record:
            continue
        m_k = record["m_k"]
        cube, index = _cube_at(trace, record["round"] + s)
        lo, hi = _side(cube)
        node, bad = None, []
        for n in range(m_k, m_k + N + 1):
            node = containing_node(seq, 1, n, lo, hi, hint=node)
            if node is None or bad_interval(seq, targets, n, cube, delta, node=node) is not None:
                bad.append(n)
                if node is None:
                    break
        claims.append({"k": record["k"], "round": index, "reached": index == record["round"] + s,
                       "n_range": [m_k, m_k + N], "ok": not bad and index == record["round"] + s,
                       "bad_n": bad[:20]})
        times.update(range(m_k, m_k + N + 1))
    orbit = _summary(orbit_gaps(seq, targets, trace.final_center, times), delta)
    return _finish(info, delta, claims, orbit, gap_lemma=gaps)


def verify_b(seq: MapSequence, targets: TargetSequence, trace: Trace) -> dict:
    info = trace.diagnostics.get("alice", {})
    consts = info["constants"]
    gamma = parse_rational(consts["gamma"])
    N, s = int(consts["N"]), int(consts["s"])
    delta = parse_rational(info["delta"])
    stages = info.get("stages", [])
    census = [{"k": r["k"], "words": r["words"], "max_nested_gap": r["max_nested_gap"],
               "ok": r["words"] <= 2 * N and r["max_nested_gap"] < N} for r in stages]
    claims = []
    bands = []
    for record in stages:
        if "cleared" not in record:
            continue
        k = record["k"]
        lower, upper = gamma ** ((k + 2) * s), gamma ** ((k + 1) * s)
        bands.append((lower, upper))
        cube, index = _cube_at(trace, record["round"] + s)
        lo, hi = _side(cube)
        bad = [node.depth for node in class_words(seq, lo, hi, lower, upper).nodes
               if bad_interval(seq, targets, node.depth, cube, delta, node=node) is not None]
        claims.append({"k": k, "round": index, "ok": not bad, "bad_n": bad[:20]})
    x = exact(trace.final_center[0])
    times = []
    if bands:
        floor = min(lo for lo, _ in bands)
        node, n = None, 0
        while True:
            n += 1
            node = containing_node(seq, 1, n, x, x, hint=node)
            if node is None or not node.length > floor:
                break
            if any(lo < node.length <= hi for lo, hi in bands):
                times.append(n)
    orbit = _summary(orbit_gaps(seq, targets, trace.final_center, times), delta)
    return _finish(info, delta, claims, orbit, word_census=census)


def verify_empirical(seq: MapSequence, targets: TargetSequence, trace: Trace,
                     horizon: int | None = None) -> dict:
    info = trace.diagnostics.get("alice", {})
    delta = parse_rational(info["delta"])
    horizon = horizon or int(info.get("horizon", DEFAULT_HORIZON))
    gaps = orbit_gaps(seq, targets, trace.final_center, range(1, horizon + 1))
    orbit = _summary(gaps, delta)
    orbit["failures"] = sorted(n for n, g in gaps.items() if g < delta)[:50]
    report = {"strategy": "empirical", "delta": to_text(delta), "orbit": orbit,
              "ok": not orbit["failures"]}
    if all(m.name == "gauss" for m in seq.maps):
        digits = partial_quotients(exact(trace.final_center[0]), horizon + 1)
        # T^n x >= δ forces a_{n+1} <= 1/δ for 1 <= n <= horizon
        bound = int(1 / delta)
        report["partial_quotients"] = {"count": len(digits), "max": max(digits, default=0),
                                       "bound": bound,
                                       "ok": all(a <= bound for a in digits[1:])}
        report["ok"] = report["ok"] and report["partial_quotients"]["ok"]
    return report


def _finish(info: dict, delta: Fraction, claims: list, orbit: dict, **extra) -> dict:
    report = {
        "strategy": info.get("strategy"),
        "delta": to_text(delta),
        "completed": bool(info.get("completed")),
        "violations": info.get("violations", []),
        "claims": claims,
        "orbit": orbit,
        **extra,
    }
    structural = all(item["ok"] for key in extra for item in extra[key])
    report["ok"] = (report["completed"] and structural and all(c["ok"] for c in claims)
                    and not orbit["failures"])
    return report


def verify_trace(seq: MapSequence, targets: TargetSequence, trace: Trace,
                 horizon: int | None = None) -> dict:
    """Dispatch on the strategy recorded in the trace's diagnostics."""
    info = trace.diagnostics.get("alice", {})
    name = info.get("strategy")
    if name in ("A", "B") and info.get("delta") is None:
        # the game ended before the strategy left its waiting phase
        return {"strategy": name, "delta": None, "completed": False, "violations": info.get("violations", []),
                "claims": [], "orbit": _summary({}, Fraction(1)), "ok": False,
                "boundary_point": None, "status": trace.status}
    if name == "A":
        report = verify_a(seq, targets, trace)
    elif name == "B":
        report = verify_b(seq, targets, trace)
    elif name == "empirical":
        report = verify_empirical(seq, targets, trace, horizon)
    else:
        horizon = horizon or DEFAULT_HORIZON
        gaps = orbit_gaps(seq, targets, trace.final_center, range(1, horizon + 1))
        worst = min(gaps, key=gaps.__getitem__)
        report = {"strategy": name, "orbit": {"checked": len(gaps), "max_n": horizon, "worst_n": worst,
                                              "min_distance": to_text(gaps[worst])},
                  "ok": True}
    depth = max(report["orbit"]["max_n"], 1)
    report["boundary_point"] = _on_boundary(seq, exact(trace.final_center[0]), depth)
    report["status"] = trace.status
    return report
