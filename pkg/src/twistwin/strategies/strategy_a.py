"""Alice's strategy for finitely many maps with finitely many branches."""

from __future__ import annotations

from fractions import Fraction

from ..dynamics import MapSequence
from ..game import GameState
from ..numeric import to_text
from ..targets import TargetSequence
from .base import InductiveStrategy, StrategyAbort, interior_endpoints, nodes_meeting
from .constants import DEFAULT_N_CAP, StrategyAConstants, constants_A
from .localize import bad_interval


class StrategyA(InductiveStrategy):
    """Stage ``k`` pins the cube inside a depth-``(m_k + N)`` cylinder and then clears
    the ``N + 1`` bad intervals for ``m_k <= n <= m_k + N``.

    Local round 1 is the first cube below the wait threshold.  Round 1 steers
    off the depth-``N`` cylinder endpoints, round ``n_k`` steers off the
    depth-``(m_k + N)`` endpoints and round ``n_k + 1`` starts the avoidance.
    """

    name = "A"

    def __init__(self, seq: MapSequence, targets: TargetSequence, gamma, stages: int = 2,
                 constants: StrategyAConstants | None = None, n_cap: int = DEFAULT_N_CAP):
        constants = constants or constants_A(seq, gamma, targets, n_cap)
        super().__init__(seq, targets, constants, stages)
        self.stage_start: dict[int, int] = {}  # k -> n_k
        self.m: dict[int, int] = {}
        self.current = -1

    def wait_threshold(self) -> Fraction:
        return self.constants.wait_threshold

    # -- m_k -------------------------------------------------------------------
    def first_expanding_depth(self, k: int, lo, hi) -> int:
        """``m_k``: least ``n`` with ``sup |T_{1,n}'| > γ^{-(k+1)s}/M`` on the cube's side."""
        threshold = self.constants.m_threshold(k)
        n = self.m.get(k - 1, 1)
        while True:
            if self.path.extend(n, lo, hi):
                sup = self.path[n].derivative_range(lo, hi)[1]
            else:
                self.violations.append(f"stage {k}: cube not inside a depth-{n} cylinder")
                pieces = nodes_meeting(self.seq, self.path[self.path.depth], n, lo, hi)
                sup = max(p.derivative_range(max(lo, p.lo), min(hi, p.hi))[1] for p in pieces)
            if sup > threshold:
                return n
            n += 1

    def steer(self, cube, depth: int, k: int):
        """Slab keeping the next cube off every depth-``depth`` cylinder endpoint."""
        lo, hi = self.side(cube)
        anchor = self.path[min(self.path.depth, depth)]
        points = interior_endpoints(nodes_meeting(self.seq, anchor, depth, lo, hi), lo, hi)
        if len(points) > 1:
            raise StrategyAbort(f"stage {k}: {len(points)} depth-{depth} endpoints in the cube")
        if not points:
            return self.pass_slab(cube)
        return self.point_slab(cube, points[0])

    # -- protocol ----------------------------------------------------------------
    def play(self, state: GameState, i: int):
        cube = state.cube
        c = self.constants
        if i == 1:
            return self.steer(cube, c.N, 0)
        if i == 2:
            self.delta = self.gamma * self.rho[2]
            return self.begin_stage(0, i, cube, state.round)
        k = self.current
        n_k = self.stage_start[k]
        if i == n_k + 1:
            return self.clear_stage(k, cube)
        if i == n_k + c.s:
            record = self.stage_log[k]
            record["cleared"] = self.avoidance is not None and self.avoidance.cleared(cube)
            if not record["cleared"]:
                self.violations.append(f"stage {k}: cube still meets a bad interval at n_k + s")
            if k + 1 == self.stages:
                self.finished = True
                return None
        if i > n_k + 1 and self.rho[i] < self.gamma ** ((k + 1) * c.s) * self.rho[2]:
            if i < n_k + c.s:
                raise StrategyAbort(f"stage {k + 1} would start before stage {k} finished")
            return self.begin_stage(k + 1, i, cube, state.round)
        if self.avoidance is not None and not self.avoidance.done:
            return self.continue_avoidance(cube)
        return self.pass_slab(cube)

    def begin_stage(self, k: int, i: int, cube, global_round: int):
        lo, hi = self.side(cube)
        self.current = k
        self.stage_start[k] = i
        m_k = self.first_expanding_depth(k, lo, hi)
        self.m[k] = m_k
        inside = self.path.extend(m_k, lo, hi)
        record = {"k": k, "n_k": i, "round": global_round, "m_k": m_k,
                  "rho": to_text(self.rho[i]), "inside_m_k": inside}
        if k > 0:
            record["gap"] = m_k - self.m[k - 1]
        self.stage_log.append(record)
        if not inside:
            raise StrategyAbort(f"stage {k}: cube not inside a depth-m_k cylinder")
        return self.steer(cube, m_k + self.constants.N, k)

    def clear_stage(self, k: int, cube):
        c = self.constants
        lo, hi = self.side(cube)
        top = self.m[k] + c.N
        record = self.stage_log[k]
        record["inside_m_k_plus_N"] = self.path.extend(top, lo, hi)
        if not record["inside_m_k_plus_N"]:
            raise StrategyAbort(f"stage {k}: cube not inside a depth-(m_k+N) cylinder")
        intervals = []
        limit = self.gamma**c.s1 * cube.radius
        worst = Fraction(0)
        for n in range(self.m[k], top + 1):
            j = bad_interval(self.seq, self.targets, n, cube, self.delta, node=self.path[n])
            if j is not None:
                intervals.append(j)
                worst = max(worst, j.length / limit)
        record["length_ratio"] = float(worst)
        return self.start_avoidance(cube, intervals, record)


def strategy_A(seq: MapSequence, targets: TargetSequence, gamma, stages: int = 2, **kwargs) -> StrategyA:
    return StrategyA(seq, targets, gamma, stages, **kwargs)
