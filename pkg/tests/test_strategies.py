import math
import random
from fractions import Fraction as F

import pytest

from oracles import far_points, grid_bob_cubes
from twistwin.adversaries import ChaseBob, RandomBob, ShrinkBob
from twistwin.dynamics import UnsupportedAssumption, cylinder_table, map_from_spec, min_cylinder_length
from twistwin.game import GameConfig, alice_move, bob_move, new_game, run
from twistwin.geometry import Cube, Interval, unit_cube
from twistwin.numeric import floor_log
from twistwin.strategies import (BallNotInCylinder, PreconditionViolation, StrategyA, StrategyB,
                                 avoid_intervals, avoid_point, bad_interval, blockade, constants_A,
                                 constants_B, epsilon, length_bound, partial_quotients, rounds_needed,
                                 verify_trace)
from twistwin.targets import ConstantTarget, IdentityTarget

DOUBLING = map_from_spec({"kind": "times", "m": 2})
ZERO = ConstantTarget([0])


def side(lo, hi):
    return Cube.from_bounds([F(lo)], [F(hi)])


# -- survivor fraction -----------------------------------------------------------------


def test_epsilon_values():
    assert epsilon(F(1, 4)) == F(21, 22)
    assert epsilon(F("0.3")) == F(55, 58)
    values = [epsilon(F(1, k)) for k in (4, 10, 100, 10**6)]
    assert values == sorted(values) and 1 - values[-1] < F(1, 10**6)
    for g in (F(1, 100), F(1, 5), F(33, 100)):
        assert 1 - epsilon(g) < F(1, 2)
    with pytest.raises(ValueError):
        epsilon(F(1, 3))


def test_rounds_needed():
    assert rounds_needed(F("0.2"), 3) == floor_log(F(26, 25), F(3)) + 1 == 29
    assert rounds_needed(F("0.2"), 1) == 1
    assert rounds_needed(F("0.2"), 0) == 0


# -- blockade --------------------------------------------------------------------------


def worst_far_count(cube, slab, points, gamma):
    lo, hi = cube.side(0).lo, cube.side(0).hi
    s_lo, s_hi = slab.offset - slab.halfwidth, slab.offset + slab.halfwidth
    counts = [far_points(a, b, points, gamma * (hi - lo) / 4)
              for a, b in grid_bob_cubes(lo, hi, gamma, s_lo, s_hi)]
    assert counts, "the grid adversary found no legal move"
    return min(counts)


def test_blockade_on_repeated_point():
    cube, gamma = unit_cube(1), F("0.2")
    points = [F(1, 2)] * 5
    plan = blockade(cube, 0, points, gamma)
    assert plan.case == "case2_blockade"
    assert plan.slab.offset - plan.slab.halfwidth <= F(1, 2) <= plan.slab.offset + plan.slab.halfwidth
    assert worst_far_count(cube, plan.slab, points, gamma) == 5


def test_blockade_case_one_passes():
    cube, gamma = side("0.4", "0.6"), F("0.2")
    points = [F("0.1"), F("0.9"), F("0.95")]
    plan = blockade(cube, 0, points, gamma)
    assert plan.case == "case1_pass" and plan.slab.is_pass
    assert worst_far_count(cube, plan.slab, points, gamma) >= math.ceil(len(points) / 2)


@pytest.mark.parametrize("gamma", ["0.05", "0.2", "0.3"])
def test_single_point_is_pushed_far(gamma):
    gamma = F(gamma)
    cube = side("0.2", "0.7")
    for y in (F("0.2"), F("0.33"), F("0.45"), F("0.7")):
        plan = avoid_point(cube, 0, y, gamma)
        assert plan.case == "case2_blockade"
        assert worst_far_count(cube, plan.slab, [y], gamma) == 1


def test_blockade_guarantee_random_instances():
    rng = random.Random(11)
    for _ in range(20):
        gamma = F(rng.choice(["0.1", "0.2", "0.3"]))
        cube = side("0.25", "0.75")
        points = [F(rng.randint(10, 90), 100) for _ in range(rng.randint(1, 12))]
        plan = blockade(cube, 0, points, gamma)
        need = math.ceil((1 - epsilon(gamma)) * len(points))
        assert worst_far_count(cube, plan.slab, points, gamma) >= need


def test_blockade_without_points_passes():
    assert blockade(unit_cube(1), 0, [], F("0.2")).slab.is_pass


# -- interval avoidance ----------------------------------------------------------------


def play_avoidance(plan, cube, bob, gamma):
    state = new_game(GameConfig(gamma), cube)
    while not plan.done:
        slab = plan.step(state.cube)
        state = alice_move(state, slab)
        state = bob_move(state, bob(state, slab))
    return state.cube


def test_three_intervals_cleared_in_29_rounds():
    gamma = F("0.2")
    cube = unit_cube(1)
    width = gamma**29 * cube.radius
    for seed in range(6):
        rng = random.Random(seed)
        starts = [F(rng.randint(5, 95), 100) for _ in range(3)]
        intervals = [Interval(a, a + width) for a in starts]
        plan = avoid_intervals(cube, 0, intervals, gamma)
        assert plan.rounds == 29
        # a chasing Bob keeps steering toward the first interval
        for bob in (RandomBob(gamma, seed=seed), ChaseBob(gamma, [starts[0]], seed=seed)):
            plan = avoid_intervals(cube, 0, intervals, gamma)
            final = play_avoidance(plan, cube, bob, gamma)
            assert plan.cleared(final)


def test_single_interval_in_one_round():
    gamma = F("0.25")
    cube = side("0.1", "0.6")
    j = Interval(F("0.3"), F("0.3") + gamma * cube.radius)
    plan = avoid_intervals(cube, 0, [j], gamma)
    assert plan.rounds == 1
    slab = plan.step(cube)
    lo, hi = slab.offset - slab.halfwidth, slab.offset + slab.halfwidth
    for a, b in grid_bob_cubes(F("0.1"), F("0.6"), gamma, lo, hi):
        assert b < j.lo or a > j.hi


def test_too_long_interval_is_rejected():
    with pytest.raises(PreconditionViolation):
        avoid_intervals(unit_cube(1), 0, [Interval(F("0.2"), F("0.4"))], F("0.2"))


# -- bad intervals ---------------------------------------------------------------------


def test_bad_interval_examples():
    assert bad_interval(DOUBLING, ZERO, 1, side("0.3", "0.4"), F("0.1")) is None
    j = bad_interval(DOUBLING, ZERO, 1, side("0", "0.1"), F("0.1"))
    assert (j.lo, j.hi) == (0, F(1, 20))
    assert j.length <= length_bound(DOUBLING, ZERO, 1, side("0", "0.1"), F("0.1")) == F(1, 10)
    assert bad_interval(DOUBLING, IdentityTarget(), 1, side("0.3", "0.4"), F("0.05"), exact=True) is None


def test_bad_interval_needs_a_cylinder():
    with pytest.raises(BallNotInCylinder):
        bad_interval(DOUBLING, ZERO, 1, side("0.4", "0.6"), F("0.1"))


# -- constants -------------------------------------------------------------------------


def test_constants_b_doubling_snapshot():
    c = constants_B(DOUBLING, F("0.2"), IdentityTarget())
    assert (c.C1, c.C2, c.C3) == (1, 1, 1)
    assert c.s2 == 1
    assert (c.N, c.s1, c.s) == (400, 171, 172)

    def s1(n):
        return floor_log(F(26, 25), F(2 * n)) + 1

    # minimal N with 2^N > 5^(s1(N)+1)
    assert 2**c.N > 5 ** (s1(c.N) + 1)
    assert all(2**n <= 5 ** (s1(n) + 1) for n in range(1, c.N))


def test_constants_a_doubling_snapshot():
    c = constants_A(DOUBLING, F("0.2"), IdentityTarget())
    assert (c.M, c.C2, c.N, c.s1, c.s2, c.s) == (2, 1, 361, 151, 2, 155)
    assert c.ell == F(1, 2**361)


def test_affine_maps_have_unit_distortion_constants():
    for spec in ({"kind": "times", "m": 3}, {"kind": "qcantor", "q": [2, 3]}):
        c = constants_B(map_from_spec(spec), F("0.25"), ZERO)
        assert c.C2 == 1 and c.C3 == 1
    assert constants_A(map_from_spec({"kind": "beta", "beta": "1.618"}), F("0.25"), ZERO, n_cap=1024).C2 == 1
    # a non-integer beta map lacks full branches
    with pytest.raises(UnsupportedAssumption):
        constants_B(map_from_spec({"kind": "beta", "beta": "1.618"}), F("0.25"), ZERO)


def test_golden_beta_ledger():
    seq = map_from_spec({"kind": "beta", "beta": "1.618"})
    c = constants_A(seq, F("0.25"), ZERO, n_cap=1024)
    assert c.M == F("1.618")
    assert c.ell == min_cylinder_length(seq, c.N)
    # the shortest-cylinder routine agrees with brute-force enumeration at small depths
    for depth in range(1, 13):
        assert min_cylinder_length(seq, depth) == min(n.length for n in cylinder_table(seq, depth))


# -- strategies ------------------------------------------------------------------------


def test_wait_phase_only_passes():
    gamma = F("0.3")
    alice = StrategyA(DOUBLING, ZERO, gamma)
    trace = run(GameConfig(gamma, max_rounds=20), alice, ShrinkBob(gamma, gamma), unit_cube(1))
    assert len(trace.rounds) == 20
    assert all(slab.is_pass for slab, _ in trace.rounds)
    assert trace.diagnostics["alice"]["offset"] is None


def test_strategy_a_gap_lemma_on_doubling():
    gamma = F("0.25")
    alice = StrategyA(DOUBLING, ZERO, gamma)
    trace = run(GameConfig(gamma, max_rounds=3000), alice, RandomBob(gamma, seed=1), unit_cube(1))
    report = verify_trace(DOUBLING, ZERO, trace)
    assert report["completed"] and report["ok"]
    assert report["gap_lemma"] and all(0 <= g["gap"] <= alice.constants.N for g in report["gap_lemma"])
    assert all(claim["ok"] for claim in report["claims"])


def test_strategy_b_qcantor_constant_target():
    seq = map_from_spec({"kind": "qcantor", "q": [2, 3]})
    gamma = F("0.25")
    trace = run(GameConfig(gamma, max_rounds=3000), StrategyB(seq, ZERO, gamma),
                RandomBob(gamma, seed=1), unit_cube(1))
    report = verify_trace(seq, ZERO, trace)
    assert report["ok"] and report["orbit"]["checked"] > 100 and not report["orbit"]["failures"]


def test_strategy_b_gauss_partial_quotients():
    seq = map_from_spec({"kind": "gauss"})
    gamma = F("0.25")
    alice = StrategyB(seq, ZERO, gamma)
    trace = run(GameConfig(gamma, max_rounds=3000), alice, RandomBob(gamma, seed=2), unit_cube(1))
    report = verify_trace(seq, ZERO, trace)
    assert report["ok"]
    checked = report["orbit"]["max_n"]
    digits = partial_quotients(trace.final_center[0], checked + 1)
    assert len(digits) == checked + 1
    assert max(digits[1:]) <= 1 / alice.delta


def test_strategy_b_word_census():
    gamma = F("0.25")
    alice = StrategyB(DOUBLING, IdentityTarget(), gamma, stages=3)
    trace = run(GameConfig(gamma, max_rounds=3000), alice, RandomBob(gamma, seed=3), unit_cube(1))
    report = verify_trace(DOUBLING, IdentityTarget(), trace)
    assert report["ok"]
    n = alice.constants.N
    assert len(report["word_census"]) == 3
    for row in report["word_census"]:
        assert row["words"] <= 2 * n and row["max_nested_gap"] < n
