import random
from fractions import Fraction as F

import pytest

from oracles import beta_step, gauss_composite_derivative, gauss_cylinder, gauss_step, times_cylinder
from twistwin.dynamics import (BoundaryOrbit, InvalidMapSpec, compose_apply, compose_derivative, cylinder,
                               cylinder_table, diameter_derivative_check, distortion_bound, map_from_spec,
                               min_expansion, orbit)

DOUBLING = {"kind": "times", "m": 2}
QCANTOR = {"kind": "qcantor", "q": [2, 3]}


@pytest.fixture(scope="module")
def doubling():
    return map_from_spec(DOUBLING)


@pytest.fixture(scope="module")
def qcantor():
    return map_from_spec(QCANTOR)


@pytest.fixture(scope="module")
def gauss():
    return map_from_spec({"kind": "gauss"})


def test_doubling_cylinder(doubling):
    cyl = cylinder(doubling, 1, (0, 1))
    assert (cyl.interval.lo, cyl.interval.hi) == (F(1, 4), F(1, 2))
    assert (cyl.interval.lo, cyl.interval.hi) == times_cylinder([2, 2], (0, 1))


def test_qcantor_cylinders_match_inverse_branch_oracle(qcantor):
    # frozen from inverse-branch composition with digits numbered from 0
    assert (cylinder(qcantor, 1, (1, 2)).interval.lo, cylinder(qcantor, 1, (1, 2)).interval.hi) == (F(5, 6), F(1))
    assert (cylinder(qcantor, 1, (1, 1)).interval.lo, cylinder(qcantor, 1, (1, 1)).interval.hi) == (F(2, 3), F(5, 6))
    for word in [(0, 0), (0, 2), (1, 0), (1, 2, 0), (0, 1, 1, 2)]:
        cyl = cylinder(qcantor, 1, word)
        qs = [2, 3] * 3
        assert (cyl.interval.lo, cyl.interval.hi) == times_cylinder(qs, word)


def test_qcantor_cylinder_from_later_start(qcantor):
    cyl = cylinder(qcantor, 2, (2, 1))
    assert (cyl.interval.lo, cyl.interval.hi) == times_cylinder([3, 2], (2, 1))


def test_empty_word_is_unit_interval(gauss, doubling):
    for seq in (gauss, doubling):
        cyl = cylinder(seq, 1, ())
        assert (cyl.interval.lo, cyl.interval.hi) == (0, 1)


def test_cylinders_nest(qcantor, gauss):
    for seq, word in ((qcantor, (1, 2, 0, 1)), (gauss, (3, 1, 4, 1))):
        for k in range(len(word)):
            outer, inner = cylinder(seq, 1, word[:k]), cylinder(seq, 1, word[:k + 1])
            assert outer.interval.lo <= inner.interval.lo <= inner.interval.hi <= outer.interval.hi


def test_gauss_cylinders_match_continued_fractions(gauss):
    for word in [(1,), (2, 3), (1, 1, 1), (5, 2, 7, 1)]:
        cyl = cylinder(gauss, 1, word)
        assert (cyl.interval.lo, cyl.interval.hi) == gauss_cylinder(word)


def test_constant_slopes_multiply(qcantor):
    for x in (F(1, 7), F(3, 5), F(9, 10)):
        assert compose_derivative(qcantor, 1, 2, x) == 6


def test_beta_two_iteration():
    seq = map_from_spec({"kind": "beta", "beta": "2"})
    assert compose_apply(seq, 1, 2, F(3, 10)) == F(1, 5)
    assert orbit(seq, 1, 2, F(3, 10))[-1] == F(1, 5)


def test_beta_orbits_match_direct_iteration():
    beta = F(1618, 1000)
    seq = map_from_spec({"kind": "beta", "beta": "1.618"})
    rng = random.Random(0)
    for _ in range(20):
        x = F(rng.randint(1, 10**6), 10**6 + 1)
        y = x
        for _ in range(12):
            y = beta_step(beta, y)
        assert compose_apply(seq, 1, 12, x) == y


def test_gauss_golden_mean_is_fixed(gauss):
    # (√5-1)/2 is irrational; its convergent F_k/F_{k+1} moves to the previous convergent
    fibs = [1, 1]
    while len(fibs) < 30:
        fibs.append(fibs[-1] + fibs[-2])
    x = F(fibs[-2], fibs[-1])
    image = compose_apply(gauss, 1, 1, x)
    assert image == F(fibs[-3], fibs[-2]) == gauss_step(x)
    assert abs(float(image) - (5**0.5 - 1) / 2) < 1e-10


def test_boundary_points_are_rejected(doubling):
    with pytest.raises(BoundaryOrbit):
        compose_apply(doubling, 1, 3, F(1, 2))


def test_affine_distortion_is_exactly_one(qcantor):
    assert distortion_bound(map_from_spec({"kind": "beta", "beta": "1.618"})) == 1
    assert distortion_bound(qcantor) == 1
    assert distortion_bound(map_from_spec(DOUBLING)) == 1


def test_gauss_distortion_certificate_holds_on_samples(gauss):
    bound = distortion_bound(gauss)
    assert bound > 1
    rng = random.Random(5)
    worst = F(1)
    for _ in range(300):
        depth = rng.randint(1, 12)
        word = tuple(rng.choice([1, 1, 1, 2, 2, 3, 5, 9]) for _ in range(depth))
        lo, hi = gauss_cylinder(word)
        xs = [lo + (hi - lo) * F(rng.randint(1, 999), 1000) for _ in range(3)]
        ds = [gauss_composite_derivative(x, depth) for x in xs]
        worst = max(worst, max(ds) / min(ds))
    assert worst <= bound


def test_diameter_derivative_ratio(qcantor, doubling, gauss):
    cyl = cylinder(qcantor, 1, (1, 2))
    assert cyl.length == F(1, 6)
    assert diameter_derivative_check(qcantor, cyl, F(11, 12)) == 1
    for word in [(0,), (1, 0, 1), (0, 0, 1, 1, 0)]:
        cyl = cylinder(doubling, 1, word)
        assert diameter_derivative_check(doubling, cyl, cyl.interval.midpoint) == 1
    bound = distortion_bound(gauss)
    cyl = cylinder(gauss, 1, (1, 1))
    ratio = diameter_derivative_check(gauss, cyl, F(3, 5))
    assert 1 / bound <= ratio <= bound
    # |I_11| = 1/6 and |(T^2)'(3/5)| = (5/3)^2 (3/2)^2 = 25/4
    assert ratio == F(1, 6) * F(25, 4)


def test_gauss_multiplicativity(gauss):
    c = distortion_bound(gauss)
    for u, v in [((1,), (1,)), ((2, 1), (3,)), ((1, 1, 1), (4, 2))]:
        whole = cylinder(gauss, 1, u + v).length
        ratio = whole / (cylinder(gauss, 1, u).length * cylinder(gauss, 1, v).length)
        assert c**-3 <= ratio <= c**3


def test_min_expansion_examples(qcantor, doubling):
    assert min_expansion(doubling, 5) == 32
    assert min_expansion(map_from_spec({"kind": "beta", "beta": "1.618"}), 3) == F("1.618") ** 3
    assert min_expansion(qcantor, 2) == 6


def test_cylinder_table_doubling(doubling):
    rows = cylinder_table(doubling, 3)
    assert len(rows) == 8
    assert {row.length for row in rows} == {F(1, 8)}


def test_beta_cylinders_cover_unit_interval():
    seq = map_from_spec({"kind": "beta", "beta": "1.618"})
    rows = sorted(cylinder_table(seq, 6), key=lambda n: n.lo)
    assert rows[0].lo == 0 and rows[-1].hi == 1
    assert all(a.hi == b.lo for a, b in zip(rows, rows[1:]))


def test_bad_map_specs():
    with pytest.raises(InvalidMapSpec):
        map_from_spec({"kind": "doubling"})
    with pytest.raises(InvalidMapSpec):
        map_from_spec({"kind": "beta"})
