from fractions import Fraction as F

import pytest

from oracles import corner_distance
from twistwin.geometry import (Cube, Interval, InvalidCube, InvalidSlab, Slab, cube_avoids_slab,
                               cube_inside, hyperplane_distance, slab_distance, unit_cube)
from twistwin.numeric import Ball


def box(*sides):
    return Cube.from_bounds([F(a) for a, _ in sides], [F(b) for _, b in sides])


def test_distance_one_dimensional():
    cube = box(("0.3", "0.5"))
    assert slab_distance(cube, Slab.axis_aligned(1, 0, F("0.2"), 0)) == F(1, 10)


def test_distance_axis_aligned_in_plane():
    cube = Cube((F(1, 2), F(1, 2)), F(1, 10))
    assert slab_distance(cube, Slab((1, 0), F("0.9"), 0)) == F(3, 10)


def test_distance_diagonal_matches_corner_oracle():
    cube = box((1, 2), (1, 2))
    slab = Slab((1, 1), 0, 0)
    assert slab_distance(cube, slab) == 1
    assert corner_distance((1, 1), (2, 2), (1, 1), 0) == 1


def test_avoidance_examples():
    cube = box(("0.3", "0.5"))
    assert cube_avoids_slab(cube, Slab.axis_aligned(1, 0, F("0.1"), F("0.05"))) is True
    assert cube_avoids_slab(cube, Slab.axis_aligned(1, 0, F("0.32"), F("0.05"))) is False
    assert cube_avoids_slab(box((1, 2), (1, 2)), Slab((1, 1), 0, F("0.4"))) is True


def test_avoidance_touching_is_not_avoiding():
    cube = box(("0.3", "0.5"))
    assert cube_avoids_slab(cube, Slab.axis_aligned(1, 0, F("0.2"), F("0.1"))) is False


def test_containment_examples():
    outer = box(("0.1", "0.5"))
    assert cube_inside(box(("0.2", "0.4")), outer) is True
    assert cube_inside(box(("0.2", "0.6")), outer) is False
    assert cube_inside(outer, outer) is True


def test_random_boxes_agree_with_corner_oracle():
    import random
    rng = random.Random(3)
    for _ in range(300):
        d = rng.choice([1, 2, 3])
        center = tuple(F(rng.randint(0, 100), 100) for _ in range(d))
        r = F(rng.randint(1, 30), 100)
        normal = tuple(rng.randint(-3, 3) for _ in range(d))
        if not any(normal):
            continue
        offset = F(rng.randint(-100, 200), 100)
        halfwidth = F(rng.randint(0, 20), 100)
        cube, slab = Cube(center, r), Slab(normal, offset, halfwidth)
        expected = corner_distance([c - r for c in center], [c + r for c in center], normal, offset)
        assert slab_distance(cube, slab) == expected
        assert cube_avoids_slab(cube, slab) == (expected > halfwidth)
        assert slab_distance(cube, slab) >= 0


def test_distance_zero_iff_cube_meets_hyperplane():
    cube = box(("0.2", "0.6"))
    assert slab_distance(cube, Slab.axis_aligned(1, 0, F("0.6"), 0)) == 0
    assert slab_distance(cube, Slab.axis_aligned(1, 0, F("0.61"), 0)) > 0


def test_pass_slab_lies_outside():
    cube = unit_cube(2)
    slab = Slab.passing(cube)
    assert slab.is_pass and slab.halfwidth == 0
    assert cube_avoids_slab(cube, slab)


def test_hyperplane_distance():
    assert hyperplane_distance(box(("0.3", "0.5")), 0, F("0.9")) == F(2, 5)
    assert hyperplane_distance(box(("0.3", "0.5")), 0, F("0.4")) == 0


def test_invalid_objects():
    with pytest.raises(InvalidSlab):
        Slab((0, 0), 0, 0)
    with pytest.raises(InvalidSlab):
        Slab((1,), 0, -1)
    with pytest.raises(InvalidCube):
        Cube((F(1, 2),), 0)
    with pytest.raises(InvalidCube):
        Cube.from_bounds([0, 0], [1, F(1, 2)])


def test_interval_relations():
    a, b = Interval(F(0), F(1, 2)), Interval.open(F(1, 2), F(1))
    assert not a.meets(b)
    assert a.meets(Interval(F(1, 2), F(1)))
    assert Interval(F(0), F(1)).contains_interval(a)
    assert not b.contains_interval(Interval(F(1, 2), F(3, 4)))


def test_ball_straddling_returns_indeterminate():
    cube = Cube((Ball(F(2, 5), F(2, 5) + F(1, 10**6)),), F(1, 10))
    slab = Slab.axis_aligned(1, 0, F(1, 5), F(1, 10))
    # the cube's left end 0.3 sits exactly on the slab edge up to the ball's width
    assert cube_avoids_slab(cube, slab) is None
