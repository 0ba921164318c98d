import itertools
import math
import random
from fractions import Fraction as F

import pytest

from oracles import affine_piece, cantor_measure, greedy_disjoint, similarity_cut_set
from twistwin.conformal import (IFS1D, InvalidIFS, lambda_r, mass_distribution_check, maximal_disjoint,
                                measure_upper, moran_root, subsystem, subsystem_dimension)
from twistwin.dynamics import Mobius

THIRD = F(1, 3)
CANTOR_PAIRS = [(THIRD, F(0)), (THIRD, F(2, 3))]
LOG2_LOG3 = math.log(2) / math.log(3)


@pytest.fixture(scope="module")
def cantor():
    return IFS1D.similarities(CANTOR_PAIRS)


def test_cantor_cut_at_quarter(cantor):
    words = lambda_r(cantor, F(1, 4))
    assert words == [(1, 1), (1, 2), (2, 1), (2, 2)]
    assert words == similarity_cut_set([THIRD, THIRD], F(1, 4))


def test_first_cut_just_below_diameter(cantor):
    assert lambda_r(cantor, F(999, 1000)) == [(1,), (2,)]


def test_mixed_ratio_cut_set():
    ifs = IFS1D.similarities([(F(1, 2), 0), (F(1, 4), F(3, 4))])
    words = lambda_r(ifs, F(1, 5))
    assert words == similarity_cut_set([F(1, 2), F(1, 4)], F(1, 5))
    assert {len(w) for w in words} == {2, 3}


def test_cut_set_property(cantor):
    r = F(1, 50)
    words = lambda_r(cantor, r)
    assert all(cantor.diameter(w) < r <= cantor.diameter(w[:-1]) for w in words)
    # binary tree cut: the pieces carry all of the mass
    assert sum(F(1, 2 ** len(w)) for w in words) == 1


def test_cantor_quarter_keeps_everything(cantor):
    sub = maximal_disjoint(cantor, lambda_r(cantor, F(1, 4)))
    assert sub.count == 4 and sub.gap == F(1, 9)


def test_overlapping_system_gives_strict_subfamily():
    pairs = [(F(1, 2), F(0)), (F(1, 2), F(1, 4))]
    ifs = IFS1D.similarities(pairs)
    assert ifs.hull == (0, F(1, 2))
    r = F(1, 20)
    words = lambda_r(ifs, r)
    assert words == similarity_cut_set([F(1, 2), F(1, 2)], r, F(1, 2))
    sub = maximal_disjoint(ifs, words)
    pieces = [affine_piece(pairs, w, F(0), F(1, 2)) for w in words]
    assert sub.words == [words[j] for j in greedy_disjoint(pieces)]
    assert (len(words), sub.count) == (16, 8)


def test_single_word_subfamily(cantor):
    sub = maximal_disjoint(cantor, [(1, 2)])
    assert sub.words == [(1, 2)] and sub.gap is None


def test_moran_roots():
    assert moran_root([1 / 3, 1 / 3]) == pytest.approx(LOG2_LOG3, abs=1e-12)
    for m, r in ((3, 0.2), (5, 0.1), (4, 0.25)):
        assert moran_root([r] * m) == pytest.approx(math.log(m) / math.log(1 / r), abs=1e-11)


def test_cantor_dimension_at_fine_scale(cantor):
    report = subsystem_dimension(subsystem(cantor, F(1, 3**8)))
    assert report.moran == pytest.approx(LOG2_LOG3, abs=1e-12)
    assert report.lower_bound >= LOG2_LOG3 - 0.05


def test_separation_of_deeper_pieces(cantor):
    sub = subsystem(cantor, F(1, 4))
    rep = subsystem_dimension(sub)
    for n in (1, 2, 3):
        words = [sum(parts, ()) for parts in itertools.product(sub.words, repeat=n)]
        pieces = sorted(cantor.piece(w) for w in words)
        gap = min(b[0] - a[1] for a, b in zip(pieces, pieces[1:]))
        assert gap >= rep.c1 * (rep.c2 * sub.r) ** n


def test_measure_matches_cantor_oracle(cantor):
    sub = subsystem(cantor, F(1, 4))
    rng = random.Random(1)
    for _ in range(40):
        a = F(rng.randint(0, 10**6), 10**6)
        b = a + F(rng.randint(1, 10**5), 10**6)
        upper = measure_upper(sub, a, b, F(1, 3**12))
        assert abs(float(upper) - cantor_measure(float(a), float(b), 12)) <= 2 * 0.5**12 + 1e-12


def test_measure_edge_cases(cantor):
    sub = subsystem(cantor, F(1, 4))
    assert measure_upper(sub, F(2, 5), F(3, 5), F(1, 10**6)) == 0
    assert measure_upper(sub, F(0), F(1), F(1, 10**6)) == 1
    report = mass_distribution_check(sub, intervals=[(F(0), F(1)), (F(2, 5), F(3, 5))])
    assert report.ok


def test_mass_distribution_on_random_intervals(cantor):
    report = mass_distribution_check(subsystem(cantor, F(1, 3**5)), samples=500, seed=3)
    assert report.ok and report.max_ratio <= 1


def test_non_affine_system():
    # two contracting Mobius maps: x -> x/(x+2) and x -> (x+1)/(x+3) on [0, 1]
    ifs = IFS1D([Mobius(F(1), F(0), F(1), F(2)), Mobius(F(1), F(1), F(1), F(3))])
    lo, hi = ifs.hull
    assert 0 <= lo < hi <= 1
    sub = subsystem(ifs, F(1, 100))
    assert sub.count >= 2 and sub.gap > 0
    assert all(ifs.diameter(w) < F(1, 100) for w in lambda_r(ifs, F(1, 100)))
    assert subsystem_dimension(sub).lower_bound > 0


def test_bad_ifs_spec():
    with pytest.raises(InvalidIFS):
        IFS1D.from_spec({"maps": [{"ratio": "0"}]})
    with pytest.raises(InvalidIFS):
        IFS1D.from_spec({"nothing": []})
