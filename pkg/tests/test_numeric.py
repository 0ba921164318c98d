import math
from fractions import Fraction as F

import pytest

from twistwin.numeric import (PRECISION_ENV, Ball, IndeterminateComparison, convert, default_precision,
                              floor_log, parse_rational, to_text)


def test_parse_forms():
    assert parse_rational("0.25") == F(1, 4)
    assert parse_rational("1/3") == F(1, 3)
    assert parse_rational(0.1) == F(1, 10)
    assert parse_rational(3) == 3
    with pytest.raises(ValueError):
        parse_rational("abc")
    with pytest.raises(TypeError):
        parse_rational(True)


def test_text_round_trip():
    for q in (F(1, 4), F(1, 3), F(-7, 8), F(5), F(2, 3**40)):
        assert parse_rational(to_text(q)) == q
    assert to_text(F(1, 8)) == "0.125"
    assert to_text(F(1, 3)) == "1/3"


def test_ball_encloses_true_value():
    third = Ball(F(1), None, 64) / 3
    assert third.lo <= F(1, 3) <= third.hi
    assert third.radius > 0
    total = third + third + third
    assert total.lo <= 1 <= total.hi


def test_ball_comparisons_refuse_to_guess():
    a = Ball(F(1, 3), F(1, 3) + F(1, 10**6))
    with pytest.raises(IndeterminateComparison):
        _ = a < F(1, 3) + F(1, 10**7)
    assert a < F(1, 2)
    assert a > 0


def test_ball_text_round_trip():
    b = Ball(F(1, 4), F(3, 4))
    back = convert(to_text(b), "bigfloat", 64)
    assert back.lo == F(1, 4) and back.hi == F(3, 4)


def test_precision_env(monkeypatch):
    monkeypatch.delenv(PRECISION_ENV, raising=False)
    assert default_precision() == 256
    monkeypatch.setenv(PRECISION_ENV, "80")
    assert default_precision() == 80
    monkeypatch.setenv(PRECISION_ENV, "lots")
    with pytest.raises(ValueError):
        default_precision()


def test_floor_log_exact():
    assert floor_log(F(26, 25), F(3)) == 28
    assert floor_log(F(2), F(8)) == 3
    assert floor_log(F(2), F(7)) == 2
    assert floor_log(F(10), F(1)) == 0
    for base, value in ((F(22, 21), F(17)), (F(3, 2), F(1000))):
        k = floor_log(base, value)
        assert base**k <= value < base ** (k + 1)
        assert k == math.floor(math.log(value) / math.log(base))
