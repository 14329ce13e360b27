from fractions import Fraction

import pytest

from udrig.creal import CReal, ExprSyntaxError, Ordering, parse_expr, parse_number


def test_exact_comparisons():
    s3 = CReal.of("sqrt(3)")
    assert s3.compare(CReal.of("7/4")) is Ordering.LESS
    assert s3.compare("sqrt(12)/2") is Ordering.EQUAL
    assert (s3 * s3).compare(3) is Ordering.EQUAL


def test_decimal_literals_are_inexact_but_keep_text():
    x = parse_number("0.1")
    assert not x.is_exact
    assert x.to_string() == "0.1"
    assert x.compare(CReal.of("1/10")) is Ordering.UNDECIDED or x.compare("1/10") is Ordering.EQUAL


def test_tiny_gap_is_undecided_within_budget():
    one = CReal.of(1)
    bumped = CReal.inexact(1 + Fraction(1, 2**200))
    assert bumped.compare(one, budget=128) is Ordering.UNDECIDED
    assert bumped.compare(one, budget=256) is Ordering.GREATER


def test_interval_contains_exact_value():
    v = CReal.of("sqrt(2) + 1/3")
    lo, hi = v.interval(80)
    assert lo <= hi
    assert float(lo) <= 2**0.5 + 1 / 3 <= float(hi)


def test_mixed_arithmetic_is_enclosed():
    x = CReal.of("sqrt(2)") + CReal.inexact(Fraction(1, 3))
    lo, hi = x.interval(60)
    assert float(lo) <= 2**0.5 + 1 / 3 <= float(hi)
    assert x.compare(CReal.of(1)) is Ordering.GREATER


def test_parse_grammar():
    assert parse_expr("-(1 + 2) * 3 / 4") == parse_expr("-9/4")
    assert parse_expr("sqrt(sqrt(16))") == parse_expr("2")
    for bad in ("sqrt(-1)", "1 +", "2 ** 3", "x", "sqrt 2"):
        with pytest.raises((ExprSyntaxError, ValueError)):
            parse_expr(bad)


def test_decimal_interval_rendering():
    lo, hi = CReal.of("sqrt(2)").decimal_interval(10)
    assert lo.startswith("1.41421356") and hi.startswith("1.41421356")
    assert lo <= hi


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        CReal.of(1) / CReal.of(0)


def test_env_budget(monkeypatch):
    monkeypatch.setenv("UDRIG_PRECISION", "64")
    assert CReal.of("sqrt(2)").budget == 64
