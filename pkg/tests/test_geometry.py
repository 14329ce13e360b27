from fractions import Fraction

import pytest

from udrig.creal import CReal, Ordering
from udrig.geometry import (
    CannotFrame,
    Configuration,
    DimensionMismatch,
    GeometryError,
    PairClass,
    PlacementSolution,
    Point,
    UnknownLabel,
    canonical_frame,
    classify_pairs,
    distance,
    merge,
    validate,
)

R3 = "sqrt(3)/2"


def rhombus():
    pts = [Point("B", ("0", "0")), Point("D", ("1", "0")), Point("A", ("1/2", R3)), Point("C", ("1/2", "-" + R3))]
    return Configuration(pts, [("B", "D"), ("A", "B"), ("A", "D"), ("C", "B"), ("C", "D")])


def test_distance_examples():
    assert distance(Point("p", ("0", "0")), Point("q", ("1", "0"))).compare(1) is Ordering.EQUAL
    assert distance(Point("a", ("1/2", R3)), Point("c", ("1/2", "-" + R3)))  == CReal.of("sqrt(3)")
    assert distance(Point("o", ("0", "0")), Point("x", ("3/4", "sqrt(7)/4"))) == CReal.of(1)


def test_distance_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        distance(Point("a", ("0", "0")), Point("b", ("0", "0", "1")))


def test_classify_examples():
    tri = Configuration([Point("P", ("0", "0")), Point("Q", ("1", "0")), Point("R", ("1/2", R3))])
    assert set(classify_pairs(tri).pair_table.values()) == {PairClass.UNIT}
    table = classify_pairs(rhombus()).pair_table
    assert table[("A", "C")] is PairClass.NON_UNIT
    odd = Configuration([Point("a", ("0", "0")), Point("b", ("sqrt(1/4) + 1/2", "0"))])
    assert classify_pairs(odd).pair_table[("a", "b")] is PairClass.UNIT


def test_validate_examples():
    c = Configuration([Point("a", ("0", "0")), Point("b", ("1", "0")), Point("c", ("2", "0"))], [("a", "b")])
    assert validate(c).undeclared_units == (("b", "c"),)
    assert validate(rhombus()).valid
    tiny = CReal.inexact(1 + Fraction(1, 2**200))
    adv = Configuration([Point("a", ("0", "0")), Point("b", (tiny, CReal.of(0)))])
    r = validate(adv, budget=128)
    assert r.undecided == (("a", "b"),) and not r.valid


def test_bad_edge_reported():
    c = Configuration([Point("a", ("0", "0")), Point("b", ("2", "0"))], [("a", "b")])
    assert validate(c).bad_edges == (("a", "b"),)


def test_configuration_errors():
    with pytest.raises(GeometryError):
        Configuration([Point("a", ("0", "0")), Point("a", ("1", "0"))])
    with pytest.raises(UnknownLabel):
        Configuration([Point("a", ("0", "0"))], [("a", "z")])
    with pytest.raises(DimensionMismatch):
        Configuration([Point("a", ("0", "0", "0"))])


def _sol(pairs):
    return PlacementSolution({k: tuple(CReal.of(x) for x in v) for k, v in pairs.items()})


def _coords(s):
    return {k: tuple(x.to_string() for x in v) for k, v in s.assignment.items()}


def test_canonical_frame_identity_and_reflection():
    tri = {"P": ("0", "0"), "Q": ("1", "0"), "R": ("1/2", R3)}
    s = _sol(tri)
    assert _coords(canonical_frame(s, ("P", "Q"))) == _coords(s)
    flipped = _sol({**tri, "R": ("1/2", "-" + R3)})
    assert _coords(canonical_frame(flipped, ("P", "Q"))) == _coords(s)


def test_canonical_frame_absorbs_rational_rotation():
    # rotation by the 3-4-5 angle, then a translation
    cos, sin = Fraction(3, 5), Fraction(4, 5)
    base = {"B": ("0", "0"), "D": ("1", "0"), "A": ("1/2", R3), "C": ("1/2", "-" + R3)}
    s = _sol(base)
    moved = {}
    for k, (x, y) in s.assignment.items():
        moved[k] = (cos * x - sin * y + 7, sin * x + cos * y - Fraction(2, 3))
    t = PlacementSolution(moved)
    assert _coords(canonical_frame(t, ("B", "D"))) == _coords(s)


def test_cannot_frame_coincident_base():
    with pytest.raises(CannotFrame):
        canonical_frame(_sol({"a": ("1", "1"), "b": ("1", "1")}), ("a", "b"))


def test_merge_identifies_equal_points():
    c = rhombus()
    other = Configuration([Point("u", ("0", "0")), Point("v", ("-1", "0"))], [("u", "v")])
    m, mapping = merge(c, other, prefix="k.")
    assert mapping == {"u": "B", "v": "k.v"}
    assert m.has_edge("B", "k.v")
    assert validate(m).valid
