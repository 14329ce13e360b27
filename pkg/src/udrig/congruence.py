"""Finite truncations of the level-by-level definition of segment congruence.

Level n asks for a positive rational r and points x, y with

    d(a, x) = r,  d(c, y) = r,  d(b, x) = 1/n,  d(d, y) = 1/n.

A point x with d(a, x) = r and d(b, x) = 1/n exists iff
|r - 1/n| <= d(a, b) <= r + 1/n, so level n holds iff the intersection of
[|D1 - 1/n|, D1 + 1/n] and [|D2 - 1/n|, D2 + 1/n] contains a positive rational.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .enumerator import _d2
from .geometry import Point
from .tower import QT


class CongruenceError(ValueError):
    pass


@dataclass(frozen=True)
class TruncationQuery:
    a: Point
    b: Point
    c: Point
    d: Point
    N: int
    denominator_bound: int = 64

    def __post_init__(self):
        if self.N < 1:
            raise CongruenceError("N must be >= 1")
        if self.denominator_bound < 1:
            raise CongruenceError("denominator_bound must be >= 1")
        for p in (self.a, self.b, self.c, self.d):
            if p.dimension != 2 or not p.is_exact:
                raise CongruenceError(f"point {p.label!r} must be planar with exact coordinates")


@dataclass(frozen=True)
class Level:
    n: int
    holds: bool
    r: Optional[Fraction] = None
    x: Optional[tuple] = None
    y: Optional[tuple] = None
    false_by_search: bool = False


@dataclass(frozen=True)
class Truncation:
    levels: tuple
    holds: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "holds", all(lv.holds for lv in self.levels))

    def first_failure(self) -> Optional[int]:
        return next((lv.n for lv in self.levels if not lv.holds), None)


def _xy(p: Point):
    return (p.coords[0].exact, p.coords[1].exact)


def _lengths(q: TruncationQuery):
    return _d2(_xy(q.a), _xy(q.b)).sqrt(), _d2(_xy(q.c), _xy(q.d)).sqrt()


def feasible_interval(D1: QT, D2: QT, n: int):
    """Exact (lo, hi) of admissible radii at level n, or None when empty."""
    h = QT(Fraction(1, n))
    lo = max(abs(D1 - h), abs(D2 - h), key=_Key)
    hi = min(D1 + h, D2 + h, key=_Key)
    if lo.cmp(hi) > 0:
        return None
    return lo, hi


class _Key:
    __slots__ = ("v",)

    def __init__(self, v):
        self.v = v

    def __lt__(self, other):
        return self.v.cmp(other.v) < 0


def simplest_rational(lo: QT, hi: QT) -> Optional[Fraction]:
    """Smallest-denominator positive rational in [lo, hi] (lo >= 0), or None."""
    c = lo.cmp(hi)
    if c > 0:
        return None
    if c == 0:
        if lo.is_rational() and lo.sign() > 0:
            return lo.as_fraction()
        return None
    if lo.is_zero():
        if hi.cmp(QT(1)) >= 0:
            return Fraction(1)
        return Fraction(1, (QT(1) / hi).ceil())
    return _stern_brocot(lo, hi)


def _stern_brocot(lo: QT, hi: QT) -> Fraction:
    # continued-fraction descent on a closed interval with lo < hi, lo > 0
    fl = lo.floor()
    if lo.cmp(QT(fl)) == 0:
        return Fraction(fl)
    if QT(fl + 1).cmp(hi) <= 0:
        return Fraction(fl + 1)
    inner = _stern_brocot(QT(1) / (hi - fl), QT(1) / (lo - fl))
    return fl + 1 / inner


def truncated_equiv_closed_form(q: TruncationQuery) -> Truncation:
    D1, D2 = _lengths(q)
    levels = []
    for n in range(1, q.N + 1):
        iv = feasible_interval(D1, D2, n)
        r = simplest_rational(*iv) if iv else None
        levels.append(Level(n, r is not None, r))
    return Truncation(tuple(levels))


@dataclass(frozen=True)
class SurdPoint:
    """The point base + sqrt(h2) * direction, kept symbolic so that witness
    construction does not add a tower level per radius."""

    base: tuple
    direction: tuple
    h2: QT

    def d2_to(self, p) -> QT:
        m = (self.base[0] - p[0], self.base[1] - p[1])
        v2 = self.direction[0] * self.direction[0] + self.direction[1] * self.direction[1]
        cross = m[0] * self.direction[0] + m[1] * self.direction[1]
        out = m[0] * m[0] + m[1] * m[1] + self.h2 * v2
        if cross.is_zero() or self.h2.is_zero():
            return out
        return out + cross * self.h2.sqrt() * 2

    def to_strings(self) -> list:
        if self.h2.is_zero():
            return [c.to_expr() for c in self.base]
        root = f"sqrt({self.h2.to_expr()})"
        return [f"{b.to_expr()} + ({v.to_expr()})*{root}" for b, v in zip(self.base, self.direction)]

    def to_floats(self) -> list:
        h = float(self.h2) ** 0.5
        return [float(b) + float(v) * h for b, v in zip(self.base, self.direction)]


def _witness(centre, r: Fraction, other, n: int):
    """A point at distance r from ``centre`` and 1/n from ``other``, or None."""
    rp2, rq2 = QT(r * r), QT(Fraction(1, n * n))
    e = (other[0] - centre[0], other[1] - centre[1])
    D = e[0] * e[0] + e[1] * e[1]
    if D.is_zero():
        if rp2 != rq2:
            return None
        return SurdPoint((centre[0] + QT(r), centre[1]), (QT(0), QT(0)), QT(0))
    t = (D + rp2 - rq2) / (D * 2)
    h2 = rp2 / D - t * t
    if h2.sign() < 0:
        return None
    base = (centre[0] + t * e[0], centre[1] + t * e[1])
    return SurdPoint(base, (-e[1], e[0]), h2)


def truncated_equiv_search(q: TruncationQuery) -> Truncation:
    """Scan rationals by increasing denominator and build x, y explicitly.

    A level without a witness up to the bound is false; ``false_by_search``
    marks levels where a rational radius exists beyond the bound.
    """
    a, b, c, d = (_xy(p) for p in (q.a, q.b, q.c, q.d))
    D1, D2 = _lengths(q)
    levels = []
    for n in range(1, q.N + 1):
        found = None
        hi_cap = (min(D1, D2, key=_Key) + QT(Fraction(1, n))).ceil()
        f1, f2, fh = float(D1), float(D2), 1.0 / n
        for den in range(1, q.denominator_bound + 1):
            for num in range(1, hi_cap * den + 1):
                r = Fraction(num, den)
                if r.denominator != den:
                    continue
                fr = float(r)
                # cheap float screen; the exact construction below decides
                if not all(abs(fr - fh) - 1e-9 <= D <= fr + fh + 1e-9 for D in (f1, f2)):
                    continue
                x = _witness(a, r, b, n)
                y = _witness(c, r, d, n) if x is not None else None
                if x is not None and y is not None:
                    found = Level(n, True, r, x, y)
                    break
            if found:
                break
        if found is None:
            iv = feasible_interval(D1, D2, n)
            beyond = bool(iv) and simplest_rational(*iv) is not None
            found = Level(n, False, false_by_search=beyond)
        levels.append(found)
    return Truncation(tuple(levels))


def witness_holds(q: TruncationQuery, lv: Level) -> bool:
    """Check the four distance predicates of a level witness exactly."""
    if not lv.holds:
        return False
    r2, h2 = QT(lv.r * lv.r), QT(Fraction(1, lv.n * lv.n))
    return (
        lv.x.d2_to(_xy(q.a)) == r2
        and lv.y.d2_to(_xy(q.c)) == r2
        and lv.x.d2_to(_xy(q.b)) == h2
        and lv.y.d2_to(_xy(q.d)) == h2
    )
