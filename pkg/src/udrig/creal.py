"""Certified reals: refinable rational intervals with an optional exact value.

A :class:`CReal` either carries an exact quadratic-tower value (``exact``) or
is known only through enclosures (decimal input, numeric witnesses).  Every
comparison is three-valued: ``LESS``/``GREATER`` need separated intervals or an
exact sign, ``EQUAL`` needs exact values, anything else is ``UNDECIDED``.
"""

from __future__ import annotations

import enum
import math
import os
import re
from fractions import Fraction
from typing import Callable, Optional

from .tower import QT, TowerOverflow

DEFAULT_BUDGET = 256
GUARD_BITS = 16

Interval = tuple  # (Fraction lo, Fraction hi)


class Ordering(enum.Enum):
    LESS = "less"
    EQUAL = "equal"
    GREATER = "greater"
    UNDECIDED = "undecided"


class ExprSyntaxError(ValueError):
    pass


def default_budget() -> int:
    env = os.environ.get("UDRIG_PRECISION")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"UDRIG_PRECISION must be an integer, got {env!r}")
    return DEFAULT_BUDGET


# -- interval helpers -----------------------------------------------------------


def _fl(q: Fraction, p: int) -> Fraction:
    return Fraction((q.numerator << p) // q.denominator, 1 << p)


def _cl(q: Fraction, p: int) -> Fraction:
    return Fraction(-((-q.numerator << p) // q.denominator), 1 << p)


def _iadd(x, y, p):
    return _fl(x[0] + y[0], p), _cl(x[1] + y[1], p)


def _ineg(x, p):
    return -x[1], -x[0]


def _imul(x, y, p):
    prods = (x[0] * y[0], x[0] * y[1], x[1] * y[0], x[1] * y[1])
    return _fl(min(prods), p), _cl(max(prods), p)


def _iinv(x, p):
    if x[0] <= 0 <= x[1]:
        raise ZeroDivisionError("interval contains zero")
    return _fl(1 / x[1], p), _cl(1 / x[0], p)


def _isqrt(x, p):
    lo, hi = x
    if hi < 0:
        raise ValueError("square root of a negative interval")
    lo = max(lo, Fraction(0))

    def root_floor(q):
        if q <= 0:
            return Fraction(0)
        return Fraction(math.isqrt((q.numerator << (2 * p)) // q.denominator), 1 << p)

    def root_ceil(q):
        if q <= 0:
            return Fraction(0)
        n = -(-(q.numerator << (2 * p)) // q.denominator)
        r = math.isqrt(n)
        if r * r < n:
            r += 1
        return Fraction(r, 1 << p)

    return root_floor(lo), root_ceil(hi)


# -- the type --------------------------------------------------------------------


class CReal:
    """Certified real number.

    Instances are immutable.  ``==`` is structural (same exact value, or the
    same source text for inexact values); use :meth:`compare` for certified
    comparison.
    """

    __slots__ = ("exact", "_approx", "budget", "text")

    def __init__(
        self,
        exact: Optional[QT] = None,
        approx: Optional[Callable[[int], Interval]] = None,
        budget: Optional[int] = None,
        text: Optional[str] = None,
    ):
        if exact is None and approx is None:
            raise ValueError("CReal needs an exact value or an enclosure function")
        object.__setattr__(self, "exact", exact)
        object.__setattr__(self, "_approx", approx)
        object.__setattr__(self, "budget", default_budget() if budget is None else budget)
        object.__setattr__(self, "text", text)

    def __setattr__(self, name, value):
        raise AttributeError("CReal is immutable")

    # construction

    @classmethod
    def of(cls, value, budget: Optional[int] = None) -> "CReal":
        if isinstance(value, CReal):
            return value
        if isinstance(value, QT):
            return cls(exact=value, budget=budget)
        if isinstance(value, (int, Fraction)):
            return cls(exact=QT(value), budget=budget)
        if isinstance(value, str):
            return parse_number(value, budget=budget)
        raise TypeError(f"cannot make a CReal from {type(value).__name__}")

    @classmethod
    def inexact(cls, value: Fraction, text: Optional[str] = None, budget: Optional[int] = None) -> "CReal":
        """A value known only through enclosures of the given rational."""
        value = Fraction(value)

        def approx(p):
            return _fl(value, p), _cl(value, p)

        return cls(approx=approx, budget=budget, text=text if text is not None else _decimal_text(value))

    @classmethod
    def from_float(cls, x: float, budget: Optional[int] = None) -> "CReal":
        text = repr(float(x))
        return cls.inexact(Fraction(text), text=text, budget=budget)

    # basic queries

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    def interval(self, bits: int = 64) -> Interval:
        """Enclosure computed at working precision ``bits``.

        Enclosures are nested: more bits never widen the interval.
        """
        p = bits + GUARD_BITS
        if self.exact is not None:
            lo, hi = self.exact.enclose(p)
        else:
            lo, hi = self._approx(p)
        return lo, hi

    def width(self, bits: int = 64) -> Fraction:
        lo, hi = self.interval(bits)
        return hi - lo

    def __float__(self):
        if self.exact is not None:
            return float(self.exact)
        lo, hi = self.interval(64)
        return float((lo + hi) / 2)

    # arithmetic

    def _lift(self, other) -> "CReal":
        if isinstance(other, CReal):
            return other
        return CReal.of(other, budget=self.budget)

    def _combine(self, other, exact_op, interval_op) -> "CReal":
        o = self._lift(other)
        budget = min(self.budget, o.budget)
        if self.exact is not None and o.exact is not None:
            return CReal(exact=exact_op(self.exact, o.exact), budget=budget)
        a, b = self, o

        def approx(p):
            return interval_op(a._enc(p), b._enc(p), p)

        return CReal(approx=approx, budget=budget)

    def _enc(self, p):
        if self.exact is not None:
            return self.exact.enclose(p)
        return self._approx(p)

    def __add__(self, other):
        return self._combine(other, lambda x, y: x + y, _iadd)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, lambda x, y: x - y, lambda x, y, p: _iadd(x, _ineg(y, p), p))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        return self._combine(other, lambda x, y: x * y, _imul)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._combine(other, lambda x, y: x / y, lambda x, y, p: _imul(x, _iinv(y, p), p))

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def __neg__(self):
        if self.exact is not None:
            return CReal(exact=-self.exact, budget=self.budget)
        a = self
        return CReal(approx=lambda p: _ineg(a._approx(p), p), budget=self.budget)

    def __abs__(self):
        if self.exact is not None:
            return CReal(exact=abs(self.exact), budget=self.budget)
        a = self

        def approx(p):
            lo, hi = a._approx(p)
            if lo >= 0:
                return lo, hi
            if hi <= 0:
                return -hi, -lo
            return Fraction(0), max(-lo, hi)

        return CReal(approx=approx, budget=self.budget)

    def sqrt(self) -> "CReal":
        if self.exact is not None:
            return CReal(exact=self.exact.sqrt(), budget=self.budget)
        a = self
        return CReal(approx=lambda p: _isqrt(a._approx(p), p), budget=self.budget)

    def with_budget(self, budget: int) -> "CReal":
        return CReal(exact=self.exact, approx=self._approx, budget=budget, text=self.text)

    # comparison

    def compare(self, other, budget: Optional[int] = None) -> Ordering:
        o = self._lift(other)
        if budget is None:
            budget = min(self.budget, o.budget)
        if self.exact is not None and o.exact is not None:
            try:
                s = self.exact.cmp(o.exact)
            except TowerOverflow:
                s = None
            if s is not None:
                return (Ordering.LESS, Ordering.EQUAL, Ordering.GREATER)[s + 1]
        bits = min(32, budget)
        while True:
            alo, ahi = self.interval(bits)
            blo, bhi = o.interval(bits)
            if ahi < blo:
                return Ordering.LESS
            if bhi < alo:
                return Ordering.GREATER
            if bits >= budget:
                return Ordering.UNDECIDED
            bits = min(2 * bits, budget)

    def sign(self, budget: Optional[int] = None) -> Ordering:
        return self.compare(0, budget)

    # structural identity

    def __eq__(self, other):
        if not isinstance(other, CReal):
            return NotImplemented
        if self.exact is not None or other.exact is not None:
            return self.exact is not None and other.exact is not None and self.exact == other.exact
        return self is other or (self.text is not None and self.text == other.text)

    def __hash__(self):
        if self.exact is not None:
            return hash(self.exact)
        return hash(self.text) if self.text is not None else id(self)

    # rendering

    def to_string(self) -> str:
        """Serialised form: exact expression, or the decimal source text."""
        if self.exact is not None:
            return self.exact.to_expr()
        if self.text is not None:
            return self.text
        lo, hi = self.interval(64)
        return _decimal_text((lo + hi) / 2, digits=20)

    def decimal_interval(self, digits: int = 20) -> list:
        bits = int(digits * 3.33) + 8
        lo, hi = self.interval(bits)
        return [_decimal_floor(lo, digits), _decimal_ceil(hi, digits)]

    def __str__(self):
        return self.to_string()

    def __repr__(self):
        return f"CReal({self.to_string()!r})"


# -- decimals ------------------------------------------------------------------------

_DECIMAL_RE = re.compile(r"^\s*[+-]?(\d+\.\d*|\.\d+|\d+(\.\d*)?[eE][+-]?\d+)\s*$")


def is_decimal_literal(text: str) -> bool:
    return bool(_DECIMAL_RE.match(text))


def _decimal_text(q: Fraction, digits: int = 40) -> str:
    sign = "-" if q < 0 else ""
    q = abs(q)
    scaled = round(q * 10**digits)
    ip, fp = divmod(scaled, 10**digits)
    frac = str(fp).rjust(digits, "0").rstrip("0")
    return f"{sign}{ip}.{frac or '0'}"


def _decimal_floor(q: Fraction, digits: int) -> str:
    n = math.floor(q * 10**digits)
    return _fixed(n, digits)


def _decimal_ceil(q: Fraction, digits: int) -> str:
    n = math.ceil(q * 10**digits)
    return _fixed(n, digits)


def _fixed(n: int, digits: int) -> str:
    sign = "-" if n < 0 else ""
    n = abs(n)
    ip, fp = divmod(n, 10**digits)
    return f"{sign}{ip}.{str(fp).rjust(digits, '0')}"


# -- expression grammar -------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(?:(\d+)|(sqrt)|(.))")


def _tokenize(text: str):
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            break
        pos = m.end()
        if m.group(1) is not None:
            tokens.append(("int", int(m.group(1))))
        elif m.group(2) is not None:
            tokens.append(("sqrt", None))
        else:
            ch = m.group(3)
            if ch not in "+-*/()":
                raise ExprSyntaxError(f"unexpected character {ch!r} in {text!r}")
            tokens.append((ch, None))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def take(self, kind):
        if self.peek() != kind:
            raise ExprSyntaxError(f"expected {kind!r} in {self.text!r}")
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self) -> QT:
        if not self.tokens:
            raise ExprSyntaxError("empty expression")
        v = self.expr()
        if self.i != len(self.tokens):
            raise ExprSyntaxError(f"trailing input in {self.text!r}")
        return v

    def expr(self) -> QT:
        v = self.term()
        while self.peek() in ("+", "-"):
            op = self.take(self.peek())[0]
            w = self.term()
            v = v + w if op == "+" else v - w
        return v

    def term(self) -> QT:
        v = self.unary()
        while self.peek() in ("*", "/"):
            op = self.take(self.peek())[0]
            w = self.unary()
            if op == "*":
                v = v * w
            else:
                if w.is_zero():
                    raise ExprSyntaxError(f"division by zero in {self.text!r}")
                v = v / w
        return v

    def unary(self) -> QT:
        if self.peek() == "-":
            self.take("-")
            return -self.unary()
        if self.peek() == "+":
            self.take("+")
            return self.unary()
        return self.atom()

    def atom(self) -> QT:
        kind = self.peek()
        if kind == "int":
            return QT(self.take("int")[1])
        if kind == "sqrt":
            self.take("sqrt")
            self.take("(")
            v = self.expr()
            self.take(")")
            if v.sign() < 0:
                raise ExprSyntaxError(f"square root of a negative value in {self.text!r}")
            return v.sqrt()
        if kind == "(":
            self.take("(")
            v = self.expr()
            self.take(")")
            return v
        raise ExprSyntaxError(f"unexpected token {kind!r} in {self.text!r}")


def parse_expr(text: str) -> QT:
    """Parse an exact expression (integers, + - * /, sqrt, parentheses)."""
    return _Parser(text).parse()


def parse_number(text: str, budget: Optional[int] = None) -> CReal:
    """Parse a coordinate string: a decimal literal becomes an inexact CReal,
    anything else is read as an exact expression."""
    if is_decimal_literal(text):
        return CReal.inexact(Fraction(text.strip()), text=text.strip(), budget=budget)
    return CReal(exact=parse_expr(text), budget=budget)
