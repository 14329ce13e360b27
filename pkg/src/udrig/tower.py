"""Exact arithmetic in a real quadratic tower.

Numbers live in a single process-wide tower Q = K_0 < K_1 < ... where
K_k = K_{k-1}(sqrt(d_k)) and d_k is a positive element of K_{k-1} that is not
a square there.  An element of K_k is stored as ``a + b*sqrt(d_k)`` with a, b
in K_{k-1}; elements are always trimmed to the lowest level that holds them,
so the representation is a canonical normal form and equality is structural.

The tower only ever grows by appending levels, so the representation of a
value never changes once computed.
"""

from __future__ import annotations

import math
import threading
from fractions import Fraction
from functools import cmp_to_key
from typing import Union

__all__ = [
    "TowerOverflow",
    "QT",
    "ZERO",
    "ONE",
    "max_height",
    "height",
]

MAX_HEIGHT = 256


class TowerOverflow(ArithmeticError):
    """Raised when a square root would push the tower past its height cap."""


class _Ext:
    __slots__ = ("k", "a", "b", "_hash")

    def __init__(self, k: int, a, b):
        self.k = k
        self.a = a
        self.b = b
        self._hash = hash((k, a, b))

    def __eq__(self, other):
        return (
            isinstance(other, _Ext)
            and self.k == other.k
            and self.a == other.a
            and self.b == other.b
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"_Ext({self.k}, {self.a!r}, {self.b!r})"


Raw = Union[Fraction, _Ext]

_F0 = Fraction(0)
_F1 = Fraction(1)

# _radicands[k] is d_k for k >= 1; index 0 is unused.
_radicands: list = [None]
_lock = threading.RLock()
_root_cache: dict = {}


def height() -> int:
    return len(_radicands) - 1


def max_height() -> int:
    return MAX_HEIGHT


def _lvl(x: Raw) -> int:
    return x.k if type(x) is _Ext else 0


def _mk(k: int, a: Raw, b: Raw) -> Raw:
    if type(b) is not _Ext and b == 0:
        return a
    return _Ext(k, a, b)


def _is_zero(x: Raw) -> bool:
    return type(x) is not _Ext and x == 0


def _add(x: Raw, y: Raw) -> Raw:
    kx, ky = _lvl(x), _lvl(y)
    if kx == 0 and ky == 0:
        return x + y
    if kx > ky:
        return _Ext(kx, _add(x.a, y), x.b)
    if ky > kx:
        return _Ext(ky, _add(x, y.a), y.b)
    return _mk(kx, _add(x.a, y.a), _add(x.b, y.b))


def _neg(x: Raw) -> Raw:
    if type(x) is not _Ext:
        return -x
    return _Ext(x.k, _neg(x.a), _neg(x.b))


def _sub(x: Raw, y: Raw) -> Raw:
    return _add(x, _neg(y))


def _mul(x: Raw, y: Raw) -> Raw:
    kx, ky = _lvl(x), _lvl(y)
    if kx == 0 and ky == 0:
        return x * y
    if kx > ky:
        if _is_zero(y):
            return _F0
        return _Ext(kx, _mul(x.a, y), _mul(x.b, y))
    if ky > kx:
        if _is_zero(x):
            return _F0
        return _Ext(ky, _mul(x, y.a), _mul(x, y.b))
    d = _radicands[kx]
    a = _add(_mul(x.a, y.a), _mul(_mul(x.b, y.b), d))
    b = _add(_mul(x.a, y.b), _mul(x.b, y.a))
    return _mk(kx, a, b)


def _inv(x: Raw) -> Raw:
    if type(x) is not _Ext:
        if x == 0:
            raise ZeroDivisionError("division by zero in quadratic tower")
        return 1 / x
    d = _radicands[x.k]
    norm = _sub(_mul(x.a, x.a), _mul(_mul(x.b, x.b), d))
    ninv = _inv(norm)
    return _mk(x.k, _mul(x.a, ninv), _neg(_mul(x.b, ninv)))


def _sign(x: Raw) -> int:
    if type(x) is not _Ext:
        return (x > 0) - (x < 0)
    sa, sb = _sign(x.a), _sign(x.b)
    if sa == 0:
        return sb
    if sa == sb:
        return sa
    # a and b*sqrt(d) have opposite signs: compare a^2 with b^2 d
    t = _sign(_sub(_mul(x.a, x.a), _mul(_mul(x.b, x.b), _radicands[x.k])))
    return sa * t


def _rational_sqrt(q: Fraction):
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


# Square roots.
#
# For each level i we record q0_i, a rational whose square root lies in
# K_i but not K_{i-1} (None if there is none), together with that root.
# A rational has a square root in K_m iff its square class is a product of
# some q0_i, i <= m; that is a linear question over GF(2), so rational
# radicands never cause branching.  Only levels with irrational radicands
# branch during root extraction.

_classes: list = [None]  # _classes[i] = (q0_i, sqrt(q0_i)) or None
_irrational_levels: list = []
_twist_cache: dict = {}


def _top_irrational(m: int) -> int:
    best = 0
    for i in _irrational_levels:
        if i <= m:
            best = i
    return best


def _core(q: Fraction) -> int:
    return _square_free(q.numerator * q.denominator)[1]


def _coprime_base(nums) -> list:
    atoms = []
    for n in nums:
        pending = [n]
        while pending:
            n = pending.pop()
            if n == 1:
                continue
            for i, a in enumerate(atoms):
                g = math.gcd(a, n)
                if g > 1:
                    atoms.pop(i)
                    pending.extend(x for x in (g, a // g, n // g) if x > 1)
                    break
            else:
                atoms.append(n)
    atoms = sorted(set(atoms))
    return [a for a in atoms if math.isqrt(a) ** 2 != a]


def _class_vector(n: int, atoms) -> int:
    v = 0
    for bit, a in enumerate(atoms):
        odd = 0
        while n % a == 0:
            n //= a
            odd ^= 1
        v |= odd << bit
    return v


_span_cache: dict = {}


def _span(m: int):
    """Coprime atoms and an echelon basis for the classes q0_i, i <= m."""
    hit = _span_cache.get(m)
    if hit is not None:
        return hit
    gens = [(i, c[2]) for i, c in enumerate(_classes[: m + 1]) if c is not None]
    atoms = _coprime_base([g for _, g in gens])
    basis = {}  # pivot bit -> (vector, set of levels)
    for i, g in gens:
        v, used = _reduce(_class_vector(g, atoms), {i}, basis)
        if v:
            basis[v.bit_length() - 1] = (v, used)
    _span_cache[m] = (atoms, basis, gens)
    return atoms, basis, gens


def _reduce(v: int, used: set, basis: dict):
    for piv in sorted(basis, reverse=True):
        if v >> piv & 1:
            v ^= basis[piv][0]
            used = used ^ basis[piv][1]
    return v, used


def _solve_class(q: Fraction, m: int):
    """Levels S <= m with q equal to prod(q0_i, i in S) up to rational squares."""
    atoms, basis, gens = _span(m)
    target = _core(q)
    rest = target
    for a in atoms:
        while rest % a == 0:
            rest //= a
    if rest > 1 and math.isqrt(rest) ** 2 != rest:
        if all(math.gcd(rest, a) == 1 for a in atoms):
            return None
        # the target splits some atom: redo the elimination on a refined base
        atoms = _coprime_base([g for _, g in gens] + [target])
        basis = {}
        for i, g in gens:
            v, used = _reduce(_class_vector(g, atoms), {i}, basis)
            if v:
                basis[v.bit_length() - 1] = (v, used)
    v, used = _reduce(_class_vector(target, atoms), set(), basis)
    return None if v else sorted(used)


def _rational_root(q: Fraction, m: int):
    if q < 0:
        return None
    r = _rational_sqrt(q)
    if r is not None or m == 0:
        return r
    levels = _solve_class(q, m)
    if levels is None:
        return None
    y = Fraction(1)
    rest = q
    for i in levels:
        q0, s = _classes[i][:2]
        rest /= q0
        y = _mul(y, s)
    r = _rational_sqrt(rest)
    return None if r is None else _mul(y, r)


def _twist(w: Raw, m: int):
    """A rational q != 0 with q*w a square in K_m, or None."""
    if type(w) is not _Ext:
        return w if w != 0 else None
    key = (w, m)
    hit = _twist_cache.get(key, False)
    if hit is not False:
        return hit
    k = w.k
    if k < m:
        j = _top_irrational(m)
        if j <= k:
            out = _twist(w, k)
        else:
            out = _twist(w, j - 1)
            if out is None:
                out = _twist(_mul(w, _inv(_radicands[j])), j - 1)
    else:
        out = None
        d = _radicands[m]
        nu = _find_root(_sub(_mul(w.a, w.a), _mul(_mul(w.b, w.b), d)), m - 1)
        if nu is not None:
            for s in (nu, _neg(nu)):
                h = _mul(_add(w.a, s), Fraction(1, 2))
                if not _is_zero(h):
                    out = _twist(h, m - 1)
                    if out is not None:
                        break
    _twist_cache[key] = out
    return out


def _find_root(x: Raw, m: int):
    """A y in K_m with y*y == x, or None."""
    if type(x) is not _Ext:
        return _rational_root(x, m)
    key = (x, m)
    hit = _root_cache.get(key, False)
    if hit is not False:
        return hit
    k = x.k
    r = None
    if k == m:
        d = _radicands[m]
        norm = _sub(_mul(x.a, x.a), _mul(_mul(x.b, x.b), d))
        n = _find_root(norm, m - 1)
        if n is not None:
            for s in (n, _neg(n)):
                c = _find_root(_mul(_add(x.a, s), Fraction(1, 2)), m - 1)
                if c is not None and not _is_zero(c):
                    e = _mul(x.b, _inv(_mul(c, Fraction(2))))
                    r = _mk(m, c, e)
                    break
    else:
        base = max(_top_irrational(m), k)
        if base < m:
            # levels base+1..m have rational radicands
            q = _twist(x, base)
            levels = None if q is None else _solve_class(q, m)
            if levels is not None:
                high = [i for i in levels if i > base]
                rr = Fraction(1)
                for i in high:
                    rr *= _radicands[i]
                y0 = _find_root(_mul(x, rr), base)
                if y0 is not None:
                    r = _mul(y0, Fraction(1) / rr)
                    for i in high:
                        r = _mul(r, _mk(i, _F0, _F1))
        else:
            r = _find_root(x, m - 1)
            if r is None:
                q = _find_root(_mul(x, _inv(_radicands[m])), m - 1)
                if q is not None:
                    r = _mk(m, _F0, q)
    _root_cache[key] = r
    return r


def _square_free(n: int):
    """Split n > 0 as f*f*s with small square factors pulled into f."""
    f = 1
    p = 2
    while p * p <= n and p < 2000:
        while n % (p * p) == 0:
            n //= p * p
            f *= p
        p += 1
    r = math.isqrt(n)
    if r * r == n:
        return f * r, 1
    return f, n


def _append_level(d: Raw) -> None:
    m = height() + 1
    prev = m - 1
    if type(d) is not _Ext:
        _radicands.append(d)
        _classes.append((d, _mk(m, _F0, _F1), _core(d)))
        return
    q0 = _twist(d, prev)
    entry = None
    if q0 is not None:
        b = _find_root(_mul(q0, d), prev)
        entry = (q0, _mk(m, _F0, _mul(b, _inv(d))), _core(q0))
    _radicands.append(d)
    _irrational_levels.append(m)
    _classes.append(entry)


def _sqrt(x: Raw) -> Raw:
    s = _sign(x)
    if s < 0:
        raise ValueError("square root of a negative tower element")
    if s == 0:
        return _F0
    with _lock:
        r = _find_root(x, height())
        if r is None:
            if height() >= MAX_HEIGHT:
                raise TowerOverflow(f"quadratic tower height cap {MAX_HEIGHT} reached")
            if type(x) is not _Ext:
                f, core = _square_free(x.numerator * x.denominator)
                _append_level(Fraction(core))
                r = _Ext(height(), _F0, Fraction(f, x.denominator))
            else:
                _append_level(x)
                r = _Ext(height(), _F0, _F1)
        if _sign(r) < 0:
            r = _neg(r)
    return r


# -- rendering ------------------------------------------------------------


def _terms(x: Raw, levels: tuple = ()):
    if type(x) is not _Ext:
        return [] if x == 0 else [(levels, x)]
    return _terms(x.a, levels) + _terms(x.b, (x.k,) + levels)


def _radicand_text(k: int) -> str:
    return _render(_radicands[k])


def _fmt_fraction(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _render(x: Raw) -> str:
    terms = sorted(_terms(x), key=lambda t: (len(t[0]), t[0]))
    if not terms:
        return "0"
    parts = []
    for i, (levels, coef) in enumerate(terms):
        neg = coef < 0
        mag = -coef if neg else coef
        roots = "*".join(f"sqrt({_radicand_text(k)})" for k in levels)
        if not roots:
            body = _fmt_fraction(mag)
        elif mag == 1:
            body = roots
        elif mag.denominator == 1:
            body = f"{mag.numerator}*{roots}"
        elif mag.numerator == 1:
            body = f"{roots}/{mag.denominator}"
        else:
            body = f"{mag.numerator}*{roots}/{mag.denominator}"
        if i == 0:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append((" - " if neg else " + ") + body)
    return "".join(parts)


# -- enclosures -------------------------------------------------------------


def _floor_div_pow2(q: Fraction, p: int) -> Fraction:
    return Fraction((q.numerator << p) // q.denominator, 1 << p)


def _ceil_div_pow2(q: Fraction, p: int) -> Fraction:
    return Fraction(-((-q.numerator << p) // q.denominator), 1 << p)


def _isqrt_floor(q: Fraction, p: int) -> Fraction:
    # floor(sqrt(q) * 2^p) / 2^p
    if q <= 0:
        return _F0
    n = (q.numerator << (2 * p)) // q.denominator
    return Fraction(math.isqrt(n), 1 << p)


def _isqrt_ceil(q: Fraction, p: int) -> Fraction:
    if q <= 0:
        return _F0
    num = q.numerator << (2 * p)
    n = -(-num // q.denominator)
    r = math.isqrt(n)
    if r * r < n:
        r += 1
    return Fraction(r, 1 << p)


def _enclose(x: Raw, p: int):
    """Rational (lo, hi) containing x; nested as p grows."""
    if type(x) is not _Ext:
        return x, x
    alo, ahi = _enclose(x.a, p)
    blo, bhi = _enclose(x.b, p)
    dlo, dhi = _enclose(_radicands[x.k], p)
    slo, shi = _isqrt_floor(dlo, p), _isqrt_ceil(dhi, p)
    prods = (blo * slo, blo * shi, bhi * slo, bhi * shi)
    lo = _floor_div_pow2(alo + min(prods), p)
    hi = _ceil_div_pow2(ahi + max(prods), p)
    return lo, hi


# -- public wrapper -------------------------------------------------------------


class QT:
    """An exact element of the quadratic tower."""

    __slots__ = ("raw",)

    def __init__(self, value=0):
        if isinstance(value, QT):
            value = value.raw
        elif isinstance(value, (int, Fraction)):
            value = Fraction(value)
        elif not isinstance(value, _Ext):
            raise TypeError(f"cannot build a tower element from {type(value).__name__}")
        object.__setattr__(self, "raw", value)

    def __setattr__(self, name, value):
        raise AttributeError("QT is immutable")

    @staticmethod
    def _coerce(other):
        if isinstance(other, QT):
            return other.raw
        if isinstance(other, (int, Fraction)):
            return Fraction(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else QT(_add(self.raw, o))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else QT(_sub(self.raw, o))

    def __rsub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else QT(_sub(o, self.raw))

    def __mul__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else QT(_mul(self.raw, o))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else QT(_mul(self.raw, _inv(o)))

    def __rtruediv__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else QT(_mul(o, _inv(self.raw)))

    def __neg__(self):
        return QT(_neg(self.raw))

    def __pos__(self):
        return self

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def sqrt(self) -> "QT":
        return QT(_sqrt(self.raw))

    def sign(self) -> int:
        return _sign(self.raw)

    def is_zero(self) -> bool:
        return _is_zero(self.raw)

    def is_rational(self) -> bool:
        return type(self.raw) is not _Ext

    def as_fraction(self) -> Fraction:
        if type(self.raw) is _Ext:
            raise ValueError("irrational tower element")
        return self.raw

    @property
    def level(self) -> int:
        return _lvl(self.raw)

    def cmp(self, other) -> int:
        return QT(_sub(self.raw, self._coerce(other))).sign()

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self.raw == o

    def __hash__(self):
        return hash(self.raw)

    def __lt__(self, other):
        return self.cmp(other) < 0

    def __le__(self, other):
        return self.cmp(other) <= 0

    def __gt__(self, other):
        return self.cmp(other) > 0

    def __ge__(self, other):
        return self.cmp(other) >= 0

    def enclose(self, bits: int):
        """Rational interval around the value at working precision ``bits``."""
        return _enclose(self.raw, bits)

    def __float__(self):
        lo, hi = _enclose(self.raw, 64)
        return float((lo + hi) / 2)

    def floor(self) -> int:
        if type(self.raw) is not _Ext:
            return math.floor(self.raw)
        p = 32
        while True:
            lo, hi = _enclose(self.raw, p)
            if math.floor(lo) == math.floor(hi):
                return math.floor(lo)
            n = math.floor(hi)
            # hi crosses an integer; decide exactly whether x >= n
            return n if self.cmp(n) >= 0 else n - 1

    def ceil(self) -> int:
        return -(-self).floor()

    def to_expr(self) -> str:
        return _render(self.raw)

    def __str__(self):
        return self.to_expr()

    def __repr__(self):
        return f"QT({self.to_expr()!r})"


ZERO = QT(0)
ONE = QT(1)


def sort_key():
    """Key for sorting QT values by magnitude."""
    return cmp_to_key(lambda a, b: a.cmp(b))
