"""Upgrade weak witnesses to strong candidates by adjoining epsilon-witness
kits for every pair of points."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Protocol

from .claims import EpsilonClaim
from .creal import CReal, Ordering
from .enumerator import verify
from .geometry import Configuration, distance, merge
from .gadgets import GadgetError, build_epsilon_witness


class StrengthenError(RuntimeError):
    """A required kit could not be built; nothing is returned."""


class TBuilder(Protocol):
    def __call__(self, c: Configuration, p: str, q: str, eps: CReal) -> Configuration: ...


def epsilon_witness_builder(c: Configuration, p: str, q: str, eps: CReal) -> Configuration:
    """Default kit builder: the gadget cascade on the two-point set {p, q}."""
    return build_epsilon_witness(_pair_config(c, p, q), p, q, eps)


@dataclass
class RecordingTBuilder:
    """Stub builder that records each call and returns just {p, q}."""

    calls: list = field(default_factory=list)

    def __call__(self, c: Configuration, p: str, q: str, eps: CReal) -> Configuration:
        self.calls.append((p, q, eps))
        return _pair_config(c, p, q)


def _pair_config(c: Configuration, p: str, q: str) -> Configuration:
    a, b = c.point(p), c.point(q)
    edges = ((p, q),) if c.has_edge(p, q) else ()
    return Configuration((a, b), edges, c.dimension)


@dataclass(frozen=True)
class Kit:
    kind: str  # "distinct" or "non-unit"
    pair: tuple
    eps: CReal
    points: int


@dataclass
class Strengthened:
    config: Configuration
    kits: list

    def manifest(self) -> list:
        return [
            {"kind": k.kind, "pair": list(k.pair), "eps": k.eps.to_string(), "points": k.points}
            for k in self.kits
        ]


def _checked(c: Configuration, p: str, q: str, eps: CReal, t: Callable) -> Configuration:
    try:
        kit = t(c, p, q, eps)
    except GadgetError as exc:
        raise StrengthenError(f"kit for {p}-{q} with eps {eps.to_string()}: {exc}") from exc
    for lab in (p, q):
        if lab not in kit.index or kit.point(lab).coords != c.point(lab).coords:
            raise StrengthenError(f"kit for {p}-{q} moved or dropped {lab!r}")
    return kit


def distinctness_kit(c: Configuration, p: str, q: str, t: Callable = epsilon_witness_builder) -> Configuration:
    """Kit with eps = d(p, q)/2, so that images of p and q stay apart."""
    d = distance(c.point(p), c.point(q))
    if d.sign() is not Ordering.GREATER:
        raise StrengthenError(f"{p!r} and {q!r} are not certified distinct")
    return _checked(c, p, q, d / 2, t)


def non_unit_kit(c: Configuration, p: str, q: str, t: Callable = epsilon_witness_builder) -> Configuration:
    """Kit with eps = |d(p, q) - 1|/2, so that the image pair is never unit."""
    d = distance(c.point(p), c.point(q))
    o = d.compare(1)
    if o is Ordering.EQUAL:
        raise StrengthenError(f"{p!r}-{q!r} is a unit pair")
    if o is Ordering.UNDECIDED:
        raise StrengthenError(f"cannot decide whether {p!r}-{q!r} is a unit pair")
    return _checked(c, p, q, abs(d - 1) / 2, t)


def _census(c: Configuration):
    """Kits required over unordered pairs, in configuration order: every
    distinct pair gets a distinctness kit, every certified non-unit pair a
    non-unit kit."""
    out = []
    for a, b in combinations(c.points, 2):
        d = distance(a, b)
        if d.sign() is not Ordering.GREATER:
            raise StrengthenError(f"{a.label!r} and {b.label!r} coincide")
        out.append(("distinct", a.label, b.label, d / 2))
    for a, b in combinations(c.points, 2):
        d = distance(a, b)
        o = d.compare(1)
        if o is Ordering.UNDECIDED:
            raise StrengthenError(f"cannot decide whether {a.label!r}-{b.label!r} is a unit pair")
        if o is not Ordering.EQUAL:
            out.append(("non-unit", a.label, b.label, abs(d - 1) / 2))
    return out


def _strengthen(c: Configuration, labels, t: Callable) -> Strengthened:
    c.require(*labels)
    merged = c
    kits = []
    for kind, p, q, eps in _census(c):
        kit = _checked(c, p, q, eps, t)
        merged, _ = merge(merged, kit, prefix=f"{p}{q}.")
        kits.append(Kit(kind, (p, q), eps, len(kit.points)))
    return Strengthened(merged, kits)


def strengthen_star(s: Configuration, x: str, y: str, t: Callable = epsilon_witness_builder) -> Strengthened:
    """Union of ``s`` with all pair kits; a candidate strong witness for (x, y)."""
    return _strengthen(s, (x, y), t)


def strengthen_diamond(
    c: Configuration, k: str, l: str, m: str, n: str, t: Callable = epsilon_witness_builder
) -> Strengthened:
    """Same union for a congruence witness on segments k-l and m-n."""
    return _strengthen(c, (k, l, m, n), t)


def kit_holds(kit: Configuration, p: str, q: str, eps) -> bool:
    return verify(kit, EpsilonClaim(p, q, eps), use_refuter=False).proven
