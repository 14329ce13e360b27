"""Constructive gadgets: triangles, rhombi, chains, spindles, the
constructible closure, and searches for witness configurations."""

from __future__ import annotations

import enum
import heapq
import json
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from math import ceil
from typing import Optional

from .claims import DistanceClaim, EpsilonClaim
from .creal import CReal, Ordering
from .enumerator import _align, _d2, circle_intersections, spectrum, verify
from .geometry import Configuration, GeometryError, Point, declare_unit_pairs, distance, merge
from .io import config_from_dict
from .tower import QT

log = logging.getLogger(__name__)


class GadgetError(ValueError):
    pass


class ClosureBudgetExceeded(GadgetError):
    pass


class NoVerifiedConstruction(GadgetError):
    """No construction in the cascade could be verified."""


class Side(enum.Enum):
    UP = "up"
    DOWN = "down"


class Kind(enum.Enum):
    TRIANGLE = "triangle"
    RHOMBUS = "rhombus"
    CHAIN = "chain"
    SPINDLE = "spindle"
    CUSTOM = "custom"


@dataclass(frozen=True)
class GadgetRecipe:
    kind: Kind
    parameters: dict = field(default_factory=dict)
    provenance: str = ""

    def apply(self, c: Configuration) -> Configuration:
        p = self.parameters
        if self.kind is Kind.TRIANGLE:
            return attach_triangle(c, p["P"], p["Q"], Side(p.get("side", "up")), p.get("label"))
        if self.kind is Kind.RHOMBUS:
            return attach_rhombus(c, p["B"], p["D"], tuple(p.get("labels", ("A", "C"))))
        if self.kind is Kind.CHAIN:
            return build_chain(c, p["X"], p["Y"], int(p["k"]), p.get("prefix", "z"))
        if self.kind is Kind.SPINDLE:
            return build_spindle(c, p["X"], p["Y"], p.get("prefix", ""))
        raise GadgetError(f"recipe kind {self.kind.value} has no builder")


# -- helpers -------------------------------------------------------------------------


def _exact_xy(c: Configuration, label: str):
    p = c.point(label)
    if c.dimension != 2:
        raise GadgetError("gadget builders work in the plane")
    if not p.is_exact:
        raise GadgetError(f"point {label!r} needs exact coordinates")
    return (p.coords[0].exact, p.coords[1].exact)


def _fresh(c: Configuration, wanted: str) -> str:
    if wanted not in c.index:
        return wanted
    n = 2
    while f"{wanted}{n}" in c.index:
        n += 1
    return f"{wanted}{n}"


def _add_point(c: Configuration, label: str, xy, joined) -> tuple:
    """Add a point (or reuse an identical one) joined by unit edges to ``joined``."""
    for p in c.points:
        if p.is_exact and (p.coords[0].exact, p.coords[1].exact) == tuple(xy):
            edges = [(p.label, j) for j in joined if j != p.label]
            return declare_unit_pairs(c.with_points((), edges)), p.label
    label = _fresh(c, label)
    new = Point(label, (CReal(exact=xy[0]), CReal(exact=xy[1])))
    return declare_unit_pairs(c.with_points([new], [(label, j) for j in joined])), label


def _squared(c, P, Q):
    return _d2(_exact_xy(c, P), _exact_xy(c, Q))


# -- builders --------------------------------------------------------------------------


def attach_triangle(c: Configuration, P: str, Q: str, side: Side = Side.UP, label: Optional[str] = None) -> Configuration:
    """Add the apex at unit distance from P and Q on the chosen side of P -> Q."""
    if P == Q:
        raise GadgetError("attach_triangle needs two distinct points")
    p, q = _exact_xy(c, P), _exact_xy(c, Q)
    d2 = _d2(p, q)
    if d2.is_zero():
        raise GadgetError(f"{P!r} and {Q!r} coincide")
    if d2 > 4:
        raise GadgetError(f"d({P},{Q}) > 2: no apex at unit distance from both")
    spots = circle_intersections(p, QT(1), q, QT(1))
    spot = spots[0] if side is Side.UP or len(spots) == 1 else spots[1]
    c, _ = _add_point(c, label or f"{P}{Q}{'^' if side is Side.UP else 'v'}", spot, (P, Q))
    return c


def attach_rhombus(c: Configuration, B: str, D: str, labels: tuple = ("A", "C")) -> Configuration:
    """Add both apexes over the unit pair B-D; their distance is sqrt(3)."""
    if B == D or _squared(c, B, D) != 1:
        raise GadgetError(f"{B!r}-{D!r} is not a unit pair")
    if not c.has_edge(B, D):
        c = c.with_points((), [(B, D)])
    c = attach_triangle(c, B, D, Side.UP, labels[0])
    return attach_triangle(c, B, D, Side.DOWN, labels[1])


def build_chain(c: Configuration, X: str, Y: str, k: int, prefix: str = "z") -> Configuration:
    """Join X to Y by k unit links through k-1 new points.

    Even k gives a symmetric zig-zag with equal steps along X -> Y; odd k
    zig-zags to a point one unit short of Y and finishes with a straight link.
    """
    if k < 1:
        raise GadgetError("chains need k >= 1")
    x, y = _exact_xy(c, X), _exact_xy(c, Y)
    D2 = _d2(x, y)
    if D2.is_zero():
        raise GadgetError(f"{X!r} and {Y!r} coincide")
    if D2 > k * k:
        raise GadgetError(f"d({X},{Y}) exceeds the chain length {k}")
    if k == 1:
        if D2 != 1:
            raise GadgetError(f"d({X},{Y}) is not 1")
        return c if c.has_edge(X, Y) else declare_unit_pairs(c.with_points((), [(X, Y)]))
    D = D2.sqrt()
    u = ((y[0] - x[0]) / D, (y[1] - x[1]) / D)
    if k % 2 == 0:
        end, links = y, k
    elif D == 1:
        # the straight remainder would collapse the zig-zag; end on an apex instead
        end = circle_intersections(x, QT(1), y, QT(1))[0]
        links = k - 1
    else:
        end, links = (y[0] - u[0], y[1] - u[1]), k - 1
    pts = _zigzag(x, end, links)
    labels = [X]
    for i, xy in enumerate(pts[1:-1], start=1):
        c, lab = _add_point(c, f"{prefix}{i}", xy, (labels[-1],))
        labels.append(lab)
    if links == k:
        c = declare_unit_pairs(c.with_points((), [(labels[-1], Y)]))
    else:
        c, lab = _add_point(c, f"{prefix}{links}", end, (labels[-1], Y))
    return c


def _zigzag(a, b, links: int):
    e = (b[0] - a[0], b[1] - a[1])
    L2 = e[0] * e[0] + e[1] * e[1]
    L = L2.sqrt()
    s = L / links
    h = (1 - s * s).sqrt()
    u = (e[0] / L, e[1] / L)
    n = (-u[1], u[0])
    out = []
    for i in range(links + 1):
        off = h if i % 2 else QT(0)
        out.append((a[0] + u[0] * s * i + n[0] * off, a[1] + u[1] * s * i + n[1] * off))
    return out


def build_spindle(c: Configuration, X: str, Y: str, prefix: str = "") -> Configuration:
    """Moser spindle with tips X and Y, which must be sqrt(3) apart.

    Adds the rhombus apexes A1, B1 over X-Y, the second far tip T2 (Y turned
    about X so that d(Y, T2) = 1) and the apexes A2, B2 over X-T2.
    """
    x, y = _exact_xy(c, X), _exact_xy(c, Y)
    if _d2(x, y) != 3:
        raise GadgetError(f"spindle tips {X!r}, {Y!r} must be sqrt(3) apart")
    cos, sin = QT(5) / 6, QT(11).sqrt() / 6
    dx, dy = y[0] - x[0], y[1] - x[1]
    t2 = (x[0] + cos * dx - sin * dy, x[1] + sin * dx + cos * dy)
    a1, b1 = circle_intersections(x, QT(1), y, QT(1))
    a2, b2 = circle_intersections(x, QT(1), t2, QT(1))
    c, A1 = _add_point(c, prefix + "A1", a1, (X, Y))
    c, B1 = _add_point(c, prefix + "B1", b1, (X, Y, A1))
    c, T2 = _add_point(c, prefix + "T2", t2, (Y,))
    c, A2 = _add_point(c, prefix + "A2", a2, (X, T2))
    c, B2 = _add_point(c, prefix + "B2", b2, (X, T2, A2))
    return c


# -- catalog -----------------------------------------------------------------------------


def catalog_names() -> list:
    root = resources.files("udrig") / "data" / "gadgets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json") and not p.name.endswith(".spectrum.json"))


def load_gadget(name: str) -> Configuration:
    root = resources.files("udrig") / "data" / "gadgets"
    return config_from_dict(json.loads((root / f"{name}.json").read_text(encoding="utf-8")))


def load_expected(name: str) -> dict:
    root = resources.files("udrig") / "data" / "gadgets"
    return json.loads((root / f"{name}.spectrum.json").read_text(encoding="utf-8"))


def catalog_builders() -> dict:
    """Builders that regenerate each catalog file from scratch."""

    def edge():
        return Configuration((Point("X", ("0", "0")), Point("Y", ("1", "0"))), (("X", "Y"),))

    def triangle():
        return attach_triangle(
            Configuration((Point("P", ("0", "0")), Point("Q", ("1", "0"))), (("P", "Q"),)), "P", "Q", Side.UP, "R"
        )

    def rhombus():
        return attach_rhombus(Configuration((Point("B", ("0", "0")), Point("D", ("1", "0"))), (("B", "D"),)), "B", "D")

    def strip():
        c = Configuration((Point("P0", ("0", "0")), Point("P1", ("1", "0"))), (("P0", "P1"),))
        c = attach_triangle(c, "P0", "P1", Side.UP, "P2")
        c = attach_triangle(c, "P2", "P1", Side.UP, "P3")
        return attach_triangle(c, "P3", "P1", Side.UP, "P4")

    def spindle():
        c = Configuration((Point("O", ("0", "0")), Point("T1", ("sqrt(3)", "0"))))
        return build_spindle(c, "O", "T1")

    return {
        "moser_spindle": spindle,
        "rhombus": rhombus,
        "triangle_strip": strip,
        "unit_edge": edge,
        "unit_triangle": triangle,
    }


# -- closure and search -------------------------------------------------------------------


@dataclass(frozen=True)
class Candidate:
    point: Point
    parents: tuple
    depth: int


def constructible_closure(c: Configuration, depth: int, cap: int = 500) -> list:
    """Intersections of unit circles around existing and generated points.

    Layer k only uses pairs involving at least one point from layer k-1, so
    depth d's output is a prefix of depth d+1's.
    """
    if depth < 0:
        raise GadgetError("depth must be >= 0")
    known = {}
    for p in c.points:
        known[_exact_xy(c, p.label)] = p.label
    centers = [(lab, xy) for xy, lab in sorted(known.items(), key=lambda kv: c.index[kv[1]])]
    out = []
    frontier_start = 0
    for level in range(1, depth + 1):
        new_centers = []
        for i in range(len(centers)):
            for j in range(max(i + 1, frontier_start), len(centers)):
                (la, a), (lb, b) = centers[i], centers[j]
                d2 = _d2(a, b)
                if d2.is_zero() or d2 > 4:
                    continue
                for xy in circle_intersections(a, QT(1), b, QT(1)):
                    if xy in known:
                        continue
                    label = f"g{len(out) + 1}"
                    known[xy] = label
                    cand = Candidate(Point(label, (CReal(exact=xy[0]), CReal(exact=xy[1]))), (la, lb), level)
                    out.append(cand)
                    new_centers.append((label, xy))
                    if len(out) > cap:
                        raise ClosureBudgetExceeded(f"more than {cap} closure candidates")
        frontier_start = len(centers)
        centers = centers + new_centers
    return out


@dataclass(frozen=True)
class SearchBudget:
    max_added: int = 2
    max_explored: int = 40
    closure_cap: int = 200

    @classmethod
    def of(cls, budget) -> "SearchBudget":
        if isinstance(budget, SearchBudget):
            return budget
        k = int(budget)
        return cls(max_added=k, max_explored=max(1, 20 * k))


@dataclass
class SearchResult:
    success: bool
    config: Optional[Configuration]
    best_spectrum: object
    best_config: Optional[Configuration]
    explored: int


def _score(sp, target: CReal, eps: Optional[CReal]):
    if not sp.complete:
        return None
    bad = 0
    worst = 0.0
    for v in sp.values:
        dev = abs(v - target)
        if eps is None:
            off = dev.compare(0) is not Ordering.EQUAL
        else:
            off = dev.compare(eps) is Ordering.GREATER
        bad += off
        worst = max(worst, float(dev))
    if eps is None:
        return (len(sp.values), worst)
    return (bad, worst)


def search_witness(
    c: Configuration,
    X: str,
    Y: str,
    budget=SearchBudget(),
    epsilon: Optional[CReal] = None,
) -> SearchResult:
    """Best-first search over closure augmentations for a configuration whose
    (X, Y) spectrum is {d(X, Y)} (or lies within ``epsilon`` of it).

    Each child adds one depth-1 closure candidate with unit edges to its two
    generating points (plus any other unit pairs it creates).  Children are
    ranked by spectrum size, then by largest deviation.
    """
    budget = SearchBudget.of(budget)
    c.require(X, Y)
    target = distance(c.point(X), c.point(Y))
    claim = DistanceClaim(X, Y) if epsilon is None else EpsilonClaim(X, Y, epsilon)

    def succeeded(cfg):
        return verify(cfg, claim, use_refuter=False).proven

    counter = 0
    start = spectrum(c, X, Y)
    heap = [(_score(start, target, epsilon) or (float("inf"), 0.0), counter, c, 0, start)]
    seen = {frozenset(_exact_xy(c, p.label) for p in c.points)}
    best = (heap[0][0], start, c)
    explored = 0
    while heap and explored < budget.max_explored:
        score, _, cfg, added, sp = heapq.heappop(heap)
        explored += 1
        if score < best[0]:
            best = (score, sp, cfg)
        if sp.complete and succeeded(cfg):
            return SearchResult(True, cfg, sp, cfg, explored)
        if added >= budget.max_added:
            continue
        try:
            cands = constructible_closure(cfg, 1, budget.closure_cap)
        except ClosureBudgetExceeded:
            continue
        for cand in cands:
            key = frozenset(_exact_xy(cfg, p.label) for p in cfg.points) | {tuple(x.exact for x in cand.point.coords)}
            if key in seen:
                continue
            seen.add(key)
            label = _fresh(cfg, "w")
            child, _ = _add_point(cfg, label, tuple(x.exact for x in cand.point.coords), cand.parents)
            child_sp = spectrum(child, X, Y)
            sc = _score(child_sp, target, epsilon)
            if sc is None:
                continue
            counter += 1
            heapq.heappush(heap, (sc, counter, child, added + 1, child_sp))
    return SearchResult(False, None, best[1], best[2], explored)


# -- epsilon witnesses -------------------------------------------------------------------


@lru_cache(maxsize=None)
def _catalog_pairs():
    """(gadget name, U, V, squared distance, spectrum) for every catalog pair."""
    out = []
    from .enumerator import try_enumerate

    for name in catalog_names():
        g = load_gadget(name)
        enum_, _ = try_enumerate(g)
        if enum_ is None:
            continue
        for i, p in enumerate(g.points):
            for q in g.points[i + 1:]:
                d2 = _d2(_exact_xy(g, p.label), _exact_xy(g, q.label))
                if d2.is_zero():
                    continue
                out.append((name, p.label, q.label, d2, spectrum(g, p.label, q.label, enum_)))
    return tuple(out)


def transport(g: Configuration, U: str, V: str, c: Configuration, X: str, Y: str, prefix: str = ""):
    """Move gadget ``g`` by a proper rigid motion sending U to X and V to Y,
    then merge it into ``c``.  Returns (merged configuration, label map)."""
    pl = {p.label: _exact_xy(g, p.label) for p in g.points}
    moved = _align(pl, U, V, _exact_xy(c, X), _exact_xy(c, Y))
    if moved is None:
        raise GadgetError("pair distances differ; no rigid motion matches them")
    pts = tuple(Point(lab, (CReal(exact=moved[lab][0]), CReal(exact=moved[lab][1]))) for lab in g.labels)
    return merge(c, Configuration(pts, g.unit_edges), prefix)


def known_witness(c: Configuration, X: str, Y: str, eps: CReal, prefix: str = "k."):
    """Catalog gadget transported onto (X, Y) whose pair spectrum lies within eps."""
    d2 = _d2(_exact_xy(c, X), _exact_xy(c, Y))
    d = CReal(exact=d2.sqrt())
    for name, U, V, gd2, sp in _catalog_pairs():
        if gd2 != d2 or not sp.complete:
            continue
        if all(abs(v - d).compare(eps) in (Ordering.LESS, Ordering.EQUAL) for v in sp.values):
            merged, _ = transport(load_gadget(name), U, V, c, X, Y, prefix)
            if verify(merged, EpsilonClaim(X, Y, eps), use_refuter=False).proven:
                log.debug("known witness %s(%s,%s) used for %s-%s", name, U, V, X, Y)
                return merged, name
    return None, None


def build_epsilon_witness(
    c: Configuration,
    X: str,
    Y: str,
    eps,
    budget=SearchBudget(max_added=1, max_explored=8),
) -> Configuration:
    """A configuration containing ``c`` on which EpsilonClaim(X, Y, eps) is
    Proven, or NoVerifiedConstruction.

    Tries, in order: ``c`` itself, a catalog witness moved onto (X, Y), a
    chain of ceil(d) links when the linkage bound alone suffices, and a
    closure search with the epsilon-relaxed objective.
    """
    eps = CReal.of(eps)
    if eps.sign() is not Ordering.GREATER:
        raise GadgetError("epsilon must be certified positive")
    c.require(X, Y)
    claim = EpsilonClaim(X, Y, eps)
    if verify(c, claim, use_refuter=False).proven:
        return c
    found, _ = known_witness(c, X, Y, eps)
    if found is not None:
        return found
    d = distance(c.point(X), c.point(Y))
    k = max(1, d.exact.ceil()) if d.is_exact else None
    if k is not None and d.compare(eps) is not Ordering.GREATER and (k - d).compare(eps) is not Ordering.GREATER:
        try:
            chained = build_chain(c, X, Y, k, prefix=f"{X}{Y}.z")
        except (GadgetError, GeometryError):
            chained = None
        if chained is not None and verify(chained, claim, use_refuter=False).proven:
            return chained
    res = search_witness(c, X, Y, budget, epsilon=eps)
    if res.success:
        return res.config
    raise NoVerifiedConstruction(f"no verified construction for |d(f {X}, f {Y}) - d| <= {eps.to_string()}")
