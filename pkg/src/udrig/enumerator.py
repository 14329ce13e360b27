"""Exact enumeration of unit-distance-preserving placements in the plane.

Placements are built by merging rigid clusters.  Every declared unit edge
starts as a cluster with one placement; clusters are merged when two share
two points (alignment) or three share one point pairwise (a triangle of
clusters, solved by a two-circle intersection).  Placing a point from two
placed unit neighbours, the trilateration step, is the triangle merge of the
growing cluster with two edge clusters.  All coordinates are exact tower
elements; equality is decided by normal form, never by tolerance.

A cluster keeps every placement of its labels modulo proper rigid motions, so
mirror images are kept until the final canonical framing quotients them out.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cmp_to_key
from typing import Optional

from .claims import (
    Claim,
    CongruenceClaim,
    DistanceClaim,
    EpsilonClaim,
    Mode,
    Outcome,
    Verdict,
)
from .creal import CReal, Ordering
from .geometry import (
    Configuration,
    PairClass,
    PlacementSolution,
    Provenance,
    classify_pairs,
    distance,
    validate,
)
from .tower import QT, TowerOverflow

log = logging.getLogger(__name__)

_Z = QT(0)
_ONE = QT(1)


class EnumerationError(Exception):
    pass


class NoTrilaterationOrder(EnumerationError):
    """Some point never acquires two placed unit neighbours."""


class ContinuumBranch(EnumerationError):
    """Support images coincide, so a point ranges over a whole circle."""


class PrecisionExhausted(EnumerationError):
    """A branch feasibility test could not be decided."""


class InvalidConfiguration(ValueError):
    def __init__(self, report):
        parts = []
        if report.bad_edges:
            parts.append(f"declared edges not unit: {list(report.bad_edges)}")
        if report.undeclared_units:
            parts.append(f"undeclared unit pairs: {list(report.undeclared_units)}")
        if report.undecided:
            parts.append(f"undecided pairs: {list(report.undecided)}")
        super().__init__("invalid configuration: " + "; ".join(parts))
        self.report = report


class NotPlanar(EnumerationError):
    pass


@dataclass(frozen=True)
class TrilaterationOrder:
    base: tuple
    sequence: tuple
    supports: tuple  # one (label, label) pair per sequenced label


@dataclass(frozen=True)
class Spectrum:
    values: tuple
    complete: bool
    reason: Optional[str] = None
    solution_count: int = 0

    def __contains__(self, value):
        v = CReal.of(value)
        return any(x.compare(v) is Ordering.EQUAL for x in self.values)


@dataclass
class Enumeration:
    solutions: tuple
    base: tuple
    method: str
    stats: dict = field(default_factory=dict)

    def __iter__(self):
        return iter(self.solutions)

    def __len__(self):
        return len(self.solutions)


# -- vector helpers on exact coordinates ---------------------------------------------


def _sub(p, q):
    return (p[0] - q[0], p[1] - q[1])


def _dot(p, q):
    return p[0] * q[0] + p[1] * q[1]


def _d2(p, q):
    d = _sub(p, q)
    return _dot(d, d)


class _Continuum(Exception):
    pass


def circle_intersections(p, rp2: QT, q, rq2: QT):
    """Points at squared distance rp2 from p and rq2 from q.

    The first point returned lies to the left of the direction p -> q.
    Raises _Continuum when the circles coincide and have positive radius.
    """
    e = _sub(q, p)
    D = _dot(e, e)
    if D.is_zero():
        if rp2 == rq2:
            if rp2.is_zero():
                return [p]
            raise _Continuum()
        return []
    t = (D + rp2 - rq2) / (D * 2)
    h2 = rp2 / D - t * t
    s = h2.sign()
    m = (p[0] + t * e[0], p[1] + t * e[1])
    if s < 0:
        return []
    if s == 0:
        return [m]
    h = h2.sqrt()
    return [
        (m[0] - h * e[1], m[1] + h * e[0]),
        (m[0] + h * e[1], m[1] - h * e[0]),
    ]


def _align(pl: dict, P: str, Q: str, tP, tQ) -> dict:
    """Rigidly move placement ``pl`` so that P lands on tP and Q on tQ."""
    u = _sub(pl[Q], pl[P])
    v = _sub(tQ, tP)
    r2 = _dot(u, u)
    if r2 != _dot(v, v):
        return None
    if r2.is_zero():
        base = pl[P]
        if any(xy != base for xy in pl.values()):
            raise _Continuum()
        return {lab: tP for lab in pl}
    cos = _dot(u, v) / r2
    sin = (u[0] * v[1] - u[1] * v[0]) / r2
    oP = pl[P]
    out = {}
    for lab, xy in pl.items():
        dx, dy = xy[0] - oP[0], xy[1] - oP[1]
        out[lab] = (tP[0] + cos * dx - sin * dy, tP[1] + sin * dx + cos * dy)
    return out


# -- clusters ------------------------------------------------------------------------


class _Cluster:
    __slots__ = ("cid", "labels", "placements", "paths")

    def __init__(self, cid, labels, placements, paths):
        self.cid = cid
        self.labels = frozenset(labels)
        self.placements = placements
        self.paths = paths


class _Engine:
    def __init__(self, c: Configuration):
        self.c = c
        self.next_id = 0
        self.stats = {"merges": 0, "candidates": 0, "edge_pruned": 0, "duplicates": 0, "continuum_skips": 0}

    def edge_cluster(self, u, v):
        cl = _Cluster(self.next_id, (u, v), [{u: (_Z, _Z), v: (_ONE, _Z)}], [()])
        self.next_id += 1
        return cl

    def _edges_between(self, groups):
        """Declared edges joining labels of different input clusters."""
        labs = frozenset().union(*groups)
        out = []
        for u, v in self.c.unit_edges:
            if u in labs and v in labs and not any(u in g and v in g for g in groups):
                out.append((u, v))
        return out

    def _finish(self, labels, items):
        merged = _Cluster(self.next_id, labels, [], [])
        self.next_id += 1
        seen = set()
        order = self.c.index
        for pl, path in items:
            key = tuple((lab, pl[lab]) for lab in sorted(pl, key=order.__getitem__))
            if key in seen:
                self.stats["duplicates"] += 1
                continue
            seen.add(key)
            merged.placements.append(pl)
            merged.paths.append(path)
        self.stats["merges"] += 1
        return merged

    def _edges_ok(self, pl, checks):
        for u, v in checks:
            if _d2(pl[u], pl[v]) != _ONE:
                self.stats["edge_pruned"] += 1
                return False
        return True

    def glue2(self, a: _Cluster, b: _Cluster):
        shared = sorted(a.labels & b.labels, key=self.c.index.__getitem__)
        checks = self._edges_between([a.labels, b.labels])
        items = []
        for pa, patha in zip(a.placements, a.paths):
            pair = None
            for i in range(len(shared)):
                for j in range(i + 1, len(shared)):
                    if not _d2(pa[shared[i]], pa[shared[j]]).is_zero():
                        pair = (shared[i], shared[j])
                        break
                if pair:
                    break
            for pb, pathb in zip(b.placements, b.paths):
                self.stats["candidates"] += 1
                if pair is None:
                    P = shared[0]
                    Q = shared[1]
                else:
                    P, Q = pair
                moved = _align(pb, P, Q, pa[P], pa[Q])
                if moved is None:
                    continue
                if any(moved[s] != pa[s] for s in shared):
                    continue
                pl = dict(pa)
                pl.update(moved)
                if self._edges_ok(pl, checks):
                    items.append((pl, patha + pathb))
        return self._finish(a.labels | b.labels, items)

    def glue3(self, a: _Cluster, b: _Cluster, cc: _Cluster, P: str, Q: str, R: str, tag: str = ""):
        """a holds P and Q, b holds Q and R, cc holds R and P."""
        checks = self._edges_between([a.labels, b.labels, cc.labels])
        items = []
        for pa, patha in zip(a.placements, a.paths):
            for pb, pathb in zip(b.placements, b.paths):
                rQR = _d2(pb[Q], pb[R])
                for pc, pathc in zip(cc.placements, cc.paths):
                    rRP = _d2(pc[R], pc[P])
                    spots = circle_intersections(pa[P], rRP, pa[Q], rQR)
                    for k, spot in enumerate(spots):
                        self.stats["candidates"] += 1
                        mb = _align(pb, Q, R, pa[Q], spot)
                        mc = _align(pc, R, P, spot, pa[P])
                        if mb is None or mc is None:
                            continue
                        pl = dict(pa)
                        if any(pl.get(lab, xy) != xy for lab, xy in mb.items()):
                            continue
                        pl.update(mb)
                        if any(pl.get(lab, xy) != xy for lab, xy in mc.items()):
                            continue
                        pl.update(mc)
                        if self._edges_ok(pl, checks):
                            step = f"{tag or R}:{'+-'[k] if len(spots) == 2 else '0'}"
                            items.append((pl, patha + pathb + pathc + (step,)))
        return self._finish(a.labels | b.labels | cc.labels, items)


def _canonical_raw(pl: dict, base, order) -> dict:
    p0, p1 = pl[base[0]], pl[base[1]]
    e = _sub(p1, p0)
    r2 = _dot(e, e)
    r = r2 if r2 == _ONE else r2.sqrt()
    cos, sin = e[0] / r, e[1] / r
    out = {}
    for lab in order:
        dx, dy = pl[lab][0] - p0[0], pl[lab][1] - p0[1]
        out[lab] = (cos * dx + sin * dy, cos * dy - sin * dx)
    for lab in order:
        s = out[lab][1].sign()
        if s:
            if s < 0:
                out = {k: (x, -y) for k, (x, y) in out.items()}
            break
    return out


def _cmp_qt(a: QT, b: QT) -> int:
    return a.cmp(b)


def _solution_key(order):
    def cmp(s, t):
        for lab in order:
            for i in (0, 1):
                r = s[0][lab][i].cmp(t[0][lab][i])
                if r:
                    return r
        return 0

    return cmp_to_key(cmp)


def _finalize(c: Configuration, cluster: _Cluster, base, method, stats) -> Enumeration:
    order = c.labels
    seen = {}
    for pl, path in zip(cluster.placements, cluster.paths):
        canon = _canonical_raw(pl, base, order)
        key = tuple(canon[lab] for lab in order)
        if key not in seen:
            seen[key] = (canon, path)
    ranked = sorted(seen.values(), key=_solution_key(order))
    sols = tuple(
        PlacementSolution(
            {lab: (CReal(exact=canon[lab][0]), CReal(exact=canon[lab][1])) for lab in order},
            Provenance.EXACT,
            tuple(path),
        )
        for canon, path in ranked
    )
    stats = dict(stats)
    stats["raw_placements"] = len(cluster.placements)
    stats["solutions"] = len(sols)
    return Enumeration(sols, tuple(base), method, stats)


def _require_valid(c: Configuration) -> Configuration:
    c = classify_pairs(c)
    report = validate(c)
    if not report.valid:
        raise InvalidConfiguration(report)
    return c


def _require_planar(c: Configuration):
    if c.dimension != 2:
        raise NotPlanar(f"exact enumeration is defined for dimension 2, got {c.dimension}")


def default_base(c: Configuration) -> tuple:
    if not c.unit_edges:
        raise NoTrilaterationOrder("configuration has no unit edges")
    return c.unit_edges[0]


def find_order(c: Configuration, base: Optional[tuple] = None) -> TrilaterationOrder:
    """Greedy trilateration order from a declared base edge.

    Repeatedly appends the first unplaced point (configuration order) with at
    least two placed unit neighbours; its first two placed neighbours are its
    supports.
    """
    if base is None:
        base = default_base(c)
    u, v = base
    c.require(u, v)
    if not c.has_edge(u, v):
        raise NoTrilaterationOrder(f"base {u!r}-{v!r} is not a declared unit edge")
    placed = [u, v]
    placed_set = {u, v}
    seq, sup = [], []
    nb = c.neighbors
    progress = True
    while progress and len(placed) < len(c.points):
        progress = False
        for p in c.points:
            lab = p.label
            if lab in placed_set:
                continue
            support = [w for w in nb[lab] if w in placed_set]
            if len(support) >= 2:
                seq.append(lab)
                sup.append((support[0], support[1]))
                placed.append(lab)
                placed_set.add(lab)
                progress = True
                break
    if len(placed) < len(c.points):
        stuck = [p.label for p in c.points if p.label not in placed_set]
        raise NoTrilaterationOrder(f"points {stuck} never acquire two placed unit neighbours")
    return TrilaterationOrder((u, v), tuple(seq), tuple(sup))


def _run_order(c: Configuration, order: TrilaterationOrder) -> Enumeration:
    eng = _Engine(c)
    main = eng.edge_cluster(*order.base)
    for lab, (s1, s2) in zip(order.sequence, order.supports):
        try:
            main = eng.glue3(main, eng.edge_cluster(s1, lab), eng.edge_cluster(lab, s2), s2, s1, lab)
        except _Continuum:
            raise ContinuumBranch(f"supports {s1!r} and {s2!r} of {lab!r} coincide in some branch") from None
    return _finalize(c, main, order.base, "trilateration", eng.stats)


def _triples(clusters: dict, by_label: dict):
    seen = set()
    out = []
    for R in sorted(by_label):
        ids = sorted(by_label[R])
        for i in range(len(ids)):
            for j in range(i + 1, len(ids)):
                b, cc = clusters[ids[i]], clusters[ids[j]]
                if len(b.labels & cc.labels) != 1:
                    continue
                for Q in sorted(b.labels - {R}):
                    for P in sorted(cc.labels - {R}):
                        if P == Q:
                            continue
                        for aid in sorted(by_label[Q] & by_label[P]):
                            if aid in (b.cid, cc.cid):
                                continue
                            a = clusters[aid]
                            if a.labels & b.labels != {Q} or a.labels & cc.labels != {P}:
                                continue
                            key = frozenset((aid, b.cid, cc.cid))
                            if key in seen:
                                continue
                            seen.add(key)
                            size = len(a.labels) + len(b.labels) + len(cc.labels)
                            out.append((size, tuple(sorted(key)), a, b, cc, P, Q, R))
    out.sort(key=lambda t: (t[0], t[1]))
    return out


def _run_clusters(c: Configuration) -> Enumeration:
    eng = _Engine(c)
    clusters = {}
    by_label = {p.label: set() for p in c.points}

    def add(cl):
        clusters[cl.cid] = cl
        for lab in cl.labels:
            by_label[lab].add(cl.cid)

    def drop(cl):
        del clusters[cl.cid]
        for lab in cl.labels:
            by_label[lab].discard(cl.cid)

    for u, v in c.unit_edges:
        add(eng.edge_cluster(u, v))
    isolated = [lab for lab, ids in by_label.items() if not ids]
    if isolated:
        raise NoTrilaterationOrder(f"points {isolated} have no unit edges")
    blocked = set()
    while len(clusters) > 1:
        merged = False
        # alignment merges only filter, so they go first
        ids = sorted(clusters)
        for i in ids:
            a = clusters[i]
            partners = {}
            for lab in a.labels:
                for j in by_label[lab]:
                    if j > i:
                        partners[j] = partners.get(j, 0) + 1
            for j in sorted(partners):
                if partners[j] >= 2:
                    key = (i, j)
                    if key in blocked:
                        continue
                    b = clusters[j]
                    try:
                        m = eng.glue2(a, b)
                    except _Continuum:
                        blocked.add(key)
                        eng.stats["continuum_skips"] += 1
                        continue
                    drop(a)
                    drop(b)
                    add(m)
                    merged = True
                    break
            if merged:
                break
        if merged:
            continue
        for _, key, a, b, cc, P, Q, R in _triples(clusters, by_label):
            if key in blocked:
                continue
            try:
                m = eng.glue3(a, b, cc, P, Q, R)
            except _Continuum:
                blocked.add(key)
                eng.stats["continuum_skips"] += 1
                continue
            drop(a)
            drop(b)
            drop(cc)
            add(m)
            merged = True
            break
        if not merged:
            if blocked:
                raise ContinuumBranch("remaining merges all meet coincident supports")
            raise NoTrilaterationOrder(f"{len(clusters)} rigid clusters cannot be merged")
    (final,) = clusters.values()
    return _finalize(c, final, default_base(c), "clusters", eng.stats)


def enumerate_placements(
    c: Configuration,
    order: Optional[TrilaterationOrder] = None,
    *,
    check: bool = True,
) -> Enumeration:
    """All unit-distance-preserving placements of ``c`` modulo isometry.

    With an explicit ``order`` the trilateration order is followed strictly;
    otherwise rigid clusters are merged in a fixed, size-first order that
    steps around coincident supports when another merge is available.
    """
    _require_planar(c)
    if check:
        c = _require_valid(c)
    try:
        if order is not None:
            return _run_order(c, order)
        return _run_clusters(c)
    except TowerOverflow as exc:
        raise PrecisionExhausted(str(exc)) from None


# -- spectra and verdicts --------------------------------------------------------------


def _dedupe_values(values) -> tuple:
    out = []
    for v in values:
        if not any(v.exact == w.exact for w in out):
            out.append(v)
    out.sort(key=cmp_to_key(lambda a, b: a.exact.cmp(b.exact)))
    return tuple(out)


def try_enumerate(c: Configuration):
    """(Enumeration, None) on success, (None, reason) when enumeration cannot close."""
    try:
        return enumerate_placements(c), None
    except (NoTrilaterationOrder, ContinuumBranch, PrecisionExhausted, NotPlanar) as exc:
        return None, f"{type(exc).__name__}: {exc}"


def spectrum(c: Configuration, x: str, y: str, enumeration: Optional[Enumeration] = None) -> Spectrum:
    """Achievable image distances d(f X, f Y) over all placements."""
    c.require(x, y)
    if enumeration is None:
        enumeration, reason = try_enumerate(c)
        if enumeration is None:
            return Spectrum((), False, reason)
    vals = [distance(s[x], s[y]) for s in enumeration]
    return Spectrum(_dedupe_values(vals), True, None, len(enumeration))


def weak_filter(c: Configuration, solutions) -> list:
    """Keep injective placements that map no non-unit pair to distance 1."""
    c = classify_pairs(c)
    nonunit = [pair for pair, cls in c.pair_table.items() if cls is PairClass.NON_UNIT]
    labels = c.labels
    kept = []
    for s in solutions:
        pts = [(s[lab][0].exact, s[lab][1].exact) for lab in labels]
        if len(set(pts)) != len(pts):
            continue
        if any(_d2((s[u][0].exact, s[u][1].exact), (s[v][0].exact, s[v][1].exact)) == _ONE for u, v in nonunit):
            continue
        kept.append(s)
    return kept


def claim_deviation(c: Configuration, claim: Claim, s: PlacementSolution) -> Ordering:
    """GREATER when placement ``s`` violates the claim, EQUAL/LESS when it
    satisfies it, UNDECIDED when that cannot be certified."""
    if isinstance(claim, DistanceClaim):
        target = distance(c.point(claim.x), c.point(claim.y))
        got = distance(s[claim.x], s[claim.y])
        o = got.compare(target)
        if o is Ordering.UNDECIDED:
            return o
        return Ordering.EQUAL if o is Ordering.EQUAL else Ordering.GREATER
    if isinstance(claim, CongruenceClaim):
        a = distance(s[claim.k], s[claim.l])
        b = distance(s[claim.m], s[claim.n])
        o = a.compare(b)
        if o is Ordering.UNDECIDED:
            return o
        return Ordering.EQUAL if o is Ordering.EQUAL else Ordering.GREATER
    target = distance(c.point(claim.x), c.point(claim.y))
    got = distance(s[claim.x], s[claim.y])
    return abs(got - target).compare(claim.eps)


def linkage_proves_epsilon(c: Configuration, claim: EpsilonClaim) -> bool:
    """Every image distance lies in [0, k] for a k-link path; prove the claim
    when that whole range sits inside the epsilon band."""
    from .refuter import DisconnectedLabels, linkage_bound

    try:
        k = linkage_bound(c, claim.x, claim.y)
    except DisconnectedLabels:
        return False
    d = distance(c.point(claim.x), c.point(claim.y))
    lo_ok = d.compare(claim.eps) in (Ordering.LESS, Ordering.EQUAL)
    hi_ok = (k - d).compare(claim.eps) in (Ordering.LESS, Ordering.EQUAL)
    return lo_ok and hi_ok


def verify(c: Configuration, claim: Claim, refuter_params=None, use_refuter: bool = True) -> Verdict:
    """Three-valued verdict for ``claim`` on ``c``.

    Strong mode quantifies over all enumerated placements; weak mode first
    drops non-injective placements and those sending a non-unit pair to
    distance 1.  When enumeration cannot close, epsilon claims may still be
    proven by the linkage bound, and the refuter looks for a certified
    counterexample.
    """
    c.require(*claim.labels)
    c = _require_valid(c)
    enum_, reason = try_enumerate(c)
    if enum_ is not None:
        sols = list(enum_)
        if claim.mode is Mode.WEAK:
            sols = weak_filter(c, sols)
        undecided = False
        for s in sols:
            o = claim_deviation(c, claim, s)
            if o is Ordering.GREATER:
                return Verdict(
                    Outcome.REFUTED,
                    witness=s,
                    details={"solutions": len(enum_), "considered": len(sols), "stats": enum_.stats},
                )
            if o is Ordering.UNDECIDED:
                undecided = True
        details = {"solutions": len(enum_), "considered": len(sols), "stats": enum_.stats}
        if undecided:
            return Verdict(Outcome.UNDECIDED, reason="comparison undecided within precision budget", details=details)
        return Verdict(Outcome.PROVEN, details=details)
    if isinstance(claim, EpsilonClaim) and claim.mode is Mode.STRONG and linkage_proves_epsilon(c, claim):
        return Verdict(Outcome.PROVEN, reason="linkage bound", details={"enumeration": reason})
    if not use_refuter:
        return Verdict(Outcome.UNDECIDED, reason=reason)
    from .refuter import RefuterParams, refute

    v = refute(c, claim, refuter_params or RefuterParams())
    if v.outcome is Outcome.REFUTED:
        return Verdict(Outcome.REFUTED, v.witness, v.reason, {"enumeration": reason, **v.details})
    return Verdict(Outcome.UNDECIDED, v.witness, f"{reason}; refuter: {v.reason}", {"enumeration": reason, **v.details})
