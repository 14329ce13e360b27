"""Point configurations, unit-pair classification and canonical framing."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Mapping, Optional, Sequence

from .creal import CReal, Ordering

Pair = tuple  # (label, label), ordered by configuration point order


class GeometryError(ValueError):
    pass


class DimensionMismatch(GeometryError):
    pass


class UnknownLabel(KeyError):
    pass


class CannotFrame(GeometryError):
    pass


class PairClass(enum.Enum):
    UNIT = "unit"
    NON_UNIT = "non-unit"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class Point:
    label: str
    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(CReal.of(c) for c in self.coords))

    @property
    def dimension(self) -> int:
        return len(self.coords)

    @property
    def is_exact(self) -> bool:
        return all(c.is_exact for c in self.coords)


@dataclass(frozen=True)
class Configuration:
    """A finite labelled point set with declared unit edges.

    ``unit_edges`` holds label pairs ordered by point order, deduplicated, in
    declaration order.  ``pair_table`` is filled by :func:`classify_pairs`.
    """

    points: tuple
    unit_edges: tuple = ()
    dimension: int = 2
    pair_table: Optional[Mapping] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        pts = tuple(self.points)
        object.__setattr__(self, "points", pts)
        if self.dimension < 2:
            raise GeometryError(f"dimension must be at least 2, got {self.dimension}")
        seen = set()
        for p in pts:
            if p.label in seen:
                raise GeometryError(f"duplicate point label {p.label!r}")
            seen.add(p.label)
            if p.dimension != self.dimension:
                raise DimensionMismatch(
                    f"point {p.label!r} has {p.dimension} coordinates, expected {self.dimension}"
                )
        order = {p.label: i for i, p in enumerate(pts)}
        edges = []
        eseen = set()
        for u, v in self.unit_edges:
            if u not in order or v not in order:
                missing = u if u not in order else v
                raise UnknownLabel(f"unit edge refers to unknown label {missing!r}")
            if u == v:
                raise GeometryError(f"unit edge joins {u!r} to itself")
            e = (u, v) if order[u] < order[v] else (v, u)
            if e not in eseen:
                eseen.add(e)
                edges.append(e)
        object.__setattr__(self, "unit_edges", tuple(edges))

    @cached_property
    def index(self) -> dict:
        return {p.label: i for i, p in enumerate(self.points)}

    @cached_property
    def labels(self) -> tuple:
        return tuple(p.label for p in self.points)

    @cached_property
    def edge_set(self) -> frozenset:
        return frozenset(self.unit_edges)

    @cached_property
    def neighbors(self) -> dict:
        nb = {p.label: [] for p in self.points}
        for u, v in self.unit_edges:
            nb[u].append(v)
            nb[v].append(u)
        for lab in nb:
            nb[lab].sort(key=self.index.__getitem__)
        return nb

    def point(self, label: str) -> Point:
        try:
            return self.points[self.index[label]]
        except KeyError:
            raise UnknownLabel(f"unknown label {label!r}") from None

    def require(self, *labels: str) -> None:
        for lab in labels:
            if lab not in self.index:
                raise UnknownLabel(f"unknown label {lab!r}")

    def pair(self, u: str, v: str) -> Pair:
        return (u, v) if self.index[u] < self.index[v] else (v, u)

    def has_edge(self, u: str, v: str) -> bool:
        return self.pair(u, v) in self.edge_set

    @property
    def is_exact(self) -> bool:
        return all(p.is_exact for p in self.points)

    def with_points(self, points: Iterable[Point], edges: Iterable[Pair] = ()) -> "Configuration":
        return Configuration(
            points=self.points + tuple(points),
            unit_edges=self.unit_edges + tuple(edges),
            dimension=self.dimension,
        )


@dataclass(frozen=True)
class ValidationReport:
    bad_edges: tuple
    undeclared_units: tuple
    undecided: tuple

    @property
    def valid(self) -> bool:
        return not (self.bad_edges or self.undeclared_units or self.undecided)


class Provenance(enum.Enum):
    EXACT = "exact"
    NUMERIC = "numeric"


@dataclass(frozen=True)
class PlacementSolution:
    """An image of every label under a unit-distance-preserving map.

    ``branch_path`` records the circle-intersection choices (exact
    provenance); ``residual`` is the constraint residual (numeric provenance).
    """

    assignment: Mapping
    provenance: Provenance = Provenance.EXACT
    branch_path: tuple = ()
    residual: Optional[float] = None

    def __getitem__(self, label):
        return self.assignment[label]

    def labels(self):
        return list(self.assignment)


def distance(p, q) -> CReal:
    """Euclidean distance between two points (or coordinate sequences)."""
    a = p.coords if isinstance(p, Point) else tuple(p)
    b = q.coords if isinstance(q, Point) else tuple(q)
    if len(a) != len(b):
        raise DimensionMismatch(f"dimension mismatch: {len(a)} vs {len(b)}")
    return squared_distance(a, b).sqrt()


def squared_distance(a: Sequence[CReal], b: Sequence[CReal]) -> CReal:
    total = CReal.of(0)
    for x, y in zip(a, b):
        d = CReal.of(x) - CReal.of(y)
        total = total + d * d
    return total


def classify_pair(p: Point, q: Point, budget: Optional[int] = None) -> PairClass:
    order = squared_distance(p.coords, q.coords).compare(1, budget)
    if order is Ordering.EQUAL:
        return PairClass.UNIT
    if order is Ordering.UNDECIDED:
        return PairClass.UNDECIDED
    return PairClass.NON_UNIT


def classify_pairs(c: Configuration, budget: Optional[int] = None) -> Configuration:
    """Return ``c`` with its pair table filled in.

    The threshold is exactly 1.  Exact coordinates are decided exactly;
    inexact ones are refined up to the budget and otherwise marked undecided.
    """
    if c.pair_table is not None and budget is None:
        return c
    table = {}
    for p, q in combinations(c.points, 2):
        table[(p.label, q.label)] = classify_pair(p, q, budget)
    return Configuration(points=c.points, unit_edges=c.unit_edges, dimension=c.dimension, pair_table=table)


def validate(c: Configuration, budget: Optional[int] = None) -> ValidationReport:
    c = classify_pairs(c, budget)
    bad, extra, undecided = [], [], []
    edges = c.edge_set
    for pair, cls in c.pair_table.items():
        if cls is PairClass.UNDECIDED:
            undecided.append(pair)
            if pair in edges:
                bad.append(pair)
        elif pair in edges and cls is not PairClass.UNIT:
            bad.append(pair)
        elif pair not in edges and cls is PairClass.UNIT:
            extra.append(pair)
    return ValidationReport(tuple(bad), tuple(extra), tuple(undecided))


def declare_unit_pairs(c: Configuration, budget: Optional[int] = None) -> Configuration:
    """Declare every certified unit pair as an edge.

    Raises GeometryError if some pair cannot be classified.
    """
    c = classify_pairs(c, budget)
    new = []
    for pair, cls in c.pair_table.items():
        if cls is PairClass.UNDECIDED:
            raise GeometryError(f"pair {pair} cannot be classified against the unit distance")
        if cls is PairClass.UNIT and pair not in c.edge_set:
            new.append(pair)
    if not new:
        return c
    return Configuration(
        points=c.points,
        unit_edges=c.unit_edges + tuple(new),
        dimension=c.dimension,
        pair_table=c.pair_table,
    )


def canonical_frame(
    s: PlacementSolution,
    base: tuple,
    order: Optional[Sequence[str]] = None,
) -> PlacementSolution:
    """Move a planar solution into its canonical position.

    base[0] goes to the origin, base[1] onto the positive first axis, and the
    first label in ``order`` with a nonzero second coordinate into the upper
    half-plane.
    """
    order = list(order) if order is not None else list(s.assignment)
    p0 = [CReal.of(x) for x in s.assignment[base[0]]]
    p1 = [CReal.of(x) for x in s.assignment[base[1]]]
    if len(p0) != 2:
        raise DimensionMismatch("canonical framing is defined for the plane")
    dx, dy = p1[0] - p0[0], p1[1] - p0[1]
    r = (dx * dx + dy * dy).sqrt()
    if r.sign() is not Ordering.GREATER:
        raise CannotFrame(f"base points {base[0]!r} and {base[1]!r} do not have distinct images")
    cos, sin = dx / r, dy / r
    moved = {}
    for lab in order:
        x, y = (CReal.of(v) for v in s.assignment[lab])
        tx, ty = x - p0[0], y - p0[1]
        moved[lab] = (cos * tx + sin * ty, cos * ty - sin * tx)
    flip = False
    for lab in order:
        sg = moved[lab][1].sign()
        if sg is Ordering.UNDECIDED or sg is Ordering.EQUAL:
            continue
        flip = sg is Ordering.LESS
        break
    if flip:
        moved = {lab: (x, -y) for lab, (x, y) in moved.items()}
    return PlacementSolution(moved, s.provenance, s.branch_path, s.residual)


def merge(base: Configuration, other: Configuration, prefix: str = "", declare: bool = True):
    """Union of two configurations, identifying points with identical exact
    coordinates.  Returns the merged configuration and the label map for
    ``other``.  New labels are ``prefix + label``, made unique if needed.
    """
    if base.dimension != other.dimension:
        raise DimensionMismatch("cannot merge configurations of different dimension")
    by_coords = {}
    for p in base.points:
        if p.is_exact:
            by_coords.setdefault(tuple(x.exact for x in p.coords), p.label)
    taken = set(base.labels)
    mapping = {}
    added = []
    for p in other.points:
        key = tuple(x.exact for x in p.coords) if p.is_exact else None
        if key is not None and key in by_coords:
            mapping[p.label] = by_coords[key]
            continue
        label = prefix + p.label
        n = 1
        while label in taken:
            n += 1
            label = f"{prefix}{p.label}~{n}"
        taken.add(label)
        mapping[p.label] = label
        if key is not None:
            by_coords[key] = label
        added.append(Point(label, p.coords))
    edges = [(mapping[u], mapping[v]) for u, v in other.unit_edges if mapping[u] != mapping[v]]
    merged = base.with_points(added, edges)
    if declare:
        merged = declare_unit_pairs(merged)
    return merged, mapping
