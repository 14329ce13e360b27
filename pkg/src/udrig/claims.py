"""Claims about configurations and the three-valued verdicts that settle them."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Union

from .creal import CReal
from .geometry import PlacementSolution


class Mode(enum.Enum):
    STRONG = "strong"
    WEAK = "weak"


@dataclass(frozen=True)
class DistanceClaim:
    """Every unit-preserving map keeps d(X, Y)."""

    x: str
    y: str
    mode: Mode = Mode.STRONG

    @property
    def labels(self):
        return (self.x, self.y)


@dataclass(frozen=True)
class CongruenceClaim:
    """Every unit-preserving map gives d(f K, f L) = d(f M, f N)."""

    k: str
    l: str
    m: str
    n: str
    mode: Mode = Mode.STRONG

    @property
    def labels(self):
        return (self.k, self.l, self.m, self.n)


@dataclass(frozen=True)
class EpsilonClaim:
    """Every unit-preserving map keeps d(X, Y) to within eps."""

    x: str
    y: str
    eps: CReal = field(default_factory=lambda: CReal.of(0))
    mode: Mode = Mode.STRONG

    def __post_init__(self):
        object.__setattr__(self, "eps", CReal.of(self.eps))

    @property
    def labels(self):
        return (self.x, self.y)


Claim = Union[DistanceClaim, CongruenceClaim, EpsilonClaim]


class Outcome(enum.Enum):
    PROVEN = "proven"
    REFUTED = "refuted"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class Verdict:
    outcome: Outcome
    witness: Optional[PlacementSolution] = None
    reason: Optional[str] = None
    details: dict = field(default_factory=dict, compare=False)

    @property
    def proven(self) -> bool:
        return self.outcome is Outcome.PROVEN

    @property
    def refuted(self) -> bool:
        return self.outcome is Outcome.REFUTED


def describe_claim(claim: Claim) -> str:
    if isinstance(claim, DistanceClaim):
        tag = "star" if claim.mode is Mode.STRONG else "wstar"
        return f"{tag}:{claim.x},{claim.y}"
    if isinstance(claim, CongruenceClaim):
        tag = "diamond" if claim.mode is Mode.STRONG else "wdiamond"
        return f"{tag}:{claim.k},{claim.l},{claim.m},{claim.n}"
    return f"eps:{claim.x},{claim.y},{claim.eps.to_string()}"


def parse_claim(text: str) -> Claim:
    """Parse ``star:X,Y``, ``wstar:X,Y``, ``diamond:K,L,M,N``,
    ``wdiamond:K,L,M,N`` or ``eps:X,Y,<expr>``."""
    kind, sep, rest = text.partition(":")
    if not sep:
        raise ValueError(f"claim {text!r} lacks a kind prefix")
    parts = [p.strip() for p in rest.split(",")]
    kind = kind.strip().lower()
    if kind in ("star", "wstar"):
        if len(parts) != 2:
            raise ValueError(f"{kind} claims take two labels")
        return DistanceClaim(parts[0], parts[1], Mode.STRONG if kind == "star" else Mode.WEAK)
    if kind in ("diamond", "wdiamond"):
        if len(parts) != 4:
            raise ValueError(f"{kind} claims take four labels")
        return CongruenceClaim(*parts, mode=Mode.STRONG if kind == "diamond" else Mode.WEAK)
    if kind == "eps":
        if len(parts) != 3:
            raise ValueError("eps claims take two labels and an epsilon expression")
        return EpsilonClaim(parts[0], parts[1], CReal.of(parts[2]))
    raise ValueError(f"unknown claim kind {kind!r}")
