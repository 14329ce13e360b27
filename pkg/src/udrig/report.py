"""JSON rendering of results, with a run manifest for reproducibility."""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction
from pathlib import Path

from . import __version__
from .claims import Verdict, describe_claim
from .creal import CReal
from .enumerator import Enumeration, Spectrum
from .geometry import PlacementSolution, ValidationReport
from .tower import QT


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def manifest(command: str, inputs, parameters: dict, duration=None) -> dict:
    out = {
        "command": command,
        "inputs": {str(p): file_digest(p) for p in inputs},
        "parameters": parameters,
        "version": __version__,
    }
    if duration is not None:
        out["duration_seconds"] = round(duration, 3)
    return out


def number(x) -> dict:
    """Exact expression plus a decimal enclosure."""
    if isinstance(x, Fraction):
        x = QT(x)
    if isinstance(x, QT):
        x = CReal(exact=x)
    x = CReal.of(x)
    return {"expr": x.to_string(), "decimal": x.decimal_interval(20)}


def point_map(assignment) -> dict:
    return {lab: [number(c) for c in xy] for lab, xy in assignment.items()}


def solution(s: PlacementSolution) -> dict:
    out = {"provenance": s.provenance.value, "points": point_map(s.assignment)}
    if s.branch_path:
        out["branch_path"] = list(s.branch_path)
    if s.residual is not None:
        out["residual"] = s.residual
    return out


def enumeration(e: Enumeration) -> dict:
    return {
        "base": list(e.base),
        "method": e.method,
        "count": len(e),
        "solutions": [solution(s) for s in e],
        "stats": dict(sorted(e.stats.items())),
    }


def spectrum(sp: Spectrum) -> dict:
    return {
        "complete": sp.complete,
        "reason": sp.reason,
        "solutions": sp.solution_count,
        "values": [number(v) for v in sp.values],
    }


def validation(r: ValidationReport) -> dict:
    return {
        "valid": r.valid,
        "bad_edges": [list(p) for p in r.bad_edges],
        "undeclared_units": [list(p) for p in r.undeclared_units],
        "undecided": [list(p) for p in r.undecided],
    }


def _plain(v):
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, (CReal, QT, Fraction)):
        return number(v)
    if isinstance(v, float):
        return float(f"{v:.12g}")
    return v


def verdict(claim, v: Verdict) -> dict:
    return {
        "claim": describe_claim(claim),
        "outcome": v.outcome.value,
        "reason": v.reason,
        "witness": solution(v.witness) if v.witness is not None else None,
        "details": _plain(v.details),
    }


def dumps(doc: dict) -> str:
    return json.dumps(_plain(doc), indent=2, sort_keys=True, ensure_ascii=False) + "\n"
