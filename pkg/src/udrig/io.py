"""Configuration files: UTF-8 JSON with dimension, points and unit_edges."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Union

from .creal import CReal, ExprSyntaxError, parse_number
from .geometry import Configuration, GeometryError, Point


class ConfigFormatError(ValueError):
    """Malformed configuration input; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def config_from_dict(data) -> Configuration:
    if not isinstance(data, dict):
        raise ConfigFormatError("<root>", "expected a JSON object")
    dim = data.get("dimension", 2)
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 2:
        raise ConfigFormatError("dimension", f"expected an integer >= 2, got {dim!r}")
    raw_points = data.get("points")
    if not isinstance(raw_points, list):
        raise ConfigFormatError("points", "expected a list")
    points = []
    for i, rp in enumerate(raw_points):
        where = f"points[{i}]"
        if not isinstance(rp, dict):
            raise ConfigFormatError(where, "expected an object")
        label = rp.get("label")
        if not isinstance(label, str) or not label:
            raise ConfigFormatError(f"{where}.label", "expected a non-empty string")
        coords = rp.get("coords")
        if not isinstance(coords, list) or len(coords) != dim:
            raise ConfigFormatError(f"{where}.coords", f"expected a list of {dim} strings")
        values = []
        for j, text in enumerate(coords):
            if isinstance(text, int) and not isinstance(text, bool):
                text = str(text)
            if not isinstance(text, str):
                raise ConfigFormatError(f"{where}.coords[{j}]", "expected an expression string")
            try:
                values.append(parse_number(text))
            except (ExprSyntaxError, ValueError, ZeroDivisionError) as exc:
                raise ConfigFormatError(f"{where}.coords[{j}]", str(exc)) from None
        points.append(Point(label, tuple(values)))
    raw_edges = data.get("unit_edges", [])
    if not isinstance(raw_edges, list):
        raise ConfigFormatError("unit_edges", "expected a list of label pairs")
    edges = []
    for i, e in enumerate(raw_edges):
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(x, str) for x in e)):
            raise ConfigFormatError(f"unit_edges[{i}]", "expected a pair of labels")
        edges.append((e[0], e[1]))
    try:
        return Configuration(points=tuple(points), unit_edges=tuple(edges), dimension=dim)
    except (GeometryError, KeyError) as exc:
        field = "unit_edges" if isinstance(exc, KeyError) else "points"
        raise ConfigFormatError(field, str(exc).strip("'\"")) from None


def config_to_dict(c: Configuration) -> dict:
    return {
        "dimension": c.dimension,
        "points": [
            {"label": p.label, "coords": [CReal.of(x).to_string() for x in p.coords]}
            for p in c.points
        ],
        "unit_edges": [[u, v] for u, v in c.unit_edges],
    }


def dumps_config(c: Configuration) -> str:
    return json.dumps(config_to_dict(c), indent=2, ensure_ascii=False) + "\n"


def loads_config(text: str) -> Configuration:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigFormatError("<root>", f"invalid JSON: {exc}") from None
    return config_from_dict(data)


def load_config(path: Union[str, Path]) -> Configuration:
    return loads_config(Path(path).read_text(encoding="utf-8"))


def save_config(c: Configuration, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps_config(c), encoding="utf-8")
