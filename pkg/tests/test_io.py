import json

import pytest

from udrig.creal import CReal
from udrig.geometry import Configuration, Point
from udrig.io import ConfigFormatError, config_from_dict, dumps_config, loads_config


def sample():
    return Configuration(
        [Point("B", ("0", "0")), Point("D", ("1", "0")), Point("A", ("1/2", "sqrt(3)/2")), Point("x", ("0.25", "-1.5e-3"))],
        [("B", "D"), ("A", "B"), ("A", "D")],
    )


def test_round_trip_is_bit_exact():
    text = dumps_config(sample())
    again = loads_config(text)
    assert dumps_config(again) == text
    assert again.point("A").coords[1] == CReal.of("sqrt(3)/2")
    assert again.point("x").coords[0].to_string() == "0.25"


@pytest.mark.parametrize(
    "doc, field",
    [
        ({"points": "nope"}, "points"),
        ({"points": [{"label": "a", "coords": ["0"]}]}, "points[0].coords"),
        ({"points": [{"label": "a", "coords": ["0", "sqrt(-2)"]}]}, "points[0].coords[1]"),
        ({"points": [{"coords": ["0", "0"]}]}, "points[0].label"),
        ({"points": [{"label": "a", "coords": ["0", "0"]}], "unit_edges": [["a"]]}, "unit_edges[0]"),
        ({"dimension": 1, "points": []}, "dimension"),
    ],
)
def test_errors_name_the_field(doc, field):
    with pytest.raises(ConfigFormatError) as exc:
        config_from_dict(doc)
    assert exc.value.field == field


def test_invalid_json():
    with pytest.raises(ConfigFormatError):
        loads_config("{not json")


def test_output_is_plain_json():
    data = json.loads(dumps_config(sample()))
    assert data["dimension"] == 2 and data["unit_edges"][0] == ["B", "D"]
