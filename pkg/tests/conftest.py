import pytest

from udrig.gadgets import load_gadget
from udrig.geometry import Configuration, Point

R3 = "sqrt(3)/2"


def config(points, edges=()):
    return Configuration([Point(k, v) for k, v in points.items()], list(edges))


def two_chain(d="2"):
    """X - Z - Y with d(X, Y) = d and both links unit."""
    if d == "2":
        return config({"X": ("0", "0"), "Z": ("1", "0"), "Y": ("2", "0")}, [("X", "Z"), ("Z", "Y")])
    if d == "3/2":
        return config({"X": ("0", "0"), "Z": ("3/4", "sqrt(7)/4"), "Y": ("3/2", "0")}, [("X", "Z"), ("Z", "Y")])
    raise ValueError(d)


@pytest.fixture
def rhombus():
    return load_gadget("rhombus")


@pytest.fixture
def triangle():
    return load_gadget("unit_triangle")


@pytest.fixture
def edge():
    return load_gadget("unit_edge")


@pytest.fixture
def spindle():
    return load_gadget("moser_spindle")
