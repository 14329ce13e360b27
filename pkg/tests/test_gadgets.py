import pytest

from conftest import config
from udrig.claims import EpsilonClaim
from udrig.creal import CReal
from udrig.enumerator import spectrum, verify
from udrig.gadgets import (
    GadgetError,
    GadgetRecipe,
    Kind,
    NoVerifiedConstruction,
    SearchBudget,
    Side,
    attach_rhombus,
    attach_triangle,
    build_chain,
    build_epsilon_witness,
    build_spindle,
    catalog_builders,
    catalog_names,
    constructible_closure,
    load_gadget,
    search_witness,
)
from udrig.geometry import validate
from udrig.io import config_to_dict


def pair(q="1"):
    return config({"P": ("0", "0"), "Q": (q, "0")})


def test_triangle_apex():
    up = attach_triangle(pair(), "P", "Q", Side.UP, "R")
    assert up.point("R").coords == (CReal.of("1/2"), CReal.of("sqrt(3)/2"))
    c = attach_triangle(pair("3/2"), "P", "Q", Side.UP, "R")
    assert c.point("R").coords == (CReal.of("3/4"), CReal.of("sqrt(7)/4"))
    assert c.has_edge("P", "R") and c.has_edge("Q", "R")


def test_triangle_too_far():
    with pytest.raises(GadgetError):
        attach_triangle(pair("3"), "P", "Q")


def test_rhombus_points_and_idempotence():
    base = config({"B": ("0", "0"), "D": ("1", "0")}, [("B", "D")])
    r = attach_rhombus(base, "B", "D")
    assert r.point("A").coords == (CReal.of("1/2"), CReal.of("sqrt(3)/2"))
    assert r.point("C").coords == (CReal.of("1/2"), CReal.of("-sqrt(3)/2"))
    again = attach_rhombus(r, "B", "D")
    assert config_to_dict(again) == config_to_dict(r)
    assert [v.to_string() for v in spectrum(r, "A", "C").values] == ["0", "sqrt(3)"]


def test_chain_examples():
    c = build_chain(pair("3/2"), "P", "Q", 2)
    assert c.point("z1").coords == (CReal.of("3/4"), CReal.of("sqrt(7)/4"))
    e = build_chain(pair(), "P", "Q", 1)
    assert len(e.points) == 2 and e.has_edge("P", "Q")
    with pytest.raises(GadgetError):
        build_chain(pair("5/2"), "P", "Q", 2)


@pytest.mark.parametrize("k, d", [(3, "5/2"), (3, "1"), (4, "3"), (5, "1/2")])
def test_chain_links_are_unit(k, d):
    c = build_chain(pair(d), "P", "Q", k)
    assert validate(c).valid
    assert len(c.points) == k + 1


def test_spindle_builder_matches_catalog(spindle):
    assert config_to_dict(catalog_builders()["moser_spindle"]()) == config_to_dict(spindle)
    with pytest.raises(GadgetError):
        build_spindle(pair(), "P", "Q")


@pytest.mark.parametrize("name", catalog_names())
def test_catalog_regenerates_and_validates(name):
    built = catalog_builders()[name]()
    assert validate(built).valid
    assert config_to_dict(built) == config_to_dict(load_gadget(name))


def test_recipe_apply():
    base = config({"B": ("0", "0"), "D": ("1", "0")}, [("B", "D")])
    r = GadgetRecipe(Kind.RHOMBUS, {"B": "B", "D": "D"}).apply(base)
    assert set(r.labels) == {"B", "D", "A", "C"}
    with pytest.raises(GadgetError):
        GadgetRecipe(Kind.CUSTOM).apply(base)


def test_closure_counts(edge, triangle):
    assert len(constructible_closure(edge, 1)) == 2
    assert len(constructible_closure(triangle, 1)) == 3
    assert constructible_closure(edge, 0) == []


def test_closure_layers_are_prefixes(triangle):
    one = constructible_closure(triangle, 1)
    two = constructible_closure(triangle, 2)
    assert two[: len(one)] == one and len(two) > len(one)


def test_search_budget_zero(rhombus):
    res = search_witness(rhombus, "A", "C", SearchBudget.of(0))
    assert not res.success
    assert [v.to_string() for v in res.best_spectrum.values] == ["0", "sqrt(3)"]


def test_search_edge_immediate(edge):
    res = search_witness(edge, "X", "Y", SearchBudget.of(0))
    assert res.success and res.explored == 1


def test_epsilon_witness_examples(edge, rhombus):
    assert build_epsilon_witness(edge, "X", "Y", "1/10") is edge
    assert build_epsilon_witness(rhombus, "A", "C", "sqrt(3)") is rhombus
    w = build_epsilon_witness(rhombus, "A", "C", 1)
    assert verify(w, EpsilonClaim("A", "C", 1), use_refuter=False).proven
    for p in rhombus.points:
        assert w.point(p.label).coords == p.coords
    assert validate(w).valid


def test_epsilon_witness_failure_is_explicit():
    # two points sqrt(2) apart: no catalog pair, chains allow collapse,
    # and a tiny epsilon cannot be met by the small search
    c = config({"X": ("0", "0"), "Y": ("1", "1")})
    with pytest.raises(NoVerifiedConstruction):
        build_epsilon_witness(c, "X", "Y", "1/100", SearchBudget(max_added=1, max_explored=2))
