import json
from fractions import Fraction

import pytest

from polygrpd import (ParseError, cyclic, discrete, equivalent, homotopy_cardinality,
                      multiset_polynomial, validate_groupoid)
from polygrpd.io import (groupoid_to_json, map_to_json, parse_groupoid, parse_tree,
                         polynomial_to_json, species_to_json, tree_to_json)
from polygrpd.species import b_omega_projection, multiset_species


@pytest.mark.parametrize("data, msg", [
    ({"morphisms": []}, "missing field 'objects'"),
    ({"objects": ["a-b"]}, "bad identifier"),
    ({"objects": ["a", "a"]}, "duplicate object"),
    ({"objects": ["a"], "morphisms": [{"id": "f", "src": "a", "tgt": "z"}]}, "unknown endpoint"),
    ({"objects": ["a"], "morphisms": [{"id": "f", "src": "a"}]}, "missing field 'tgt'"),
    ({"objects": ["a"], "compose": [["f", "f", "f"]]}, "unknown morphism"),
    ({"objects": ["a"], "compose": [["id_a", "id_a"]]}, "not a triple"),
    ({"objects": "a"}, "must be lists"),
    ({"builtin": "nonsense"}, "unknown builtin"),
])
def test_parse_errors(data, msg):
    with pytest.raises(ParseError, match=msg):
        parse_groupoid(data)


def test_invalid_table_survives_parsing(fixture, ws):
    g = ws.groupoid(fixture("BC2_bad.json"))
    assert not validate_groupoid(g).valid


def test_fixture_values(fixture, ws):
    cards = {n: homotopy_cardinality(ws.groupoid(fixture(f"{n}.json")))
             for n in ("point", "BC2", "BC3", "EC2", "discrete3")}
    assert cards == {"point": 1, "BC2": Fraction(1, 2), "BC3": Fraction(1, 3), "EC2": 1, "discrete3": 3}


def test_loaded_objects_are_sorted():
    g = parse_groupoid({"objects": ["b", "a", "c"]})
    assert g.objects == ("a", "b", "c")


@pytest.mark.parametrize("g", [cyclic(3), discrete(2), b_omega_projection(2).source])
def test_groupoid_round_trip(g):
    h = parse_groupoid(json.loads(json.dumps(groupoid_to_json(g))))
    assert validate_groupoid(h).valid
    assert equivalent(g, h) is not None
    assert h.n_morphisms == g.n_morphisms


def test_map_round_trip(ws):
    F = b_omega_projection(2)
    d = map_to_json(F)
    d["source"] = groupoid_to_json(F.source)
    d["target"] = groupoid_to_json(F.target)
    G = ws.map(d)
    assert G.validate() == []
    assert homotopy_cardinality(G.source) == homotopy_cardinality(F.source)


def test_polynomial_round_trip(ws):
    P = multiset_polynomial(2)
    Q = ws.polynomial(json.loads(json.dumps(polynomial_to_json(P))))
    assert Q.truncation == 2
    assert equivalent(P.E, Q.E) is not None and equivalent(P.B, Q.B) is not None


def test_species_round_trip(ws):
    F = multiset_species(3)
    G = ws.species(json.loads(json.dumps(species_to_json(F))))
    assert G.truncation == 3 and G.total.n_objects == F.total.n_objects


def test_tree_round_trip():
    d = {"edges": ["r", "a", "b"], "nodes": [{"out": "r", "in": ["a", "b"]}]}
    assert tree_to_json(parse_tree(d)) == d


def test_workspace_caches(fixture, ws):
    a = ws.groupoid(fixture("BC2.json"))
    assert ws.groupoid("fixture:BC2.json") is a
    fam = ws.family(fixture("EC2_over_BC2.json"))
    assert fam.base is a
    assert ws.polynomial(fixture("list.json")) is ws.polynomial(fixture("list.json"))


def test_workspace_missing_file(ws, tmp_path):
    with pytest.raises(ParseError, match="no such file"):
        ws.groupoid(str(tmp_path / "nope.json"))


def test_workspace_bad_json(ws, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ParseError, match="not valid JSON"):
        ws.groupoid(str(p))


def test_map_unknown_label(ws, fixture):
    d = {"source": fixture("point.json"), "target": fixture("BC2.json"),
         "object_map": {"pt": "nowhere"}}
    with pytest.raises(ParseError):
        ws.map(d)


def test_builtin_polynomial_truncation(ws, fixture):
    assert ws.polynomial(fixture("multiset.json"), trunc=2) is multiset_polynomial(2)
