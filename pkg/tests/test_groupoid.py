import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from polygrpd import (FinGroupoid, ParseError, action_groupoid, coproduct, cyclic, discrete,
                      equivalent, homotopy_cardinality, identity_map, mapping_groupoid, pi0,
                      product, skeleton, symmetric, validate_groupoid)
from polygrpd.functors import all_functors
from polygrpd.generators import coset_action, random_action, random_groupoid, small_groups, subgroups
from polygrpd.groupoid import GroupoidMap, TwoCell, one_object
from polygrpd.invariants import LocalGroup, aut_group, compare, group_isomorphism, is_equivalence_map


def bad_bc2():
    return FinGroupoid.from_table(["pt"], [("tau", "pt", "pt")], [("tau", "tau", "tau")])


# -- validation ------------------------------------------------------------------

def test_discrete_and_bc2_are_valid(BC2):
    assert validate_groupoid(discrete(3)).valid
    assert validate_groupoid(BC2).valid


def test_idempotent_tau_is_rejected():
    rep = validate_groupoid(bad_bc2())
    assert not rep.valid
    text = " ".join(rep.problems)
    assert "no inverse for tau" in text
    assert "identity law" in text


def test_nonassociative_table_is_rejected():
    # a 3-element "group" whose table is a Latin square but not associative
    els = ["e", "a", "b"]
    tab = {("a", "a"): "e", ("a", "b"): "a", ("b", "a"): "a", ("b", "b"): "e"}
    mors = [(x, "pt", "pt") for x in ("a", "b")]
    comp = [(g, f, tab[(g, f)]) for g, f in tab]
    comp = [(g, f, "id_pt" if gf == "e" else gf) for g, f, gf in comp]
    g = FinGroupoid.from_table(["pt"], mors, comp)
    assert not validate_groupoid(g).valid
    assert els


def test_missing_composite_is_reported():
    g = FinGroupoid.from_table(["x", "y"], [("f", "x", "y"), ("g", "y", "x")], [("g", "f", "id_x")])
    probs = validate_groupoid(g).problems
    assert any("f" in p and "g" in p for p in probs)


def test_parse_errors():
    with pytest.raises(ParseError):
        FinGroupoid.from_table(["x"], [("f", "x", "z")], [])
    with pytest.raises(ParseError):
        FinGroupoid.from_table(["x"], [("id_x", "x", "x")], [])
    with pytest.raises(ParseError):
        FinGroupoid.from_table(["x"], [("f", "x", "x")], [("f", "f", "nope")])


def test_empty_groupoid():
    e = discrete(0)
    assert validate_groupoid(e).valid
    assert homotopy_cardinality(e) == 0
    assert pi0(e) == []


# -- invariants ------------------------------------------------------------------

def test_pi0(BC2, EC2):
    assert len(pi0(discrete(3))) == 3
    assert len(pi0(BC2)) == 1
    assert len(pi0(EC2)) == 1


def test_aut_group(BC2, EC2):
    assert aut_group(discrete(3), "x1").n_morphisms == 1
    assert aut_group(BC2, BC2.objects[0]).n_morphisms == 2
    for x in EC2.objects:
        assert aut_group(EC2, x).n_morphisms == 1


def test_skeleton(BC2, EC2):
    assert skeleton(discrete(2)).skeleton.n_objects == 2
    sk = skeleton(EC2)
    assert sk.skeleton.n_objects == 1 and sk.aut_orders() == [1]
    assert sorted(skeleton(coproduct(BC2, discrete(1))).aut_orders()) == [1, 2]


def test_skeleton_round_trip_cells(EC2):
    for g in (EC2, product(discrete(2), cyclic(3)), symmetric(3)):
        sk = skeleton(g)
        assert sk.unit.validate() == []
        assert sk.counit.validate() == []
        assert sk.inclusion.validate() == [] and sk.retraction.validate() == []


def test_cardinalities(BC2, EC2):
    assert homotopy_cardinality(discrete(3)) == 3
    assert homotopy_cardinality(BC2) == Fraction(1, 2)
    assert homotopy_cardinality(EC2) == 1
    assert homotopy_cardinality(symmetric(3)) == Fraction(1, 6)


def test_equivalent_examples(BC2, EC2):
    assert equivalent(discrete(2), discrete(2)) is not None
    w = equivalent(EC2, discrete(1))
    assert w is not None and w.validate() == []
    w, why = compare(BC2, discrete(1))
    assert w is None and why == "Aut orders 2 != 1"


def test_equivalence_needs_isomorphic_groups():
    # C4 and V4 have equal order but are not isomorphic
    V4 = product(cyclic(2), cyclic(2))
    w, why = compare(cyclic(4), V4)
    assert w is None and "no partner" in why
    assert group_isomorphism(LocalGroup(cyclic(6), 0), LocalGroup(symmetric(3), 0)) is None
    assert group_isomorphism(LocalGroup(cyclic(6), 0), LocalGroup(product(cyclic(2), cyclic(3)), 0))


def test_mapping_groupoid_examples(BC2):
    h = coproduct(BC2, discrete(1))
    assert equivalent(mapping_groupoid(discrete(1), h), h) is not None
    assert equivalent(mapping_groupoid(discrete(2), BC2), product(BC2, BC2)) is not None
    assert equivalent(mapping_groupoid(BC2, discrete(2)), discrete(2)) is not None
    M = mapping_groupoid(discrete(2), BC2)
    assert M.n_objects == 1 and M.n_morphisms == 4


def test_mapping_groupoid_of_groups():
    # functors BC2 -> BC3 : only the trivial one, with 3 transformations (centre of C3)
    M = mapping_groupoid(cyclic(2), cyclic(3))
    assert homotopy_cardinality(M) == Fraction(1, 3)
    # Hom(C2, S3) has 4 elements in 2 conjugacy classes
    M = mapping_groupoid(cyclic(2), symmetric(3))
    assert len(all_functors(cyclic(2), symmetric(3))) == 4
    assert homotopy_cardinality(M) == Fraction(4, 6)


# -- builders ---------------------------------------------------------------------

def test_one_object_is_bc2(BC2):
    g = one_object(["e", "t"], {("e", "e"): "e", ("e", "t"): "t", ("t", "e"): "t", ("t", "t"): "e"}, "e")
    assert equivalent(g, BC2) is not None
    with pytest.raises(ValueError):
        one_object(["e", "t"], {("e", "e"): "e", ("e", "t"): "t", ("t", "e"): "t", ("t", "t"): "t"}, "e")


def test_action_groupoid_of_regular_action(EC2):
    assert EC2.n_objects == 2 and EC2.n_morphisms == 4
    assert equivalent(EC2, discrete(1)) is not None


def test_product_example(BC2):
    g = product(discrete(2), BC2)
    assert skeleton(g).aut_orders() == [2, 2]
    assert homotopy_cardinality(g) == 1


def test_builders_accept_zero():
    assert discrete(0).n_objects == 0
    assert cyclic(1).n_morphisms == 1
    assert symmetric(0).n_morphisms == 1
    assert homotopy_cardinality(product()) == 1
    assert homotopy_cardinality(coproduct()) == 0


# -- properties -------------------------------------------------------------------

seeds = st.integers(min_value=0, max_value=10**6)


@given(seeds)
def test_cardinality_is_equivalence_invariant(seed):
    rng = random.Random(seed)
    g = random_groupoid(rng)
    sk = skeleton(g)
    assert equivalent(g, sk.skeleton) is not None
    assert homotopy_cardinality(g) == homotopy_cardinality(sk.skeleton)
    assert homotopy_cardinality(g) == sum(Fraction(1, k) for k in sk.aut_orders())


@given(seeds, seeds)
def test_sum_and_product_cardinalities(s1, s2):
    g = random_groupoid(random.Random(s1), max_objects=3)
    h = random_groupoid(random.Random(s2), max_objects=3)
    assert homotopy_cardinality(coproduct(g, h)) == homotopy_cardinality(g) + homotopy_cardinality(h)
    assert homotopy_cardinality(product(g, h)) == homotopy_cardinality(g) * homotopy_cardinality(h)


@given(seeds)
def test_orbits_and_stabilisers(seed):
    G, pts, act = random_action(random.Random(seed))
    A = action_groupoid(G, pts, act)
    orbits = set()
    for x in pts:
        orbits.add(frozenset(act(g, x) for g in G.morphisms))
    assert sorted(sorted(c) for c in pi0(A)) == sorted(sorted(o) for o in orbits)
    for x in pts:
        stab = [g for g in G.morphisms if act(g, x) == x]
        S = FinGroupoid.build(["pt"], [(g, "pt", "pt") for g in stab],
                              lambda _: G.morphisms[G.ident[0]], G.comp_labels)
        assert validate_groupoid(S).valid
        assert group_isomorphism(LocalGroup(aut_group(A, x), 0), LocalGroup(S, 0)) is not None


@given(seeds, st.integers(min_value=1, max_value=3))
def test_mapping_out_of_discrete_is_power(seed, n):
    h = random_groupoid(random.Random(seed), max_objects=2, max_group=4)
    assert equivalent(mapping_groupoid(discrete(n), h), product(*([h] * n))) is not None


def _brute_equivalent(g, h):
    """Search functor pairs whose composites are isomorphic to identities."""
    space = all_functors(g, h)
    return any(is_equivalence_map(space.as_map(i)) for i in range(len(space)))


@settings(max_examples=15)
@given(seeds, seeds)
def test_equivalent_agrees_with_brute_force(s1, s2):
    g = random_groupoid(random.Random(s1), max_objects=3, max_group=3)
    h = random_groupoid(random.Random(s2), max_objects=3, max_group=3)
    fast = equivalent(g, h) is not None
    assert fast == _brute_equivalent(g, h)
    assert fast == (equivalent(h, g) is not None)
    assert equivalent(g, g) is not None


def test_subgroup_lattice_sizes():
    counts = {G.name: len(subgroups(G)) for G in small_groups()}
    assert counts["BC6"] == 4 and counts["V4"] == 5 and counts["BS3"] == 6
    G = symmetric(3)
    for H in subgroups(G):
        pts, _ = coset_action(G, H)
        assert len(pts) * len(H) == 6


def test_identity_map_and_two_cells(BC2):
    idm = identity_map(BC2)
    assert idm.validate() == []
    tau = [m for m in range(BC2.n_morphisms) if m != BC2.ident[0]][0]
    cell = TwoCell(idm, idm, [tau])
    assert cell.validate() == []
    assert is_equivalence_map(idm)
    F = GroupoidMap(BC2, BC2, [0], [BC2.ident[0]] * 2)
    assert not is_equivalence_map(F)


def test_composition_table_is_total(EC2):
    for a, b in itertools.product(range(EC2.n_morphisms), repeat=2):
        if EC2.src[a] == EC2.tgt[b]:
            assert EC2.comp(a, b) is not None
