import random
from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given, settings, strategies as st

from polygrpd import (GroupoidMap, cyclic, discrete, equivalent, homotopy_cardinality, identity_map,
                      pi0, point, terminal_map)
from polygrpd.generators import random_combinatorial_polynomial, random_groupoid, random_map_into
from polygrpd.homotopy import FamilyOver, base_change, constant_family, dep_sum, families_equivalent
from polygrpd.polynomial import (PolyDiagram, apply_poly_morphism, beck_chevalley_check,
                                 cartesian_gap_map, compose1, extend, extend_groupoid, from_span,
                                 identity_polynomial, identity_square, is_combinatorial,
                                 is_homotopy_cartesian, strict_square, validate_polynomial)
from polygrpd.species import (ONE, cyclic_polynomial,
                              cyclic_to_multiset_square, list_polynomial, lists_to_cyclic_square,
                              multiset_polynomial)

seeds = st.integers(min_value=0, max_value=10**6)


def card(P, k):
    return homotopy_cardinality(extend_groupoid(P, discrete(k)))


# -- validity -------------------------------------------------------------------------

def test_canonical_polynomials_are_valid():
    for P in (multiset_polynomial(3), list_polynomial(3), cyclic_polynomial(3), identity_polynomial()):
        assert validate_polynomial(P).valid
        assert P.one_variable


def test_endpoint_mismatch_is_invalid():
    P = multiset_polynomial(2)
    Q = PolyDiagram(P.I, P.E, P.B, P.J, terminal_map(P.E, cyclic(2)), P.p, P.t)
    rep = validate_polynomial(Q)
    assert not rep.valid and any("I" in p for p in rep.problems)


# -- extension --------------------------------------------------------------------------

def test_extension_values():
    assert card(list_polynomial(3), 2) == 15
    assert card(multiset_polynomial(3), 1) == Fraction(8, 3)
    assert card(multiset_polynomial(3), 0) == 1
    assert card(cyclic_polynomial(3), 2) == Fraction(2) + Fraction(4, 2) + Fraction(8, 3)


@pytest.mark.parametrize("k", [0, 1, 2])
def test_extension_formulas(k):
    assert card(list_polynomial(3), k) == sum(Fraction(k) ** j for j in range(4))
    assert card(cyclic_polynomial(3), k) == sum(Fraction(k) ** j / j for j in range(1, 4))
    assert card(multiset_polynomial(3), k) == sum(Fraction(k) ** j / factorial(j) for j in range(4))


def test_extension_of_groupoid_argument(BC2):
    # multiset^{<=2}(BC2): 1 + 1/2 + (1/2)^2/2
    assert card_on(multiset_polynomial(2), BC2) == 1 + Fraction(1, 2) + Fraction(1, 8)
    assert card_on(list_polynomial(2), BC2) == 1 + Fraction(1, 2) + Fraction(1, 4)


def card_on(P, X):
    return homotopy_cardinality(extend_groupoid(P, X))


def test_extension_on_family():
    P = list_polynomial(2)
    x = constant_family(ONE, discrete(2))
    y = extend(P, x)
    assert y.base is P.J
    assert homotopy_cardinality(y.total) == 7


def test_equivalent_inputs_give_equivalent_outputs(EC2):
    P = multiset_polynomial(2)
    assert equivalent(extend_groupoid(P, EC2), extend_groupoid(P, discrete(1))) is not None


# -- combinatorial ----------------------------------------------------------------------

def test_is_combinatorial(BC2):
    ok, rep = is_combinatorial(multiset_polynomial(3))
    assert ok and len(rep.lines()) == 4
    assert is_combinatorial(identity_polynomial())[0]
    # p : BC2 -> 1 has fibre BC2
    P = PolyDiagram(ONE, BC2, ONE, ONE, terminal_map(BC2, ONE), terminal_map(BC2, ONE), identity_map(ONE))
    assert not is_combinatorial(P)[0]


@given(seeds)
def test_combinatorial_is_equivalence_invariant(seed):
    P = random_combinatorial_polynomial(random.Random(seed))
    assert is_combinatorial(P)[0]
    # replace E by E x EC2-like contractible factor: still combinatorial
    G = cyclic(2)
    from polygrpd import action_groupoid, product
    EC2 = action_groupoid(G, list(G.morphisms), G.comp_labels)
    E2 = product(P.E, EC2)
    s = GroupoidMap.from_functions(E2, P.I, lambda o: P.I.objects[0], lambda m: P.I.morphisms[0])
    p = GroupoidMap(E2, P.B, [P.p.obj_map[P.E.obj(o[0])] for o in E2.objects],
                    [P.p.mor_map[P.E.mor(m[0])] for m in E2.morphisms])
    Q = PolyDiagram(P.I, E2, P.B, P.J, s, p, P.t)
    assert is_combinatorial(Q)[0]
    for k in range(3):
        assert card(Q, k) == card(P, k)


# -- spans ---------------------------------------------------------------------------------

def test_from_span():
    P = from_span(identity_map(ONE), identity_map(ONE))
    assert card(P, 2) == 2 and card(P, 0) == 0
    from polygrpd import cyclic as cyc
    B = cyc(2)
    P = from_span(terminal_map(B, ONE), terminal_map(B, ONE))
    y = extend(P, FamilyOver(ONE, ONE, identity_map(ONE)))
    assert homotopy_cardinality(y.total) == Fraction(1, 2)
    D = discrete(2)
    Q = from_span(identity_map(D), terminal_map(D, ONE))
    X = discrete(5)
    x = FamilyOver(D, X, GroupoidMap(X, D, [0, 0, 1, 1, 1], [0, 0, 1, 1, 1]))
    assert homotopy_cardinality(extend(Q, x).total) == 5


@given(seeds)
def test_span_extension_is_sum_of_base_change(seed):
    rng = random.Random(seed)
    I = random_groupoid(rng, 2, max_group=3)
    f = random_map_into(rng, I)
    g = terminal_map(f.source, ONE)
    x = FamilyOver(I, f.source, f)
    P = from_span(f, g)
    assert families_equivalent(extend(P, x), dep_sum(g, base_change(f, x)))[0]


# -- composition ------------------------------------------------------------------------------

def test_compose_list_list():
    C = compose1(list_polynomial(2), list_polynomial(2))
    assert validate_polynomial(C).valid
    assert [card(C, k) for k in range(3)] == [3, 13, 57]


def test_compose_multiset_multiset():
    M = multiset_polynomial(2)
    C = compose1(M, M)
    assert card(C, 1) == card_on(M, extend_groupoid(M, discrete(1)))
    assert [card(C, k) for k in range(3)] == [Fraction(5, 2), Fraction(53, 8), Fraction(37, 2)]


@pytest.mark.parametrize("P", [list_polynomial(2), multiset_polynomial(2), cyclic_polynomial(2)])
def test_compose_with_identity(P):
    I = identity_polynomial()
    for C in (compose1(I, P), compose1(P, I)):
        for k in range(3):
            assert equivalent(extend_groupoid(C, discrete(k)), extend_groupoid(P, discrete(k))) is not None


@settings(max_examples=8)
@given(seeds)
def test_compose_contract_generated(seed):
    rng = random.Random(seed)
    P = random_combinatorial_polynomial(rng, max_positions=2)
    Q = random_combinatorial_polynomial(rng, max_positions=2)
    C = compose1(Q, P)
    for k in range(2):
        X = discrete(k)
        assert card(C, k) == card_on(Q, extend_groupoid(P, X))


# -- squares -----------------------------------------------------------------------------------

def test_identity_square_is_cartesian():
    for P in (list_polynomial(2), multiset_polynomial(2)):
        sq = identity_square(P)
        assert sq.validate() == [] and is_homotopy_cartesian(sq)


@pytest.mark.parametrize("n", [2, 3])
def test_canonical_squares_are_cartesian(n):
    for sq in (lists_to_cyclic_square(n), cyclic_to_multiset_square(n)):
        assert sq.validate() == []
        assert is_homotopy_cartesian(sq)


def test_noncartesian_square():
    M = multiset_polynomial(2)
    E0 = discrete(0)
    P2 = PolyDiagram(ONE, E0, ONE, ONE, terminal_map(E0, ONE), terminal_map(E0, ONE), identity_map(ONE))
    B = M.B
    uB = GroupoidMap(ONE, B, [B.obj("n1")], [B.ident[B.obj("n1")]])
    sq = strict_square(P2, M, GroupoidMap(E0, M.E, [], []), uB)
    assert not is_homotopy_cartesian(sq)
    gap, pb = cartesian_gap_map(sq)
    assert pb.apex.n_objects > 0


def test_square_composition():
    sq = lists_to_cyclic_square(3).then(cyclic_to_multiset_square(3))
    assert sq.validate() == [] and is_homotopy_cartesian(sq)
    with pytest.raises(ValueError):
        cyclic_to_multiset_square(3).then(lists_to_cyclic_square(3))


def test_apply_identity_square():
    P = multiset_polynomial(2)
    x = constant_family(ONE, discrete(2))
    F = apply_poly_morphism(identity_square(P), x)
    assert F.validate() == []
    assert F.source.n_objects == F.target.n_objects
    from polygrpd.invariants import is_equivalence_map
    assert is_equivalence_map(F)


def test_lists_to_multisets_on_one_point():
    sq = lists_to_cyclic_square(3).then(cyclic_to_multiset_square(3))
    F = apply_poly_morphism(sq, constant_family(ONE, discrete(1)))
    assert F.validate() == []
    assert homotopy_cardinality(F.source) == 4
    assert homotopy_cardinality(F.target) == Fraction(8, 3)
    assert _surjective_on_pi0(F)


def test_lists_to_cyclic_on_two_points():
    F = apply_poly_morphism(lists_to_cyclic_square(3), constant_family(ONE, discrete(2)))
    assert len(pi0(F.source)) == 15
    # necklaces of length <= 3 in 2 colours: 1 + 2 + 3 + 4
    assert len(pi0(F.target)) == 10
    assert _surjective_on_pi0(F)


def _surjective_on_pi0(F):
    from polygrpd.invariants import components
    comp = {}
    for i, c in enumerate(components(F.target)):
        for x in c:
            comp[x] = i
    return {comp[y] for y in F.obj_map} == set(range(len(components(F.target))))


# -- beck-chevalley ----------------------------------------------------------------------------

def test_bc_identity_square(BC2):
    r = beck_chevalley_check(identity_map(BC2), identity_map(BC2))
    assert r.ok


def test_bc_point_into_bc2(BC2, EC2):
    p = GroupoidMap.from_functions(EC2, BC2, lambda o: BC2.objects[0], lambda m: m[0])
    pt = GroupoidMap(point(), BC2, [0], [BC2.ident[0]])
    r = beck_chevalley_check(pt, p)
    assert r.ok
    assert r.cardinalities["sum_lhs"] == r.cardinalities["sum_rhs"]


def test_bc_sets_only():
    # the classical bookkeeping: pullback of finite maps, fibres multiply
    A, B, C = discrete(3), discrete(2), discrete(2)
    f = GroupoidMap(A, C, [0, 0, 1], [0, 0, 1])
    g = GroupoidMap(B, C, [0, 1], [0, 1])
    r = beck_chevalley_check(f, g)
    assert r.ok
    assert r.cardinalities["sum_lhs"] == 6
    assert r.cardinalities["prod_lhs"] == 4 + 2
