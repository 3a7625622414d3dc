import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from polygrpd import (GroupoidMap, Species, b_omega, c_omega, classical_extension, cyclic,
                      cyclic_polynomial, cyclic_species, discrete, egf, equivalent, extend_groupoid,
                      homotopy_cardinality, identity_polynomial, linear_species, list_polynomial,
                      multiset_polynomial, multiset_species, point, polynomial_to_species,
                      species_extension, species_to_polynomial)
from polygrpd.generators import random_combinatorial_polynomial, random_species
from polygrpd.homotopy import FamilyOver, families_equivalent, homotopy_fibre
from polygrpd.invariants import aut_group, components
from polygrpd.species import b_omega_projection, lin


def F_(*xs):
    return [Fraction(x) for x in xs]


# builders

def test_b_omega_two():
    B = b_omega(2)
    assert sorted(len(B.aut(c[0])) for c in components(B)) == [1, 1, 2]
    assert homotopy_cardinality(B) == Fraction(5, 2)


def test_c_omega_three_cycle():
    C = c_omega(3)
    assert aut_group(C, "c3").n_morphisms == 3
    assert "c0" not in C.objects
    assert "c0" in c_omega(3, with_empty=True).objects


@pytest.mark.parametrize("n", [0, 1, 4])
def test_lin_is_discrete(n):
    L = lin(n)
    assert L.is_discrete() and L.n_objects == n + 1


def test_builders_are_shared():
    assert b_omega(3) is b_omega(3)
    assert multiset_polynomial(2).B is b_omega(2)


@pytest.mark.parametrize("k", range(4))
def test_pointed_fibre_is_the_set(k):
    fib = homotopy_fibre(b_omega_projection(3), f"n{k}").total
    assert equivalent(fib, discrete(k)) is not None


# egf

def test_egf_multiset():
    assert egf(multiset_species(5)) == F_(1, 1, Fraction(1, 2), Fraction(1, 6), Fraction(1, 24),
                                          Fraction(1, 120))


def test_egf_cyclic():
    assert egf(cyclic_species(4)) == F_(0, 1, Fraction(1, 2), Fraction(1, 3), Fraction(1, 4))


def test_egf_linear():
    assert egf(linear_species(4)) == F_(1, 1, 1, 1, 1)


def test_egf_is_equivalence_invariant():
    rng = random.Random(11)
    for _ in range(8):
        F = random_species(rng)
        F2 = polynomial_to_species(species_to_polynomial(F), F.truncation)
        assert egf(F) == egf(F2)


# extension

def test_multiset_species_at_one_point():
    assert homotopy_cardinality(species_extension(multiset_species(3), discrete(1))) == Fraction(8, 3)


def test_linear_species_at_two_points():
    assert homotopy_cardinality(species_extension(linear_species(3), discrete(2))) == 15


@pytest.mark.parametrize("F", [multiset_species(3), linear_species(2), cyclic_species(3)])
def test_extension_at_empty_is_F0(F):
    got = homotopy_cardinality(species_extension(F, discrete(0)))
    assert got == homotopy_cardinality(F.fibre(0))


def test_quotient_cardinality_identity():
    rng = random.Random(12)
    for _ in range(6):
        F = random_species(rng)
        for x in (discrete(0), discrete(2), cyclic(2)):
            ext = homotopy_cardinality(species_extension(F, x))
            want = sum(homotopy_cardinality(F.fibre(k)) * homotopy_cardinality(x) ** k
                       / math.factorial(k) for k in range(F.truncation + 1))
            assert ext == want


# conversions

def test_constant_species_gives_empty_positions():
    one = point()
    B = b_omega(3)
    F = Species(3, one, GroupoidMap(one, B, [B.obj("n0")], [B.ident[B.obj("n0")]]), "const")
    P = species_to_polynomial(F)
    assert P.E.n_objects == 0
    assert homotopy_cardinality(extend_groupoid(P, discrete(2))) == 1


def test_multiset_species_to_polynomial():
    P, Q = species_to_polynomial(multiset_species(3)), multiset_polynomial(3)
    assert equivalent(P.E, Q.E) is not None and equivalent(P.B, Q.B) is not None


def test_cyclic_species_to_polynomial():
    P, Q = species_to_polynomial(cyclic_species(3)), cyclic_polynomial(3)
    assert equivalent(P.E, Q.E) is not None and equivalent(P.B, Q.B) is not None


def test_identity_polynomial_species():
    F = polynomial_to_species(identity_polynomial(), 3)
    assert list(F.structure.obj_map) == [b_omega(3).obj("n1")]
    assert egf(F) == F_(0, 1, 0, 0)


def test_multiset_polynomial_species():
    F = polynomial_to_species(multiset_polynomial(3))
    ok, why = families_equivalent(FamilyOver(b_omega(3), F.total, F.structure),
                                  FamilyOver(b_omega(3), b_omega(3), multiset_species(3).structure))
    assert ok, why


def test_list_polynomial_species():
    F = polynomial_to_species(list_polynomial(3))
    G = linear_species(3)
    assert F.total is G.total
    ok, why = families_equivalent(FamilyOver(b_omega(3), F.total, F.structure),
                                  FamilyOver(b_omega(3), G.total, G.structure))
    assert ok, why


def test_truncation_too_small():
    with pytest.raises(ValueError):
        polynomial_to_species(list_polynomial(3), 2)


@given(st.integers(0, 10**6))
def test_polynomial_round_trip(seed):
    P = random_combinatorial_polynomial(random.Random(seed))
    F = polynomial_to_species(P)
    P2 = species_to_polynomial(F)
    ok, why = families_equivalent(FamilyOver(P.B, P.E, P.p), FamilyOver(P2.B, P2.E, P2.p))
    assert ok, why
    for x in (discrete(1), cyclic(2)):
        assert equivalent(extend_groupoid(P, x), species_extension(F, x)) is not None


@given(st.integers(0, 10**6))
def test_species_round_trip(seed):
    F = random_species(random.Random(seed))
    P = species_to_polynomial(F)
    F2 = polynomial_to_species(P, F.truncation)
    Bw = b_omega(F.truncation)
    ok, why = families_equivalent(FamilyOver(Bw, F.total, F.structure),
                                  FamilyOver(Bw, F2.total, F2.structure))
    assert ok, why
    for x in (discrete(0), discrete(2)):
        assert equivalent(extend_groupoid(P, x), species_extension(F, x)) is not None


# classical extension

def test_classical_list():
    assert classical_extension(list_polynomial(3), 2) == 15


def test_classical_multiset():
    assert classical_extension(multiset_polynomial(3), 1) == 4


@pytest.mark.parametrize("k", range(4))
def test_classical_multiset_counts_multisets(k):
    # multisets of size j over k letters: C(k + j - 1, j)
    want = sum(math.comb(k + j - 1, j) if k else int(j == 0) for j in range(4))
    assert classical_extension(multiset_polynomial(3), k) == want


def test_classical_at_zero_counts_nullary_shapes():
    rng = random.Random(13)
    for _ in range(5):
        P = random_combinatorial_polynomial(rng)
        nullary = sum(1 for c in components(P.B)
                      if homotopy_fibre(P.p, P.B.objects[c[0]]).total.n_objects == 0)
        assert classical_extension(P, 0) == nullary


def test_classical_rejects_non_natural():
    with pytest.raises(ValueError):
        classical_extension(list_polynomial(2), -1)
