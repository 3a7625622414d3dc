import copy
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from polygrpd import (Node, SizeCapExceeded, TreeDiagram, build_ptree, enumerate_ptrees,
                      identity_polynomial, list_polynomial, multiset_polynomial, ptree_aut_order,
                      ptree_iso, size_caps, tree_stats, validate_ptree, validate_tree)
from polygrpd.trees import naive_tree_oracle


def profile(classes):
    got = {}
    for c in classes:
        got.setdefault(c.n_edges, []).append(c.aut_order)
    return {k: sorted(v) for k, v in got.items()}


def tree_from_parents(parents):
    """Edge 0 is the root; edge i > 0 hangs below edge parents[i - 1]."""
    m = len(parents) + 1
    kids = [[] for _ in range(m)]
    for i, par in enumerate(parents, start=1):
        kids[par].append(f"e{i}")
    nodes = [Node(f"e{j}", tuple(k)) for j, k in enumerate(kids) if k]
    return TreeDiagram([f"e{j}" for j in range(m)], nodes)


parent_lists = st.integers(0, 7).flatmap(
    lambda m: st.tuples(*[st.integers(0, i) for i in range(m)]))


# plain trees

def test_trivial_tree():
    t = TreeDiagram(["r"], [])
    assert validate_tree(t).valid
    assert tree_stats(t).as_tuple() == ("r", {"r"}, 0, 1, 0)


def test_corolla():
    t = TreeDiagram(["r", "l1", "l2"], [Node("r", ("l1", "l2"))])
    assert validate_tree(t).valid
    assert tree_stats(t).as_tuple() == ("r", {"l1", "l2"}, 1, 3, 1)


def test_loop_is_invalid():
    t = TreeDiagram(["r", "e"], [Node("r", ("e",)), Node("e", ("r",))])
    rep = validate_tree(t)
    assert not rep.valid
    assert any(p.startswith("condition (2)") for p in rep.problems)
    assert any(p.startswith("condition (3)") for p in rep.problems)
    with pytest.raises(ValueError):
        tree_stats(t)


def test_linear_depth():
    t = tree_from_parents((0, 1, 2))
    assert tree_stats(t).as_tuple() == ("e0", {"e3"}, 3, 4, 3)


def test_shared_output_is_invalid():
    t = TreeDiagram(["r", "a", "b"], [Node("r", ("a",)), Node("r", ("b",))])
    assert any(p.startswith("condition (1)") for p in validate_tree(t).problems)


def test_unknown_edge():
    assert not validate_tree(TreeDiagram(["r"], [Node("r", ("x",))])).valid


@given(parent_lists)
def test_depth_bounded_by_nodes(parents):
    t = tree_from_parents(parents)
    assert validate_tree(t).valid
    s = tree_stats(t)
    assert s.depth <= s.n_nodes
    assert s.n_edges == len(parents) + 1


# P-trees

def test_identity_linear_ptree():
    P = identity_polynomial()
    pt = build_ptree(P, ("pt", [("pt", [("pt", [None])])]))
    assert validate_ptree(pt).valid
    assert tree_stats(pt.strip()).depth == 3
    assert ptree_aut_order(pt) == 1


def test_slot_bijection_fails():
    pt = build_ptree(multiset_polynomial(3), ("n2", [None, None]))
    bad = copy.deepcopy(pt)
    bad.tree = TreeDiagram(pt.tree.edges + ("e3",),
                           [Node(pt.tree.nodes[0].out, pt.tree.nodes[0].ins + ("e3",))])
    first = pt.tree.nodes[0].ins[0]
    bad.edge_dec["e3"] = pt.edge_dec[first]
    bad.slot[(0, "e3")] = pt.slot[(0, first)]
    bad.phi[(0, "e3")] = pt.phi[(0, first)]
    bad.poly = pt.poly
    rep = validate_ptree(bad)
    assert any("slot bijection fails" in p for p in rep.problems)


def test_ptree_rejects_bad_arity():
    with pytest.raises(ValueError):
        build_ptree(multiset_polynomial(3), ("n2", [None]))


@pytest.mark.parametrize("k, aut", [(2, 2), (3, 6)])
def test_multiset_corolla_aut(k, aut):
    pt = build_ptree(multiset_polynomial(3), (f"n{k}", [None] * k))
    assert ptree_aut_order(pt) == aut


def test_iso_with_itself():
    pt = build_ptree(multiset_polynomial(3), ("n2", [None, ("n0", [])]))
    w = ptree_iso(pt, pt)
    assert w is not None
    assert set(w.edge_map) == set(pt.tree.edges)


def test_list_slot_order_matters():
    L = list_polynomial(3)
    a = build_ptree(L, ("l2", [None, ("l0", [])]))
    b = build_ptree(L, ("l2", [("l0", []), None]))
    assert validate_ptree(a).valid and validate_ptree(b).valid
    assert ptree_iso(a, b) is None


def test_multiset_slot_order_does_not():
    M = multiset_polynomial(3)
    a = build_ptree(M, ("n2", [None, ("n0", [])]))
    b = build_ptree(M, ("n2", [("n0", []), None]))
    assert ptree_iso(a, b) is not None
    assert ptree_iso(b, a) is not None


def test_different_sizes_not_iso():
    M = multiset_polynomial(3)
    assert ptree_iso(build_ptree(M, ("n1", [None])), build_ptree(M, ("n2", [None, None]))) is None


def test_iso_across_polynomials_rejected():
    a = build_ptree(list_polynomial(3), ("l1", [None]))
    b = build_ptree(multiset_polynomial(3), ("n1", [None]))
    with pytest.raises(ValueError):
        ptree_iso(a, b)


# enumeration

def test_identity_enumeration():
    classes = enumerate_ptrees(identity_polynomial(), 7)
    assert Counter(c.n_edges for c in classes) == Counter(range(1, 8))
    assert all(c.aut_order == 1 for c in classes)
    assert profile(classes) == naive_tree_oracle("linear", 7)


def test_identity_five():
    assert len(enumerate_ptrees(identity_polynomial(), 5)) == 5


@pytest.mark.parametrize("m", [3, 4, 6])
def test_list_matches_oracle(m):
    classes = enumerate_ptrees(list_polynomial(m - 1), m)
    assert profile(classes) == naive_tree_oracle("planar", m)
    assert all(c.aut_order == 1 for c in classes)


@pytest.mark.parametrize("m", [3, 6])
def test_multiset_matches_oracle(m):
    classes = enumerate_ptrees(multiset_polynomial(max(m - 1, 1)), m)
    assert profile(classes) == naive_tree_oracle("abstract", m)


def test_representatives_are_valid():
    for c in enumerate_ptrees(multiset_polynomial(4), 5):
        pt = c.representative
        assert validate_ptree(pt).valid
        assert validate_tree(pt.strip()).valid
        assert ptree_aut_order(pt) == c.aut_order
        s = tree_stats(pt.strip())
        assert s.n_edges == c.n_edges and s.depth <= s.n_nodes


def test_classes_pairwise_distinct():
    classes = enumerate_ptrees(multiset_polynomial(4), 4)
    for i, a in enumerate(classes):
        for b in classes[i + 1:]:
            assert ptree_iso(a.representative, b.representative) is None


def test_iso_is_transitive_on_corpus():
    M = multiset_polynomial(3)
    shapes = [("n2", [None, ("n1", [None])]), ("n2", [("n1", [None]), None])]
    trees = [build_ptree(M, s) for s in shapes] + [build_ptree(M, shapes[0])]
    for a in trees:
        for b in trees:
            assert ptree_iso(a, b) is not None


def test_oracle_small():
    assert naive_tree_oracle("linear", 5) == {m: [1] for m in range(1, 6)}
    # one edge: the bare edge and the edge carrying a nullary node
    assert naive_tree_oracle("abstract", 1) == {1: [1, 1]}


def test_oracle_limits():
    with pytest.raises(ValueError):
        naive_tree_oracle("abstract", 8)
    with pytest.raises(ValueError):
        naive_tree_oracle("binary", 3)


def test_truncation_too_small():
    with pytest.raises(ValueError):
        enumerate_ptrees(list_polynomial(2), 5)


def test_enumeration_cap():
    with size_caps(sections=3):
        with pytest.raises(SizeCapExceeded):
            enumerate_ptrees(multiset_polynomial(5), 6)
