"""Finite rooted trees as diagrams ``A ← M → N → A`` and trees decorated by a polynomial.

A node is stored as its output edge and a tuple of input edges; ``M`` is the
set of pairs (node, input edge).  ``σ`` sends an input edge to the output of
its node and fixes the root.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .config import check_cap
from .groupoid import ValidationReport
from .homotopy import fibre_transport, homotopy_fibre
from .invariants import components
from .polynomial import PolyDiagram, is_combinatorial


@dataclass(frozen=True)
class Node:
    out: str
    ins: tuple = ()


@dataclass
class TreeDiagram:
    edges: tuple
    nodes: tuple

    def __post_init__(self):
        self.edges = tuple(self.edges)
        self.nodes = tuple(n if isinstance(n, Node) else Node(n[0], tuple(n[1])) for n in self.nodes)

    @property
    def M(self):
        return [(i, e) for i, n in enumerate(self.nodes) for e in n.ins]

    def inputs(self):
        return {e for n in self.nodes for e in n.ins}

    def root(self):
        free = [e for e in self.edges if e not in self.inputs()]
        return free[0] if len(free) == 1 else None

    def leaves(self):
        outs = {n.out for n in self.nodes}
        return [e for e in self.edges if e not in outs]

    def node_of(self):
        """Output edge → node index."""
        return {n.out: i for i, n in enumerate(self.nodes)}

    def sigma(self):
        """Walk-to-root map on edges (the root is fixed)."""
        sig = {}
        for n in self.nodes:
            for e in n.ins:
                sig[e] = n.out
        r = self.root()
        if r is not None:
            sig.setdefault(r, r)
        return sig


def validate_tree(t: TreeDiagram) -> ValidationReport:
    problems = []
    eset = set(t.edges)
    if len(eset) != len(t.edges):
        problems.append("duplicate edge identifiers")
    for i, n in enumerate(t.nodes):
        for e in (n.out,) + tuple(n.ins):
            if e not in eset:
                problems.append(f"node {i} refers to unknown edge {e!r}")
    if problems:
        return ValidationReport(problems)
    outs = [n.out for n in t.nodes]
    dup = sorted({e for e in outs if outs.count(e) > 1}, key=t.edges.index)
    for e in dup:
        problems.append(f"condition (1) fails: {e!r} is the output of several nodes")
    ins = [e for n in t.nodes for e in n.ins]
    dup = sorted({e for e in ins if ins.count(e) > 1}, key=t.edges.index)
    for e in dup:
        problems.append(f"condition (2) fails: {e!r} is an input of several nodes")
    free = [e for e in t.edges if e not in set(ins)]
    if len(free) != 1:
        problems.append(f"condition (2) fails: {len(free)} edges are not inputs (need exactly one root)")
    root = free[0] if len(free) == 1 else None
    sig = {}
    for n in t.nodes:
        for e in n.ins:
            sig.setdefault(e, n.out)
    for x in t.edges:
        y, ok = x, False
        for _ in range(len(t.edges) + 1):
            if y == root:
                ok = True
                break
            if y not in sig:
                break
            y = sig[y]
        if not ok:
            problems.append(f"condition (3) fails: σ does not reach the root from {x!r}")
    return ValidationReport(problems)


@dataclass
class TreeStats:
    root: str
    leaves: list
    n_nodes: int
    n_edges: int
    depth: int

    def as_tuple(self):
        return (self.root, set(self.leaves), self.n_nodes, self.n_edges, self.depth)


def tree_stats(t: TreeDiagram) -> TreeStats:
    rep = validate_tree(t)
    if not rep.valid:
        raise ValueError("invalid tree: " + "; ".join(rep.problems))
    root = t.root()
    sig = t.sigma()
    depth = 0
    for x in t.edges:
        k = 0
        while x != root:
            x = sig[x]
            k += 1
        depth = max(depth, k)
    return TreeStats(root, t.leaves(), len(t.nodes), len(t.edges), depth)


# -- P-trees -----------------------------------------------------------------------

@dataclass
class PTree:
    """A tree decorated by a polynomial ``I ← E → B → I``.

    ``slot[(node, edge)] = (e, β)`` with ``β : p(e) → node_dec[node]``;
    ``phi[(node, edge)] : edge_dec[edge] → s(e)`` and
    ``psi[node] : edge_dec[out] → t(node_dec[node])`` are the 2-cell data.
    Everything is stored by label.
    """

    tree: TreeDiagram
    poly: PolyDiagram
    edge_dec: dict
    node_dec: dict
    slot: dict
    phi: dict
    psi: dict

    def strip(self):
        return self.tree


def _fibre_positions(P, b):
    """Comma fibre of ``p`` over ``b`` and component index per fibre object (cached on ``P``)."""
    cache = P.__dict__.setdefault("_fibre_cache", {})
    got = cache.get(b)
    if got is None:
        fib = homotopy_fibre(P.p, b).total
        comp = {}
        for ci, c in enumerate(components(fib)):
            for o in c:
                comp[o] = ci
        got = (fib, comp, len(components(fib)))
        cache[b] = got
    return got


def build_ptree(P: PolyDiagram, nested, root_colour=None) -> PTree:
    """P-tree from a nested description.

    ``nested`` is ``None`` for a bare edge or ``(shape, [child, ...])``; the
    children fill the positions of ``shape`` in the order of the fibre's
    components.  Edge decorations are chosen so every 2-cell is an identity.
    """
    edges, nodes = [], []
    edge_dec, node_dec, slot, phi, psi = {}, {}, {}, {}, {}
    I, E, B = P.I, P.E, P.B

    def grow(spec, colour):
        e = f"e{len(edges)}"
        edges.append(e)
        edge_dec[e] = colour
        if spec is None:
            return e
        b, children = spec
        fib, comp, k = _fibre_positions(P, b)
        reps = [fib.objects[c[0]] for c in components(fib)]
        if len(reps) != len(children):
            raise ValueError(f"shape {b!r} has {len(reps)} positions, got {len(children)} children")
        ni = len(nodes)
        nodes.append(None)
        node_dec[ni] = b
        psi[ni] = I.morphisms[I.ident[I.obj(colour)]]
        ins = []
        for (el, _, beta), child in zip(reps, children):
            c = I.objects[P.s.obj_map[E.obj(el)]]
            ce = grow(child, c)
            ins.append(ce)
            slot[(ni, ce)] = (el, beta)
            phi[(ni, ce)] = I.morphisms[I.ident[I.obj(c)]]
        nodes[ni] = Node(e, tuple(ins))
        return e

    if nested is None:
        colour = root_colour if root_colour is not None else I.objects[0]
    else:
        colour = I.objects[P.t.obj_map[B.obj(nested[0])]]
    grow(nested, colour)
    return PTree(TreeDiagram(edges, nodes), P, edge_dec, node_dec, slot, phi, psi)


def validate_ptree(pt: PTree) -> ValidationReport:
    problems = list(validate_tree(pt.tree).problems)
    P = pt.poly
    I, E, B = P.I, P.E, P.B
    if problems:
        return ValidationReport(problems)
    for e in pt.tree.edges:
        if not I.has_obj(pt.edge_dec.get(e)):
            problems.append(f"edge {e!r} decorated by unknown object")
    for i, n in enumerate(pt.tree.nodes):
        b = pt.node_dec.get(i)
        if not B.has_obj(b):
            problems.append(f"node {i} decorated by unknown shape")
            continue
        fib, comp, k = _fibre_positions(P, b)
        if any(len(fib.aut(c[0])) != 1 for c in components(fib)):
            problems.append(f"fibre over {b!r} is not discrete")
            continue
        psi = pt.psi.get(i)
        bi = B.obj(b)
        if psi is None or not I.has_mor(psi):
            problems.append(f"node {i}: missing output 2-cell")
        else:
            m = I.mor(psi)
            if I.src[m] != I.obj(pt.edge_dec[n.out]) or I.tgt[m] != P.t.obj_map[bi]:
                problems.append(f"node {i}: output 2-cell has wrong endpoints")
        hit = []
        for e in n.ins:
            key = (i, e)
            if key not in pt.slot:
                problems.append(f"node {i}: no slot for input {e!r}")
                continue
            el, beta = pt.slot[key]
            if not E.has_obj(el) or not B.has_mor(beta):
                problems.append(f"node {i}: slot for {e!r} is ill-typed")
                continue
            bm = B.mor(beta)
            if B.src[bm] != P.p.obj_map[E.obj(el)] or B.tgt[bm] != bi:
                problems.append(f"node {i}: fibre witness for {e!r} has wrong endpoints")
                continue
            hit.append(comp[fib.obj((el, "pt", beta))])
            ph = pt.phi.get(key)
            if ph is None or not I.has_mor(ph):
                problems.append(f"node {i}: missing input 2-cell for {e!r}")
            else:
                m = I.mor(ph)
                if I.src[m] != I.obj(pt.edge_dec[e]) or I.tgt[m] != P.s.obj_map[E.obj(el)]:
                    problems.append(f"node {i}: input 2-cell for {e!r} has wrong endpoints")
        if sorted(hit) != list(range(k)):
            problems.append(f"node {i}: slot bijection fails ({len(n.ins)} inputs, {k} positions)")
    return ValidationReport(problems)


class _IsoSearch:
    """Counts (or finds) P-tree isomorphisms ``a → b``, top-down from the root."""

    def __init__(self, a: PTree, b: PTree, want_one=False):
        if a.poly is not b.poly:
            raise ValueError("P-trees over different polynomials")
        self.a, self.b = a, b
        self.P = a.poly
        self.want_one = want_one
        self.node_a, self.node_b = a.tree.node_of(), b.tree.node_of()

    def match_node(self, na, nb, iota):
        """Witness fragments for node ``na`` ↦ ``nb`` given ι at the output edge."""
        P, a, b = self.P, self.a, self.b
        I, E, B = P.I, P.E, P.B
        ta, tb = a.tree.nodes[na], b.tree.nodes[nb]
        if len(ta.ins) != len(tb.ins):
            return
        ba, bb = B.obj(a.node_dec[na]), B.obj(b.node_dec[nb])
        need = I.chain(I.mor(b.psi[nb]), iota, I.inv(I.mor(a.psi[na])))
        fib_b, comp_b, _ = _fibre_positions(P, b.node_dec[nb])
        where_b = {}
        for e in tb.ins:
            el, beta = b.slot[(nb, e)]
            where_b[comp_b[fib_b.obj((el, "pt", beta))]] = e
        for kappa in B.homset(ba, bb):
            if P.t.mor_map[kappa] != need:
                continue
            pieces = []
            for e in ta.ins:
                el, beta = a.slot[(na, e)]
                moved = (el, "pt", B.morphisms[B.comp(kappa, B.mor(beta))])
                o = fib_b.obj(moved)
                e2 = where_b[comp_b[o]]
                el2, beta2 = b.slot[(nb, e2)]
                eps = fib_b.homset(o, fib_b.obj((el2, "pt", beta2)))[0]
                eps = E.mor(fib_b.morphisms[eps][1])
                iota_e = I.chain(I.inv(I.mor(b.phi[(nb, e2)])), P.s.mor_map[eps], I.mor(a.phi[(na, e)]))
                pieces.append((e, e2, eps, iota_e))
            yield kappa, pieces

    def edges(self, xa, xb, iota):
        """All ways (as a count, or a first witness) to extend ι at edges ``xa ↦ xb``."""
        na, nb = self.node_a.get(xa), self.node_b.get(xb)
        if (na is None) != (nb is None):
            return 0, None
        if na is None:
            return 1, ({xa: xb}, {}, {xa: iota}, {}, {})
        total, first = 0, None
        for kappa, pieces in self.match_node(na, nb, iota):
            count, wit = 1, ({xa: xb}, {na: nb}, {xa: iota}, {na: kappa}, {})
            for e, e2, eps, iota_e in pieces:
                c, w = self.edges(e, e2, iota_e)
                count *= c
                if not c:
                    break
                for d, dd in zip(wit, w):
                    d.update(dd)
                wit[4][(na, e)] = eps
            if count:
                total += count
                if first is None:
                    first = wit
                if self.want_one:
                    return total, first
        return total, first

    def run(self):
        ra, rb = self.a.tree.root(), self.b.tree.root()
        I = self.P.I
        da, db = I.obj(self.a.edge_dec[ra]), I.obj(self.b.edge_dec[rb])
        total, first = 0, None
        for iota in I.homset(da, db):
            c, w = self.edges(ra, rb, iota)
            total += c
            if c and first is None:
                first = w
                if self.want_one:
                    break
        return total, first


@dataclass
class PTreeIso:
    edge_map: dict
    node_map: dict
    iota: dict      # edge -> morphism of I
    kappa: dict     # node -> morphism of B
    eps: dict       # (node, edge) -> morphism of E


def ptree_iso(a: PTree, b: PTree):
    """An isomorphism of P-trees ``a → b``, or ``None``."""
    if len(a.tree.edges) != len(b.tree.edges) or len(a.tree.nodes) != len(b.tree.nodes):
        return None
    _, w = _IsoSearch(a, b, want_one=True).run()
    if w is None:
        return None
    P = a.poly
    em, nm, io, ka, ep = w
    return PTreeIso(em, nm, {k: P.I.morphisms[v] for k, v in io.items()},
                    {k: P.B.morphisms[v] for k, v in ka.items()},
                    {k: P.E.morphisms[v] for k, v in ep.items()})


def ptree_aut_order(pt: PTree) -> int:
    total, _ = _IsoSearch(pt, pt).run()
    return total


# -- enumeration -------------------------------------------------------------------

@dataclass
class PTreeIsoClass:
    representative: PTree
    aut_order: int
    n_edges: int
    key: str


@dataclass
class _Shape:
    label: str
    arity: int
    slots: list                      # per position: (e label, β label)
    perms: list = field(default_factory=list)   # one per automorphism of the shape


def _shapes(P: PolyDiagram):
    B, p = P.B, P.p
    out = []
    for c in components(B):
        b = B.objects[c[0]]
        fib = homotopy_fibre(p, b).total
        cs = components(fib)
        idx = {o: ci for ci, cc in enumerate(cs) for o in cc}
        slots = [(fib.objects[cc[0]][0], fib.objects[cc[0]][2]) for cc in cs]
        perms = []
        for beta in B.aut(c[0]):
            T = fibre_transport(p, fib, fib, beta, objects_only=True)
            perms.append(tuple(idx[T[cc[0]]] for cc in cs))
        out.append(_Shape(b, len(cs), slots, perms))
    return out


def enumerate_ptrees(P: PolyDiagram, max_edges: int):
    """Isomorphism classes of P-trees with at most ``max_edges`` edges.

    ``P`` must be one-variable and combinatorial.  Ordered by edge count and
    then by canonical key.
    """
    if not P.one_variable:
        raise ValueError("enumeration needs a one-variable polynomial")
    ok, _ = is_combinatorial(P)
    if not ok:
        raise ValueError("enumeration needs a combinatorial polynomial")
    if P.truncation is not None and max_edges >= 1 and P.truncation < max_edges - 1:
        raise ValueError(f"truncation {P.truncation} cannot hold arity {max_edges - 1}")
    shapes = _shapes(P)
    # classes[s]: list of (key, aut, structure) for trees with s edges
    classes = {}
    flat = []          # global index -> (size, key, aut, structure)
    for s in range(1, max_edges + 1):
        found = []
        if s == 1:
            found.append(("|", 1, None))
        for si, sh in enumerate(shapes):
            k = sh.arity
            if k == 0:
                if s == 1:
                    found.append((f"{si}[]", len(sh.perms), (si, ())))
                continue
            kernel = sum(1 for q in sh.perms if q == tuple(range(k)))
            image = sorted(set(sh.perms))
            pool = [i for i, c in enumerate(flat) if c[0] <= s - 1 - (k - 1)]
            for combo in itertools.product(pool, repeat=k):
                if sum(flat[i][0] for i in combo) != s - 1:
                    continue
                moved = [_act(q, combo) for q in image]
                if min(moved) != combo:
                    continue
                stab = sum(1 for m in moved if m == combo)
                aut = kernel * stab
                for i in combo:
                    aut *= flat[i][2]
                key = f"{si}[" + ",".join(flat[i][1] for i in combo) + "]"
                found.append((key, aut, (si, combo)))
                check_cap("sections", len(found))
        found.sort(key=lambda c: c[0])
        classes[s] = found
        for key, aut, st in found:
            flat.append((s, key, aut, st))
    out = []
    for s, key, aut, st in flat:
        out.append(PTreeIsoClass(_build_ptree(P, shapes, flat, st), aut, s, key))
    return out


def _act(q, combo):
    out = [None] * len(combo)
    for i, c in enumerate(combo):
        out[q[i]] = c
    return tuple(out)


def _build_ptree(P, shapes, flat, structure):
    edges, nodes = [], []
    edge_dec, node_dec, slot, phi, psi = {}, {}, {}, {}, {}
    I = P.I
    pt_obj = I.objects[0]
    idI = I.morphisms[I.ident[0]]

    def grow(st):
        e = f"e{len(edges)}"
        edges.append(e)
        edge_dec[e] = pt_obj
        if st is None:
            return e
        si, combo = st
        sh = shapes[si]
        ni = len(nodes)
        nodes.append(None)
        ins = []
        for pos, c in enumerate(combo):
            child = grow(flat[c][3])
            ins.append(child)
            slot[(ni, child)] = sh.slots[pos]
            phi[(ni, child)] = idI
        nodes[ni] = Node(e, tuple(ins))
        node_dec[ni] = sh.label
        psi[ni] = idI
        return e

    grow(structure)
    return PTree(TreeDiagram(edges, nodes), P, edge_dec, node_dec, slot, phi, psi)


# -- naive oracle ---------------------------------------------------------------------

def naive_tree_oracle(flavor: str, max_edges: int):
    """Per edge count, the sorted automorphism orders of all isomorphism classes.

    Brute force: every labelled tree on edges ``0..m-1`` (edge 0 the root,
    parents carry smaller labels), each childless edge a leaf or a nullary
    node, deduplicated by pairwise isomorphism tests.
    """
    if flavor not in ("linear", "planar", "abstract"):
        raise ValueError(f"unknown flavor {flavor!r}")
    if max_edges > 7:
        raise ValueError("oracle limited to 7 edges")
    result = {}
    for m in range(1, max_edges + 1):
        reps = []
        for tree in _labelled_trees(flavor, m):
            sig = _signature(tree)
            if any(s == sig and _naive_iso(flavor, tree, t) for s, t in reps):
                continue
            reps.append((sig, tree))
        result[m] = sorted(_naive_aut(flavor, t) for _, t in reps)
    return result


def _labelled_trees(flavor, m):
    """Trees as (children lists, stump flags); children of e listed per edge."""
    for parents in itertools.product(*[range(e) for e in range(1, m)]):
        kids = [[] for _ in range(m)]
        for e, par in enumerate(parents, start=1):
            kids[par].append(e)
        if flavor == "linear" and any(len(k) > 1 for k in kids):
            continue
        childless = [e for e in range(m) if not kids[e]]
        stump_opts = [(False,)] * len(childless) if flavor == "linear" else [(False, True)] * len(childless)
        for stumps in itertools.product(*stump_opts):
            stump = dict(zip(childless, stumps))
            if flavor == "planar":
                for orders in itertools.product(*[itertools.permutations(k) for k in kids]):
                    yield ([list(o) for o in orders], stump)
            else:
                yield (kids, stump)


def _signature(tree):
    kids, stump = tree
    depth = [0] * len(kids)
    for e in range(len(kids)):
        for c in kids[e]:
            depth[c] = depth[e] + 1
    return (tuple(sorted(len(k) for k in kids)), sum(stump.values()), tuple(sorted(depth)))


def _naive_iso(flavor, t1, t2):
    k1, s1 = t1
    k2, s2 = t2

    def same(x, y):
        if len(k1[x]) != len(k2[y]) or s1.get(x, False) != s2.get(y, False):
            return False
        if flavor == "planar" or flavor == "linear":
            return all(same(a, b) for a, b in zip(k1[x], k2[y]))
        for perm in itertools.permutations(k2[y]):
            if all(same(a, b) for a, b in zip(k1[x], perm)):
                return True
        return False

    return same(0, 0)


def _naive_aut(flavor, tree):
    kids, stump = tree
    m = len(kids)
    parent = {c: e for e in range(m) for c in kids[e]}
    count = 0
    for perm in itertools.permutations(range(1, m)):
        f = (0,) + perm
        if any(parent[f[c]] != f[parent[c]] for c in range(1, m)):
            continue
        if any(stump.get(e, False) != stump.get(f[e], False) for e in range(m)):
            continue
        if flavor == "planar" and any([f[c] for c in kids[e]] != kids[f[e]] for e in range(m)):
            continue
        count += 1
    return count
