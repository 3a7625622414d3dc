"""Equivalence-invariant structure of finite groupoids.

Components, vertex groups, skeleta with explicit equivalence witnesses,
brute-force group isomorphism, equivalence testing and homotopy cardinality.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .config import SizeCapExceeded, get_caps
from .groupoid import FinGroupoid, GroupoidMap, TwoCell, identity_map


def components(g: FinGroupoid):
    """Connected components as lists of object indices, each sorted; ordered by least member."""
    cached = g.meta.get("_components")
    if cached is not None:
        return cached
    comp = [-1] * g.n_objects
    out = []
    for start in range(g.n_objects):
        if comp[start] != -1:
            continue
        cid = len(out)
        comp[start] = cid
        members, stack = [start], [start]
        while stack:
            x = stack.pop()
            for m in g.out_of[x]:
                y = g.tgt[m]
                if comp[y] == -1:
                    comp[y] = cid
                    members.append(y)
                    stack.append(y)
        out.append(sorted(members))
    g.meta["_components"] = out
    return out


def pi0(g: FinGroupoid):
    """Partition of the objects (as labels) into connected components."""
    return [[g.objects[x] for x in c] for c in components(g)]


def aut_group(g: FinGroupoid, x) -> FinGroupoid:
    """The vertex group at object ``x`` as a one-object groupoid."""
    if not g.has_obj(x):
        raise KeyError(f"unknown object {x!r}")
    i = g.obj(x)
    elems = g.aut(i)
    return FinGroupoid.build([x], [(g.morphisms[m], x, x) for m in elems],
                             lambda _: g.morphisms[g.ident[i]], g.comp_labels,
                             name=f"Aut({x})")


class LocalGroup:
    """Vertex group at one object, re-indexed 0..n-1 with a dense table."""

    def __init__(self, g: FinGroupoid, x: int):
        self.groupoid = g
        self.obj = x
        self.elems = list(g.aut(x))
        self.index = {m: i for i, m in enumerate(self.elems)}
        n = len(self.elems)
        self.mul = [[self.index[g.comp(a, b)] for b in self.elems] for a in self.elems]
        self.e = self.index[g.ident[x]]
        self.inv = [next(j for j in range(n) if self.mul[i][j] == self.e) for i in range(n)]
        self.order = [self._order(i) for i in range(n)]

    def __len__(self):
        return len(self.elems)

    def _order(self, i):
        k, acc = 1, i
        while acc != self.e:
            acc = self.mul[acc][i]
            k += 1
        return k

    def generators(self):
        """Greedy generating set: scan elements, keep those outside the span so far."""
        gens, span = [], {self.e}
        for i in range(len(self.elems)):
            if i not in span:
                gens.append(i)
                span = self.closure(gens)
        return gens

    def closure(self, gens):
        seen = {self.e}
        frontier = [self.e]
        while frontier:
            nxt = []
            for w in frontier:
                for s in gens:
                    v = self.mul[w][s]
                    if v not in seen:
                        seen.add(v)
                        nxt.append(v)
            frontier = nxt
        return seen


def extend_hom(G: LocalGroup, gens, images, Hmul, He):
    """Extend generator images to a homomorphism, or ``None`` on conflict.

    Returns a dict on the subgroup generated by ``gens``.
    """
    img = {G.e: He}
    frontier = [G.e]
    while frontier:
        nxt = []
        for w in frontier:
            for s, hs in zip(gens, images):
                v = G.mul[w][s]
                hv = Hmul[img[w]][hs]
                old = img.get(v)
                if old is None:
                    img[v] = hv
                    nxt.append(v)
                elif old != hv:
                    return None
        frontier = nxt
    return img


def group_isomorphism(G: LocalGroup, H: LocalGroup):
    """A group isomorphism ``G → H`` as a list of local indices, or ``None``."""
    n = len(G)
    if n != len(H) or sorted(G.order) != sorted(H.order):
        return None
    limit = get_caps().group_order
    if n > limit:
        raise SizeCapExceeded("group_order", n, limit)
    gens = G.generators()
    cands = [[h for h in range(n) if H.order[h] == G.order[s]] for s in gens]

    def search(k, chosen):
        img = extend_hom(G, gens[:k], chosen, H.mul, H.e)
        if img is None or len(set(img.values())) != len(img):
            return None
        if k == len(gens):
            return [img[i] for i in range(n)] if len(img) == n else None
        for h in cands[k]:
            r = search(k + 1, chosen + [h])
            if r is not None:
                return r
        return None

    return search(0, [])


@dataclass
class SkeletonData:
    groupoid: FinGroupoid
    skeleton: FinGroupoid
    reps: list            # representative object index per component
    component_of: list    # component index per object
    tree: list            # tree[x]: chosen morphism rep(x) -> x
    inclusion: GroupoidMap
    retraction: GroupoidMap
    unit: TwoCell         # inclusion∘retraction ⇒ id
    counit: TwoCell       # retraction∘inclusion ⇒ id (identity components)

    def aut_orders(self):
        return [len(self.skeleton.aut(i)) for i in range(self.skeleton.n_objects)]

    def retract_morphism(self, m):
        """``tree[y]⁻¹ ∘ m ∘ tree[x]`` in the vertex group of the representative."""
        g = self.groupoid
        return g.chain(g.inv(self.tree[g.tgt[m]]), m, self.tree[g.src[m]])


def skeletal_inclusion(g: FinGroupoid):
    """``(sk, inclusion)`` only; cheaper than :func:`skeleton` on large groupoids."""
    reps = [c[0] for c in components(g)]
    sk_objs = [g.objects[r] for r in reps]
    sk_mors = [(g.morphisms[m], g.objects[r], g.objects[r]) for r in reps for m in g.aut(r)]
    sk = FinGroupoid.build(sk_objs, sk_mors, lambda o: g.morphisms[g.ident[g.obj(o)]],
                           g.comp_labels, name=f"sk({g.name})" if g.name else "skeleton")
    return sk, GroupoidMap(sk, g, reps, [g.mor(m) for m in sk.morphisms], name="inclusion")


def skeleton(g: FinGroupoid) -> SkeletonData:
    """Skeletal replacement with inclusion/retraction witnesses.

    The representative of each component is its least object; ``tree[x]`` is
    the least morphism from the representative to ``x``.
    """
    cached = g.meta.get("_skeleton")
    if cached is not None:
        return cached
    comps = components(g)
    reps = [c[0] for c in comps]
    comp_of = [0] * g.n_objects
    tree = [None] * g.n_objects
    for cid, c in enumerate(comps):
        r = c[0]
        for x in c:
            comp_of[x] = cid
            tree[x] = g.ident[r] if x == r else min(g.homset(r, x))
    sk_objs = [g.objects[r] for r in reps]
    sk_mors = [(g.morphisms[m], g.objects[r], g.objects[r]) for r in reps for m in g.aut(r)]
    sk = FinGroupoid.build(sk_objs, sk_mors, lambda o: g.morphisms[g.ident[g.obj(o)]],
                           g.comp_labels, name=f"sk({g.name})" if g.name else "skeleton")
    incl = GroupoidMap(sk, g, reps, [g.mor(m) for m in sk.morphisms], name="inclusion")
    data = SkeletonData(g, sk, reps, comp_of, tree, incl, None, None, None)
    retr_mor = [sk.mor(g.morphisms[data.retract_morphism(m)]) for m in range(g.n_morphisms)]
    data.retraction = GroupoidMap(g, sk, comp_of, retr_mor, name="retraction")
    ir = data.retraction.then(incl)
    data.unit = TwoCell(ir, identity_map(g), tree)
    ri = incl.then(data.retraction)
    data.counit = TwoCell(ri, identity_map(sk), [sk.ident[i] for i in range(sk.n_objects)])
    g.meta["_skeleton"] = data
    return data


def homotopy_cardinality(g: FinGroupoid) -> Fraction:
    """Sum over components of ``1/|Aut|``."""
    return sum((Fraction(1, len(g.aut(c[0]))) for c in components(g)), Fraction(0))


def local_groups(g):
    cached = g.meta.get("_local_groups")
    if cached is None:
        cached = [LocalGroup(g, c[0]) for c in components(g)]
        g.meta["_local_groups"] = cached
    return cached


def _group_invariant(G: LocalGroup):
    return (len(G), tuple(sorted(G.order)))


@dataclass
class Equivalence:
    """An adjoint-free equivalence witness ``forward ⊣⊢ backward``."""

    forward: GroupoidMap
    backward: GroupoidMap
    back_forth: TwoCell   # backward∘forward ⇒ id
    forth_back: TwoCell   # forward∘backward ⇒ id

    def validate(self):
        return (self.forward.validate() + self.backward.validate()
                + self.back_forth.validate() + self.forth_back.validate())


def compare(g: FinGroupoid, h: FinGroupoid):
    """``(witness, reason)``: a witness if ``g ≃ h``, else ``None`` and why not."""
    cg, ch = components(g), components(h)
    if len(cg) != len(ch):
        return None, f"component counts {len(cg)} != {len(ch)}"
    Gs, Hs = local_groups(g), local_groups(h)
    limit = get_caps().group_order
    for G in Gs + Hs:
        if len(G) > limit:
            raise SizeCapExceeded("group_order", len(G), limit)
    og = sorted(len(G) for G in Gs)
    oh = sorted(len(H) for H in Hs)
    if og != oh:
        diff = next((a, b) for a, b in zip(og, oh) if a != b)
        return None, f"Aut orders {diff[0]} != {diff[1]}"
    # greedy matching is exact: group isomorphism is transitive
    used = [False] * len(Hs)
    match = [None] * len(Gs)
    isos = [None] * len(Gs)
    for i, G in enumerate(Gs):
        inv_g = _group_invariant(G)
        for j, H in enumerate(Hs):
            if used[j] or _group_invariant(H) != inv_g:
                continue
            phi = group_isomorphism(G, H)
            if phi is not None:
                used[j] = True
                match[i], isos[i] = j, phi
                break
        else:
            return None, f"no partner for component of {g.objects[cg[i][0]]!r} (Aut order {len(G)})"
    return _assemble_witness(g, h, match, isos), "equivalent"


def _assemble_witness(g, h, match, isos):
    sg, sh = skeleton(g), skeleton(h)
    Gs, Hs = local_groups(g), local_groups(h)
    back_match = [None] * len(Hs)
    back_isos = [None] * len(Hs)
    for i, j in enumerate(match):
        back_match[j] = i
        inv = [0] * len(isos[i])
        for a, b in enumerate(isos[i]):
            inv[b] = a
        back_isos[j] = inv

    def half(src, sd, Ss, Ts, tgt, tgt_reps, m_, iso_):
        om = [tgt_reps[m_[sd.component_of[x]]] for x in range(src.n_objects)]
        mm = []
        for m in range(src.n_morphisms):
            c = sd.component_of[src.src[m]]
            a = Ss[c].index[sd.retract_morphism(m)]
            mm.append(Ts[m_[c]].elems[iso_[c][a]])
        return GroupoidMap(src, tgt, om, mm)

    F = half(g, sg, Gs, Hs, h, sh.reps, match, isos)
    G = half(h, sh, Hs, Gs, g, sg.reps, back_match, back_isos)
    gf = F.then(G)
    fg = G.then(F)
    return Equivalence(F, G, TwoCell(gf, identity_map(g), sg.tree),
                       TwoCell(fg, identity_map(h), sh.tree))


def equivalent(g: FinGroupoid, h: FinGroupoid):
    """Equivalence witness or ``None``."""
    return compare(g, h)[0]


def is_equivalence_map(F: GroupoidMap) -> bool:
    """Fully faithful and essentially surjective."""
    S, T = F.source, F.target
    cs, ct = components(S), components(T)
    comp_t = [0] * T.n_objects
    for i, c in enumerate(ct):
        for x in c:
            comp_t[x] = i
    hit = [comp_t[F.obj_map[c[0]]] for c in cs]
    if sorted(hit) != list(range(len(ct))):
        return False
    for c in cs:
        x = c[0]
        autx = S.aut(x)
        images = {F.mor_map[a] for a in autx}
        if len(images) != len(autx) or len(autx) != len(T.aut(F.obj_map[x])):
            return False
    return True
