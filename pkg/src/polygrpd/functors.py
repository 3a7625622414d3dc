"""Enumeration of functors and strict lifts, and the groupoids they form.

A connected groupoid ``X`` with root ``r`` and spanning morphisms
``t_x : r → x`` is generated by ``Aut(r)`` and the ``t_x``.  A functor out of
``X`` is therefore fixed by the image of ``r``, a homomorphism on ``Aut(r)``
and the images of the ``t_x``, which is how everything here is enumerated.

For a lifting problem ``g : X → B`` along ``q : Y → B`` we enumerate functors
``F`` with ``q∘F = g`` strictly.  With ``normalized=True`` the ``t_x`` are sent
to a fixed canonical lift, which keeps one functor per (root value,
homomorphism) pair; the resulting full subgroupoid is equivalent to the full
groupoid of lifts.
"""

from __future__ import annotations

import itertools

from .config import check_cap
from .groupoid import FinGroupoid, GroupoidMap, point, terminal_map
from .invariants import LocalGroup, components, extend_hom, skeleton


class _LiftIndex:
    """Lookup tables for lifting morphisms of ``B`` along ``q : Y → B``."""

    def __init__(self, q: GroupoidMap):
        Y = q.source
        self.q = q
        self.by_start = {}
        self.fibre = {}
        for y in range(Y.n_objects):
            self.fibre.setdefault(q.obj_map[y], []).append(y)
        for m in range(Y.n_morphisms):
            self.by_start.setdefault((Y.src[m], q.mor_map[m]), []).append(m)
        self.vertical = {}
        B = q.target
        for m in range(Y.n_morphisms):
            if B.is_identity(q.mor_map[m]):
                self.vertical.setdefault((Y.src[m], Y.tgt[m]), []).append(m)

    def lifts(self, y, beta):
        return self.by_start.get((y, beta), [])

    def vert(self, y, y2):
        return self.vertical.get((y, y2), [])

    def over(self, b):
        return self.fibre.get(b, [])


def group_homs(G: LocalGroup, Y: FinGroupoid, y: int, allowed):
    """Homomorphisms ``G → Aut_Y(y)`` with ``allowed(i)`` the admissible images of ``G.elems[i]``.

    Each result maps local index of ``G`` to a morphism index of ``Y``.
    """
    H = LocalGroup(Y, y)
    gens = G.generators()
    cands = [[H.index[m] for m in allowed(s) if m in H.index] for s in gens]
    results = []

    def search(k, chosen):
        img = extend_hom(G, gens[:k], chosen, H.mul, H.e)
        if img is None:
            return
        if k == len(gens):
            hom = [H.elems[img[i]] for i in range(len(G))]
            if all(H.elems[img[i]] in set(allowed(i)) for i in range(len(G))):
                results.append(hom)
            return
        for h in cands[k]:
            search(k + 1, chosen + [h])

    search(0, [])
    return results


class LiftSpace:
    """All (or normalized) strict lifts of ``g : X → B`` along ``q : Y → B``."""

    def __init__(self, g: GroupoidMap, q: GroupoidMap, normalized=True):
        if g.target is not q.target:
            raise ValueError("lifting problem needs a common base")
        self.g, self.q = g, q
        self.X, self.Y = g.source, q.source
        self.normalized = normalized
        self.index = _LiftIndex(q)
        X = self.X
        sd = skeleton(X)
        self.sk = sd
        self.comps = components(X)
        self.roots = [c[0] for c in self.comps]
        self.groups = [LocalGroup(X, r) for r in self.roots]
        # per morphism of X: (component, local index of tree-conjugate in Aut(root))
        self.decomp = []
        for m in range(X.n_morphisms):
            c = sd.component_of[X.src[m]]
            self.decomp.append((c, self.groups[c].index[sd.retract_morphism(m)]))
        self.functors = self._enumerate()
        self._key = {self._normal_key(F): i for i, F in enumerate(self.functors)} if normalized else None

    # -- enumeration --------------------------------------------------------

    def _component_choices(self, c):
        """All partial functors on component ``c``: (root value, rho, tree images)."""
        Y, g, idx = self.Y, self.g, self.index
        r = self.roots[c]
        G = self.groups[c]
        members = [x for x in self.comps[c] if x != r]
        out = []
        for y0 in idx.over(g.obj_map[r]):
            homs = group_homs(G, Y, y0,
                              lambda i: [m for m in Y.aut(y0) if self.q.mor_map[m] == g.mor_map[G.elems[i]]])
            if not homs:
                continue
            tree_opts = []
            for x in members:
                ls = idx.lifts(y0, g.mor_map[self.sk.tree[x]])
                if not ls:
                    break
                tree_opts.append(ls[:1] if self.normalized else ls)
            else:
                for rho in homs:
                    for tails in itertools.product(*tree_opts):
                        out.append((y0, rho, dict(zip(members, tails))))
                        check_cap("sections", len(out))
        return out

    def _enumerate(self):
        per_comp = [self._component_choices(c) for c in range(len(self.comps))]
        total = 1
        for p in per_comp:
            total *= len(p)
        check_cap("sections", total)
        return [self._assemble(choice) for choice in itertools.product(*per_comp)]

    def _assemble(self, choice):
        X, Y = self.X, self.Y
        tree_img = {}
        for c, (y0, rho, tails) in enumerate(choice):
            r = self.roots[c]
            tree_img[r] = Y.ident[y0]
            tree_img.update(tails)
        objs = [Y.tgt[tree_img[x]] for x in range(X.n_objects)]
        mors = []
        for m in range(X.n_morphisms):
            c, a = self.decomp[m]
            rho = choice[c][1]
            mors.append(Y.chain(tree_img[X.tgt[m]], rho[a], Y.inv(tree_img[X.src[m]])))
        return (tuple(objs), tuple(mors))

    def _normal_key(self, F):
        objs, mors = F
        X = self.X
        return tuple((objs[r], tuple(mors[m] for m in X.aut(r))) for r in self.roots)

    # -- queries --------------------------------------------------------------

    def __len__(self):
        return len(self.functors)

    def as_map(self, i):
        objs, mors = self.functors[i]
        return GroupoidMap(self.X, self.Y, objs, mors)

    def vertical_isos(self, F, F2):
        """Vertical natural isos ``F ⇒ F2`` (full component tuples); F, F2 any lifts."""
        X, Y, idx = self.X, self.Y, self.index
        per = []
        for c, r in enumerate(self.roots):
            sols = []
            auts = X.aut(r)
            for th in idx.vert(F[0][r], F2[0][r]):
                if all(Y.comp(th, F[1][a]) == Y.comp(F2[1][a], th) for a in auts):
                    sols.append(th)
            if not sols:
                return []
            per.append(sols)
        out = []
        tree = self.sk.tree
        for combo in itertools.product(*per):
            theta = [None] * X.n_objects
            for c, th in enumerate(combo):
                for x in self.comps[c]:
                    t = tree[x]
                    theta[x] = Y.chain(F2[1][t], th, Y.inv(F[1][t]))
            out.append(tuple(theta))
        return out

    def normalize(self, F):
        """``(i, iso)``: the normalized lift ``functors[i]`` and a vertical iso ``F ⇒ functors[i]``."""
        i = self._key[self._normal_key(F)]
        N = self.functors[i]
        Y = self.Y
        tree = self.sk.tree
        iso = tuple(Y.comp(N[1][tree[x]], Y.inv(F[1][tree[x]])) for x in range(self.X.n_objects))
        return i, iso

    def root_signature(self, F, vclass):
        return tuple(vclass[F[0][r]] for r in self.roots)


def vertical_classes(q: GroupoidMap):
    """Class id per object of ``q.source`` under vertical isomorphism."""
    Y, B = q.source, q.target
    cls = [-1] * Y.n_objects
    k = 0
    for y in range(Y.n_objects):
        if cls[y] != -1:
            continue
        stack = [y]
        cls[y] = k
        while stack:
            z = stack.pop()
            for m in Y.out_of[z]:
                if B.is_identity(q.mor_map[m]) and cls[Y.tgt[m]] == -1:
                    cls[Y.tgt[m]] = k
                    stack.append(Y.tgt[m])
        k += 1
    return cls


def lift_groupoid(space: LiftSpace, name=None) -> FinGroupoid:
    """Groupoid whose objects are the lifts in ``space`` and morphisms the vertical isos."""
    Y = space.Y
    F = space.functors
    vclass = vertical_classes(space.q)
    buckets = {}
    for i, f in enumerate(F):
        buckets.setdefault(space.root_signature(f, vclass), []).append(i)
    mors = []
    for i, f in enumerate(F):
        for j in buckets[space.root_signature(f, vclass)]:
            for theta in space.vertical_isos(f, F[j]):
                mors.append(((i, j, theta), i, j))
                check_cap("sections", len(mors))

    def compose(b, a):
        return (a[0], b[1], tuple(Y.comp(u, v) for u, v in zip(b[2], a[2])))

    G = FinGroupoid.build(range(len(F)), mors,
                          lambda i: (i, i, tuple(Y.ident[y] for y in F[i][0])), compose, name=name)
    G.meta["lifts"] = space
    return G


def all_functors(X: FinGroupoid, Y: FinGroupoid):
    """Every functor ``X → Y`` as a :class:`LiftSpace` over the point."""
    pt = point()
    return LiftSpace(terminal_map(X, pt), terminal_map(Y, pt), normalized=False)


def mapping_groupoid(X: FinGroupoid, Y: FinGroupoid) -> FinGroupoid:
    """Groupoid of all functors ``X → Y`` and natural isomorphisms."""
    G = lift_groupoid(all_functors(X, Y), name=f"[{X.name},{Y.name}]")
    G.meta["functors"] = [G.meta["lifts"].as_map(i) for i in range(G.n_objects)]
    return G
