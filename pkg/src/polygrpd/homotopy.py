"""Homotopy pullbacks, fibres, quotients and the adjoint triple on slices.

Families over a base groupoid are plain maps ``total → base``.  Dependent
product is computed fibrewise over the comma (homotopy) fibres of the map,
whose strict transport along base morphisms makes the fibres assemble into a
single groupoid by a Grothendieck construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .config import check_cap
from .functors import LiftSpace, lift_groupoid, vertical_classes
from .groupoid import (FinGroupoid, GroupoidMap, TwoCell, action_groupoid, coproduct,
                       identity_cell, identity_map, name_object, product)
from .invariants import (compare, components, homotopy_cardinality, is_equivalence_map,
                         aut_group)


@dataclass
class FamilyOver:
    base: FinGroupoid
    total: FinGroupoid
    projection: GroupoidMap

    def __post_init__(self):
        if self.projection.source is not self.total or self.projection.target is not self.base:
            raise ValueError("projection must go from total to base")

    def fibre(self, b):
        """Homotopy fibre over the base object labelled ``b``."""
        return homotopy_fibre(self.projection, b).total


def constant_family(base, fibre):
    """``base × fibre → base``."""
    tot = product(base, fibre)
    return FamilyOver(base, tot, GroupoidMap.from_functions(tot, base, lambda o: o[0], lambda m: m[0]))


def identity_family(base):
    return FamilyOver(base, base, identity_map(base))


@dataclass
class PullbackResult:
    apex: FinGroupoid
    proj1: GroupoidMap
    proj2: GroupoidMap
    comparison: TwoCell     # f∘proj1 ⇒ g∘proj2


def homotopy_pullback(f: GroupoidMap, g: GroupoidMap, name=None) -> PullbackResult:
    """The triple model: objects ``(x, y, φ: f x → g y)``, morphisms ``(α, β)`` over commuting squares.

    Object labels are ``(x, y, φ)``; morphism labels ``(source, α, β)``.
    """
    if f.target is not g.target:
        raise ValueError("cospan legs must share a target")
    X, Y, S = f.source, g.source, f.target
    objs = []
    for x in range(X.n_objects):
        for y in range(Y.n_objects):
            for phi in S.homset(f.obj_map[x], g.obj_map[y]):
                objs.append((x, y, phi))
        check_cap("objects", len(objs))
    lab = [(X.objects[x], Y.objects[y], S.morphisms[p]) for x, y, p in objs]
    mors = []
    for (x, y, phi), o in zip(objs, lab):
        for a in X.out_of[x]:
            fa_inv = S.inv(f.mor_map[a])
            for b in Y.out_of[y]:
                phi2 = S.chain(g.mor_map[b], phi, fa_inv)
                t = (X.objects[X.tgt[a]], Y.objects[Y.tgt[b]], S.morphisms[phi2])
                mors.append(((o, X.morphisms[a], Y.morphisms[b]), o, t))
    apex = FinGroupoid.build(
        lab, mors,
        lambda o: (o, X.morphisms[X.ident[X.obj(o[0])]], Y.morphisms[Y.ident[Y.obj(o[1])]]),
        lambda b, a: (a[0], X.comp_labels(b[1], a[1]), Y.comp_labels(b[2], a[2])),
        name=name)
    p1 = GroupoidMap(apex, X, [x for x, _, _ in objs], [X.mor(m[1]) for m in apex.morphisms])
    p2 = GroupoidMap(apex, Y, [y for _, y, _ in objs], [Y.mor(m[2]) for m in apex.morphisms])
    cell = TwoCell(p1.then(f), p2.then(g), [p for _, _, p in objs])
    return PullbackResult(apex, p1, p2, cell)


def strict_pullback(f: GroupoidMap, g: GroupoidMap, name=None) -> PullbackResult:
    """Set-theoretic pullback: pairs agreeing on the nose."""
    X, Y = f.source, g.source
    objs = [(X.objects[x], Y.objects[y]) for x in range(X.n_objects) for y in range(Y.n_objects)
            if f.obj_map[x] == g.obj_map[y]]
    check_cap("objects", len(objs))
    mors = [((X.morphisms[a], Y.morphisms[b]),
             (X.objects[X.src[a]], Y.objects[Y.src[b]]),
             (X.objects[X.tgt[a]], Y.objects[Y.tgt[b]]))
            for a in range(X.n_morphisms) for b in range(Y.n_morphisms)
            if f.mor_map[a] == g.mor_map[b]]
    apex = FinGroupoid.build(
        objs, mors,
        lambda o: (X.morphisms[X.ident[X.obj(o[0])]], Y.morphisms[Y.ident[Y.obj(o[1])]]),
        lambda b, a: (X.comp_labels(b[0], a[0]), Y.comp_labels(b[1], a[1])), name=name)
    p1 = GroupoidMap.from_functions(apex, X, lambda o: o[0], lambda m: m[0])
    p2 = GroupoidMap.from_functions(apex, Y, lambda o: o[1], lambda m: m[1])
    return PullbackResult(apex, p1, p2, identity_cell(p1.then(f)))


def homotopy_fibre(p: GroupoidMap, b) -> FamilyOver:
    """Fibre of ``p`` over ``b`` with its faithful map into ``p.source``.

    Objects are ``(e, "pt", φ: p e → b)``.
    """
    if not p.target.has_obj(b):
        raise KeyError(f"unknown object {b!r}")
    pb = homotopy_pullback(p, name_object(p.target, b), name=f"fibre({b})")
    return FamilyOver(p.source, pb.apex, pb.proj1)


def fibre_transport(p: GroupoidMap, fib_a: FinGroupoid, fib_b: FinGroupoid, alpha,
                    objects_only=False):
    """Strict transport ``(e, pt, φ) ↦ (e, pt, α∘φ)`` between comma fibres of ``p``.

    With ``objects_only`` just the object map (a list of indices) is returned.
    """
    A = p.target
    al = A.morphisms[alpha]
    om = [fib_b.obj((o[0], o[1], A.comp_labels(al, o[2]))) for o in fib_a.objects]
    if objects_only:
        return om
    objs_b = fib_b.objects
    mm = [fib_b.mor((objs_b[om[fib_a.src[i]]], m[1], m[2])) for i, m in enumerate(fib_a.morphisms)]
    return GroupoidMap(fib_a, fib_b, om, mm)


# -- fibrations -------------------------------------------------------------

def is_isofibration(q: GroupoidMap) -> bool:
    Y, B = q.source, q.target
    for y in range(Y.n_objects):
        have = {q.mor_map[m] for m in Y.out_of[y]}
        if any(beta not in have for beta in B.out_of[q.obj_map[y]]):
            return False
    return True


def is_covering(q: GroupoidMap) -> bool:
    """Unique lifting of every morphism from every object."""
    Y, B = q.source, q.target
    for y in range(Y.n_objects):
        imgs = [q.mor_map[m] for m in Y.out_of[y]]
        if len(imgs) != len(set(imgs)) or len(imgs) != len(B.out_of[q.obj_map[y]]):
            return False
    return True


@dataclass
class FibrationFactorization:
    original: GroupoidMap
    equivalence: GroupoidMap     # X → X̃
    isofibration: GroupoidMap    # X̃ → S
    witness: TwoCell             # isofibration∘equivalence ⇒ original
    retraction: GroupoidMap      # X̃ → X, inverse equivalence


def fibration_factorization(f: GroupoidMap) -> FibrationFactorization:
    """Mapping-path replacement ``X ≃ X̃ ↠ S`` with ``X̃ = X ×_S S`` (triple model)."""
    X, S = f.source, f.target
    pb = homotopy_pullback(f, identity_map(S), name="path")
    P = pb.apex
    om = [P.obj((X.objects[x], S.objects[f.obj_map[x]], S.morphisms[S.ident[f.obj_map[x]]]))
          for x in range(X.n_objects)]
    mm = []
    for a in range(X.n_morphisms):
        x = X.src[a]
        o = (X.objects[x], S.objects[f.obj_map[x]], S.morphisms[S.ident[f.obj_map[x]]])
        mm.append(P.mor((o, X.morphisms[a], S.morphisms[f.mor_map[a]])))
    eq = GroupoidMap(X, P, om, mm)
    return FibrationFactorization(f, eq, pb.proj2, identity_cell(f), pb.proj1)


def as_isofibration(q: GroupoidMap) -> GroupoidMap:
    """``q`` itself when already an isofibration, else its path replacement."""
    return q if is_isofibration(q) else fibration_factorization(q).isofibration


# -- homotopy quotients -----------------------------------------------------

def groupoid_quotient(G: FinGroupoid, X: FinGroupoid, act, name=None) -> FinGroupoid:
    """Grothendieck construction of a strict action of ``G`` on ``X``.

    ``act(g)`` returns the automorphism ``X → X`` for the group element
    labelled ``g``.  Morphisms ``(g, ξ)`` go ``x → y`` with ``ξ : g·x → y``.
    """
    elems = list(G.morphisms)
    maps = {g: act(g) for g in elems}
    e = G.morphisms[G.ident[0]]
    n = X.n_objects
    if list(maps[e].obj_map) != list(range(n)) or list(maps[e].mor_map) != list(range(X.n_morphisms)):
        raise ValueError("identity does not act trivially")
    for g in elems:
        for h in elems:
            gh = maps[G.comp_labels(g, h)]
            comp = maps[h].then(maps[g])
            if gh.obj_map != comp.obj_map or gh.mor_map != comp.mor_map:
                raise ValueError(f"action law fails for ({g}, {h})")
    inv_obj = {g: {y: x for x, y in enumerate(maps[g].obj_map)} for g in elems}
    mors = []
    for g in elems:
        for xi in range(X.n_morphisms):
            x = inv_obj[g][X.src[xi]]
            mors.append(((g, X.morphisms[xi]), X.objects[x], X.objects[X.tgt[xi]]))

    def compose(b, a):
        h, eta = b
        g, xi = a
        hxi = X.morphisms[maps[h].mor_map[X.mor(xi)]]
        return (G.comp_labels(h, g), X.comp_labels(eta, hxi))

    return FinGroupoid.build(X.objects, mors,
                             lambda o: (e, X.morphisms[X.ident[X.obj(o)]]), compose, name=name)


def homotopy_quotient(G: FinGroupoid, X, act, name=None) -> FinGroupoid:
    """``X//G`` for an action on a finite set (list of points) or a groupoid.

    For sets this is the action groupoid; for groupoids ``act(g)`` must return
    an automorphism of ``X``.
    """
    if isinstance(X, FinGroupoid):
        return groupoid_quotient(G, X, act, name=name)
    return action_groupoid(G, X, act, name=name)


def postcompose_action(p: GroupoidMap, fib: FinGroupoid, b):
    """Action of ``Aut(b)`` on the comma fibre over ``b`` by postcomposition."""
    B = p.target

    def act(g):
        return fibre_transport(p, fib, fib, B.mor(g))

    return act


@dataclass
class FibreDecomposition:
    pieces: list               # (base object label, fibre, Aut group, quotient)
    total: FinGroupoid          # homotopy sum of the fibres
    comparison: GroupoidMap     # total → original groupoid
    is_equivalence: bool
    witness: object

    @property
    def holds(self):
        return self.is_equivalence and self.witness is not None


def fibre_decomposition(p: GroupoidMap) -> FibreDecomposition:
    """``X ≃ Σ_{b ∈ π₀B} X_b // Aut(b)`` with an explicit comparison map."""
    X, B = p.source, p.target
    pieces, quots = [], []
    for c in components(B):
        b = B.objects[c[0]]
        fib = homotopy_fibre(p, b).total
        grp = aut_group(B, b)
        q = groupoid_quotient(grp, fib, postcompose_action(p, fib, b), name=f"X_{b}//Aut")
        pieces.append((b, fib, grp, q))
        quots.append(q)
    total = coproduct(*quots, name="homotopy sum")
    om = [X.obj(o[1][0]) for o in total.objects]
    mm = [X.mor(m[1][1][1]) for m in total.morphisms]
    cmp_map = GroupoidMap(total, X, om, mm)
    witness, _ = compare(total, X)
    return FibreDecomposition(pieces, total, cmp_map, is_equivalence_map(cmp_map), witness)


# -- the adjoint triple -----------------------------------------------------

def dep_sum(f: GroupoidMap, y: FamilyOver) -> FamilyOver:
    """Postcompose the projection with ``f``."""
    if y.base is not f.source:
        raise ValueError("family base must be the source of f")
    return FamilyOver(f.target, y.total, y.projection.then(f))


def base_change(f: GroupoidMap, x: FamilyOver) -> FamilyOver:
    """Homotopy pullback of ``x`` along ``f``; the projection is an isofibration."""
    if x.base is not f.target:
        raise ValueError("family base must be the target of f")
    pb = homotopy_pullback(f, x.projection, name="pullback")
    return FamilyOver(f.source, pb.apex, pb.proj1)


@dataclass
class DepProdData:
    f: GroupoidMap
    q: GroupoidMap                  # isofibration replacing the family's projection
    fibres: list                    # comma fibre of f over each object of the base
    spaces: list                    # LiftSpace per object of the base
    thetas: dict = field(default_factory=dict)   # morphism label -> full component tuple
    transports: dict = field(default_factory=dict)


def _transport(data, alpha):
    T = data.transports.get(alpha)
    if T is None:
        A = data.f.target
        T = fibre_transport(data.f, data.fibres[A.src[alpha]], data.fibres[A.tgt[alpha]], alpha)
        inv_o = [0] * len(T.obj_map)
        for i, j in enumerate(T.obj_map):
            inv_o[j] = i
        inv_m = [0] * len(T.mor_map)
        for i, j in enumerate(T.mor_map):
            inv_m[j] = i
        T = (T, inv_o, inv_m)
        data.transports[alpha] = T
    return T


def act_on_lift(data, alpha, F):
    """Precompose a lift over the source fibre with inverse transport along ``alpha``."""
    _, inv_o, inv_m = _transport(data, alpha)
    return (tuple(F[0][i] for i in inv_o), tuple(F[1][i] for i in inv_m))


def dep_prod(f: GroupoidMap, y: FamilyOver) -> FamilyOver:
    """Dependent product ``f_* y``.

    The fibre over ``a`` is the groupoid of strict sections of (an
    isofibration replacing) ``y`` over the comma fibre ``B_a``; sections are
    normalized along spanning trees, and morphisms over ``α : a → a'`` are
    vertical isos ``α·F ⇒ F'``.
    """
    if y.base is not f.source:
        raise ValueError("family base must be the source of f")
    A = f.target
    q = as_isofibration(y.projection)
    Y = q.source
    fibres, spaces = [], []
    for a in A.objects:
        pb = homotopy_pullback(f, name_object(A, a), name=f"fibre({a})")
        fibres.append(pb.apex)
        spaces.append(LiftSpace(pb.proj1, q, normalized=True))
    check_cap("sections", sum(len(s) for s in spaces))
    data = DepProdData(f, q, fibres, spaces)
    vclass = vertical_classes(q)
    buckets = []
    for sp in spaces:
        bk = {}
        for i, F in enumerate(sp.functors):
            bk.setdefault(sp.root_signature(F, vclass), []).append(i)
        buckets.append(bk)

    objs = [(A.objects[a], i) for a in range(A.n_objects) for i in range(len(spaces[a]))]
    check_cap("objects", len(objs))
    mors = []
    thetas = data.thetas
    n_mor = 0
    for alpha in range(A.n_morphisms):
        a, a2 = A.src[alpha], A.tgt[alpha]
        sp, sp2 = spaces[a], spaces[a2]
        al = A.morphisms[alpha]
        for i, F in enumerate(sp.functors):
            aF = act_on_lift(data, alpha, F)
            for j in buckets[a2].get(sp2.root_signature(aF, vclass), ()):
                for th in sp2.vertical_isos(aF, sp2.functors[j]):
                    lab = (al, i, j, tuple(th[r] for r in sp2.roots))
                    thetas[lab] = th
                    mors.append((lab, (A.objects[a], i), (A.objects[a2], j)))
                    n_mor += 1
            check_cap("sections", n_mor)

    def identity(o):
        a = A.obj(o[0])
        F = spaces[a].functors[o[1]]
        return (A.morphisms[A.ident[a]], o[1], o[1], tuple(Y.ident[F[0][r]] for r in spaces[a].roots))

    def compose(b, a_):
        alpha2 = A.mor(b[0])
        th1, th2 = thetas[a_], thetas[b]
        _, inv_o, _ = _transport(data, alpha2)
        th = tuple(Y.comp(th2[x], th1[inv_o[x]]) for x in range(len(th2)))
        al = A.comp_labels(b[0], a_[0])
        roots = spaces[A.tgt[alpha2]].roots
        lab = (al, a_[1], b[2], tuple(th[r] for r in roots))
        thetas.setdefault(lab, th)
        return lab

    total = FinGroupoid.build(objs, mors, identity, compose, name="dep_prod")
    total.meta["dep_prod"] = data
    proj = GroupoidMap(total, A, [A.obj(o[0]) for o in objs], [A.mor(m[0]) for m in total.morphisms])
    return FamilyOver(A, total, proj)


def dep_prod_fibre(f: GroupoidMap, y: FamilyOver, a, method="general") -> FinGroupoid:
    """Fibre of ``f_* y`` over ``a``.

    ``method="general"`` builds the section groupoid; ``method="discrete"``
    uses the product of the fibres of ``y`` over ``π₀`` of the fibre of ``f``,
    valid only when that fibre is equivalent to a set (``f`` faithful).
    """
    A = f.target
    pb = homotopy_pullback(f, name_object(A, a), name=f"fibre({a})")
    if method == "general":
        return lift_groupoid(LiftSpace(pb.proj1, as_isofibration(y.projection), normalized=True))
    if method != "discrete":
        raise ValueError(f"unknown method {method!r}")
    Fa = pb.apex
    if any(len(Fa.aut(c[0])) != 1 for c in components(Fa)):
        raise ValueError("discrete fast path needs discrete fibres")
    B = f.source
    factors = [homotopy_fibre(y.projection, B.objects[pb.proj1.obj_map[c[0]]]).total
               for c in components(Fa)]
    return product(*factors, name=f"prod_fibre({a})")


def dep_prod_cardinality(f: GroupoidMap, y: FamilyOver) -> Fraction:
    """``|f_* y|`` via the discrete formula ``Σ_[a] Π_e |Y_e| / |Aut a|``."""
    A = f.target
    total = Fraction(0)
    for c in components(A):
        a = A.objects[c[0]]
        Fa = homotopy_pullback(f, name_object(A, a)).apex
        if not Fa.is_discrete():
            raise ValueError("discrete formula needs discrete fibres")
        val = Fraction(1)
        for cc in components(Fa):
            b = Fa.objects[cc[0]][0]
            val *= homotopy_cardinality(homotopy_fibre(y.projection, b).total)
        total += val / len(A.aut(c[0]))
    return total


# -- slice homs and checks ---------------------------------------------------

def slice_mapping_groupoid(base: FinGroupoid, y: FamilyOver, x: FamilyOver) -> FinGroupoid:
    """``Grpd_{/B}(y, x)``: maps over the base with filler 2-cells, and compatible 2-arrows.

    A strict section of the homotopy pullback ``y ×_B x → y`` is exactly a
    functor ``F`` with a 2-cell ``p_y ⇒ p_x ∘ F``; vertical isos between
    sections are exactly the 2-arrows of the slice.
    """
    if y.base is not base or x.base is not base:
        raise ValueError("families must live over the given base")
    pb = homotopy_pullback(y.projection, x.projection, name="slice")
    space = LiftSpace(identity_map(y.total), pb.proj1, normalized=False)
    G = lift_groupoid(space, name="slice_hom")
    G.meta["pullback"] = pb
    return G


def slice_map_at(G: FinGroupoid, i):
    """The ``(F, γ)`` pair encoded by object ``i`` of a slice mapping groupoid."""
    space, pb = G.meta["lifts"], G.meta["pullback"]
    s = space.as_map(i)
    F = s.then(pb.proj2)
    gamma = [pb.apex.objects[o][2] for o in s.obj_map]
    return F, gamma


def families_equivalent(u: FamilyOver, v: FamilyOver):
    """Totals equivalent and homotopy fibres equivalent over every component of the base."""
    if u.base is not v.base:
        return False, "different bases"
    w, why = compare(u.total, v.total)
    if w is None:
        return False, f"totals differ: {why}"
    for c in components(u.base):
        b = u.base.objects[c[0]]
        w, why = compare(u.fibre(b), v.fibre(b))
        if w is None:
            return False, f"fibres over {b!r} differ: {why}"
    return True, "equivalent"


@dataclass
class CheckReport:
    name: str
    ok: bool
    cardinalities: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def line(self):
        cards = ", ".join(f"{k}={v}" for k, v in self.cardinalities.items())
        return f"{self.name}: {'PASS' if self.ok else 'FAIL'}" + (f" [{cards}]" if cards else "")


def fubini_check(f: GroupoidMap, y: FamilyOver) -> CheckReport:
    """``Σ_b Y_b ≃ Σ_a Σ_{b∈B_a} Y_b`` with every stage compared by :func:`compare`."""
    if y.base is not f.source:
        raise ValueError("family base must be the source of f")
    A = f.target
    lhs = fibre_decomposition(y.projection)
    notes = []
    ok = lhs.holds
    if not ok:
        notes.append("fibre decomposition of Y over B failed")
    quots = []
    for c in components(A):
        a = A.objects[c[0]]
        Ba = homotopy_fibre(f, a)
        restricted = base_change(Ba.projection, y)
        inner = fibre_decomposition(restricted.projection)
        if not inner.holds:
            ok = False
            notes.append(f"inner decomposition over {a!r} failed")
        R = restricted.total
        grp = aut_group(A, a)

        def act(g, R=R, Ba=Ba, a=a):
            Bf = Ba.total
            al = A.mor(g)
            T = fibre_transport(f, Bf, Bf, al)
            om = []
            for o in R.objects:
                u = Bf.objects[T.obj_map[Bf.obj(o[0])]]
                om.append(R.obj((u, o[1], o[2])))
            mm = []
            for m in R.morphisms:
                o = m[0]
                u = Bf.objects[T.obj_map[Bf.obj(o[0])]]
                mu = Bf.morphisms[T.mor_map[Bf.mor(m[1])]]
                mm.append(R.mor(((u, o[1], o[2]), mu, m[2])))
            return GroupoidMap(R, R, om, mm)

        quots.append(groupoid_quotient(grp, R, act, name=f"Σ_{a}"))
    rhs = coproduct(*quots, name="iterated sum")
    w, why = compare(lhs.total, rhs)
    if w is None:
        ok = False
        notes.append(f"sides differ: {why}")
    cards = {"lhs": homotopy_cardinality(lhs.total), "rhs": homotopy_cardinality(rhs),
             "total": homotopy_cardinality(y.total)}
    return CheckReport("fubini", ok and cards["lhs"] == cards["rhs"], cards, notes)
