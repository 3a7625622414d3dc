"""Polynomial diagrams ``I ← E → B → J`` over finite groupoids.

The extension of a polynomial sends a family over ``I`` to
``t_! p_* s^*`` of it.  Cartesian morphisms of polynomials, one-variable
composition and the Beck-Chevalley conditions are built on the operations of
:mod:`polygrpd.homotopy`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .groupoid import (FinGroupoid, GroupoidMap, TwoCell, ValidationReport, discrete,
                       identity_cell, identity_map, point, terminal_map)
from .homotopy import (CheckReport, FamilyOver, _transport, base_change, constant_family,
                       dep_prod, dep_sum, families_equivalent, homotopy_fibre,
                       homotopy_pullback)
from .invariants import (components, homotopy_cardinality, is_equivalence_map, skeletal_inclusion,
                         skeleton)


@dataclass
class PolyDiagram:
    I: FinGroupoid
    E: FinGroupoid
    B: FinGroupoid
    J: FinGroupoid
    s: GroupoidMap
    p: GroupoidMap
    t: GroupoidMap
    truncation: int | None = None
    name: str | None = None

    def __repr__(self):
        return (f"<PolyDiagram {self.name or ''} E={self.E.n_objects} objects, "
                f"B={self.B.n_objects} objects>")

    @property
    def one_variable(self):
        return self.I.n_objects == 1 and self.J.n_objects == 1 and len(self.I.aut(0)) == 1 \
            and len(self.J.aut(0)) == 1


def _same(a, b):
    if a is b:
        return True
    return (a.objects == b.objects and a.morphisms == b.morphisms
            and a.src == b.src and a.tgt == b.tgt)


def validate_polynomial(P: PolyDiagram) -> ValidationReport:
    problems = []
    for nm, m, src, tgt in (("s", P.s, P.E, P.I), ("p", P.p, P.E, P.B), ("t", P.t, P.B, P.J)):
        if not _same(m.source, src):
            problems.append(f"endpoint mismatch: {nm}.source is not {'E' if src is P.E else 'B'}")
            continue
        if not _same(m.target, tgt):
            problems.append(f"endpoint mismatch: {nm}.target is not {'IBJ'[[P.I, P.B, P.J].index(tgt)]}")
            continue
        problems += [f"{nm}: {q}" for q in m.validate()]
    return ValidationReport(problems)


def identity_polynomial():
    one = point()
    idm = identity_map(one)
    return PolyDiagram(one, one, one, one, idm, idm, idm, name="identity")


def from_span(f: GroupoidMap, g: GroupoidMap) -> PolyDiagram:
    """The polynomial ``I ← E = E → J`` of a span."""
    if f.source is not g.source:
        raise ValueError("span legs must share a source")
    E = f.source
    return PolyDiagram(f.target, E, E, g.target, f, identity_map(E), g, name="span")


def extend(P: PolyDiagram, x: FamilyOver) -> FamilyOver:
    """Evaluate the extension on a family over ``I``."""
    if not _same(x.base, P.I):
        raise ValueError("family must live over I")
    if x.base is not P.I:
        x = FamilyOver(P.I, x.total, GroupoidMap(x.total, P.I, x.projection.obj_map, x.projection.mor_map))
    return dep_sum(P.t, dep_prod(P.p, base_change(P.s, x)))


def extend_groupoid(P: PolyDiagram, X: FinGroupoid) -> FinGroupoid:
    """Extension of a one-variable polynomial at a plain groupoid (a family over the point)."""
    return extend(P, FamilyOver(P.I, X, terminal_map(X, P.I))).total


@dataclass
class FibreReport:
    entries: list = field(default_factory=list)   # (shape, component count, discrete, aut trivial)

    def lines(self):
        return [f"{b}: {n} components, discrete={d}, trivial_aut={a}" for b, n, d, a in self.entries]


def is_combinatorial(P: PolyDiagram):
    """``(verdict, report)``: every homotopy fibre of ``p`` equivalent to a finite set."""
    rep = FibreReport()
    ok = True
    for c in components(P.B):
        b = P.B.objects[c[0]]
        fib = homotopy_fibre(P.p, b).total
        comps = components(fib)
        trivial = all(len(fib.aut(cc[0])) == 1 for cc in comps)
        rep.entries.append((b, len(comps), fib.is_discrete(), trivial))
        ok = ok and trivial
    return ok, rep


# -- composition --------------------------------------------------------------

def compose1(outer: PolyDiagram, inner: PolyDiagram) -> PolyDiagram:
    """One-variable composite whose extension is ``outer ∘ inner``.

    Shapes are ``extend(outer, B_inner)``: an outer shape with every slot
    filled by an inner shape.  Positions are an outer position together with
    an inner position of the shape filling it.
    """
    if not (outer.one_variable and inner.one_variable):
        raise ValueError("compose1 needs one-variable polynomials")
    Q, P = outer, inner
    shapes = FamilyOver(Q.I, P.B, terminal_map(P.B, Q.I))
    fam = dep_prod(Q.p, base_change(Q.s, shapes))
    Bn = fam.total
    data = Bn.meta["dep_prod"]
    Y = data.q.source
    D = homotopy_pullback(fam.projection, Q.p, name="slots")
    Dg = D.apex
    BQ = Q.B

    def slot(o):
        (a, i), e, phi = o
        a_ = BQ.obj(a)
        X = data.fibres[a_]
        return a_, i, X.obj((e, "pt", BQ.morphisms[BQ.inv(BQ.mor(phi))]))

    om = []
    for o in Dg.objects:
        a_, i, x = slot(o)
        F = data.spaces[a_].functors[i]
        om.append(P.B.obj(Y.objects[F[0][x]][1]))
    mm = []
    for m in Dg.morphisms:
        o, mu, eps = m
        a_, i, x = slot(o)
        beta = BQ.mor(mu[0])
        a2 = BQ.tgt[beta]
        X2 = data.fibres[a2]
        T, _, _ = _transport(data, beta)
        tx = T.obj_map[x]
        conn = X2.mor((X2.objects[tx], eps, "id_pt"))
        F2 = data.spaces[a2].functors[mu[2]]
        th = data.thetas[mu]
        ym = Y.comp(F2[1][conn], th[tx])
        mm.append(P.B.mor(Y.morphisms[ym][2]))
    ev = GroupoidMap(Dg, P.B, om, mm, name="ev")
    Epb = homotopy_pullback(ev, P.p, name="positions")
    pn = Epb.proj1.then(D.proj1)
    # the triple models are large; pass to skeleta (an equivalent diagram)
    Es, inc = skeletal_inclusion(Epb.apex)
    skB = skeleton(Bn)
    ps = inc.then(pn).then(skB.retraction)
    Bs, one = skB.skeleton, Q.I
    return PolyDiagram(one, Es, Bs, Q.J, terminal_map(Es, one), ps, terminal_map(Bs, Q.J),
                       truncation=None, name=f"{Q.name}∘{P.name}")


# -- morphisms of polynomials ---------------------------------------------------

@dataclass
class PolySquare:
    """A morphism ``P' → P`` over fixed ``I`` and ``J``.

    ``middle : p∘uE ⇒ uB∘p'``, ``over_I : s∘uE ⇒ s'`` and ``over_J : t∘uB ⇒ t'``.
    """

    source: PolyDiagram
    target: PolyDiagram
    uE: GroupoidMap
    uB: GroupoidMap
    middle: TwoCell
    over_I: TwoCell
    over_J: TwoCell

    def validate(self):
        problems = []
        for nm, c in (("middle", self.middle), ("over_I", self.over_I), ("over_J", self.over_J)):
            problems += [f"{nm}: {q}" for q in c.validate()]
        return problems

    def then(self, other: "PolySquare") -> "PolySquare":
        """Vertical composite ``P1 → P2 → P3`` (``self`` first)."""
        if other.source is not self.target:
            raise ValueError("squares do not compose")
        P1, P3 = self.source, other.target
        uE, uB = self.uE.then(other.uE), self.uB.then(other.uB)
        B3, I, J = P3.B, P3.I, P3.J
        m1, m2 = self.middle.components, other.middle.components
        middle = [B3.comp(other.uB.mor_map[m1[x]], m2[self.uE.obj_map[x]]) for x in range(P1.E.n_objects)]
        o1, o2 = self.over_I.components, other.over_I.components
        over_I = [I.comp(o1[x], o2[self.uE.obj_map[x]]) for x in range(P1.E.n_objects)]
        j1, j2 = self.over_J.components, other.over_J.components
        over_J = [J.comp(j1[b], j2[self.uB.obj_map[b]]) for b in range(P1.B.n_objects)]
        return PolySquare(P1, P3, uE, uB,
                          TwoCell(uE.then(P3.p), P1.p.then(uB), middle),
                          TwoCell(uE.then(P3.s), P1.s, over_I),
                          TwoCell(uB.then(P3.t), P1.t, over_J))


def strict_square(source, target, uE, uB):
    """Square whose cells are identities (everything commutes on the nose)."""
    P2, P = source, target
    mid_l, mid_r = uE.then(P.p), P2.p.then(uB)
    sI_l = uE.then(P.s)
    tJ_l = uB.then(P.t)
    for a, b in ((mid_l, mid_r), (sI_l, P2.s), (tJ_l, P2.t)):
        if a.obj_map != b.obj_map or a.mor_map != b.mor_map:
            raise ValueError("square does not commute strictly")
    return PolySquare(P2, P, uE, uB, TwoCell(mid_l, mid_r, identity_cell(mid_l).components),
                      TwoCell(sI_l, P2.s, identity_cell(sI_l).components),
                      TwoCell(tJ_l, P2.t, identity_cell(tJ_l).components))


def identity_square(P):
    return strict_square(P, P, identity_map(P.E), identity_map(P.B))


def cartesian_gap_map(sq: PolySquare):
    """``E' → E ×_B B'`` induced by the square, into the triple-model pullback."""
    P2, P = sq.source, sq.target
    pb = homotopy_pullback(P.p, sq.uB, name="gap")
    A = pb.apex
    E2, E, B2, B = P2.E, P.E, P2.B, P.B
    om, mm = [], []
    for e in range(E2.n_objects):
        om.append(A.obj((E.objects[sq.uE.obj_map[e]], B2.objects[P2.p.obj_map[e]],
                         B.morphisms[sq.middle.components[e]])))
    for a in range(E2.n_morphisms):
        src = A.objects[om[E2.src[a]]]
        mm.append(A.mor((src, E.morphisms[sq.uE.mor_map[a]], B2.morphisms[P2.p.mor_map[a]])))
    return GroupoidMap(E2, A, om, mm, name="gap"), pb


def is_homotopy_cartesian(sq: PolySquare) -> bool:
    gap, _ = cartesian_gap_map(sq)
    return is_equivalence_map(gap)


class _FibreComparison:
    """The equivalence ``X'_{b'} → X_{u b'}`` between comma fibres and a chosen inverse."""

    def __init__(self, sq, X2, X):
        P2, P = sq.source, sq.target
        B = P.B
        E2, E = P2.E, P.E
        om = []
        for o in X2.objects:
            e2 = E2.obj(o[0])
            phi = B.comp(sq.uB.mor_map[P2.B.mor(o[2])], sq.middle.components[e2])
            om.append(X.obj((E.objects[sq.uE.obj_map[e2]], "pt", B.morphisms[phi])))
        mm = []
        for m in X2.morphisms:
            s = X.objects[om[X2.obj(m[0])]]
            mm.append(X.mor((s, E.morphisms[sq.uE.mor_map[E2.mor(m[1])]], "id_pt")))
        self.u = GroupoidMap(X2, X, om, mm)
        self.X2, self.X = X2, X
        self.back = {}
        for m in range(X2.n_morphisms):
            self.back[(X2.src[m], X2.tgt[m], mm[m])] = m
        first = {}
        comp_of = {}
        for ci, c in enumerate(components(X)):
            for o in c:
                comp_of[o] = ci
        for o2 in range(X2.n_objects):
            first.setdefault(comp_of[om[o2]], o2)
        self.k, self.w = [], []
        for o in range(X.n_objects):
            o2 = first.get(comp_of[o])
            if o2 is None:
                raise ValueError("fibre map is not essentially surjective")
            self.k.append(o2)
            self.w.append(min(X.homset(om[o2], o)))

    def lift(self, s2, t2, m):
        """The unique ``m' : s2 → t2`` with ``u(m') = m``."""
        r = self.back.get((s2, t2, m))
        if r is None:
            raise ValueError("fibre map is not fully faithful")
        return r


def apply_poly_morphism(sq: PolySquare, x: FamilyOver) -> GroupoidMap:
    """The map ``extend(P')(x) → extend(P)(x)`` induced by a cartesian square."""
    if not is_homotopy_cartesian(sq):
        raise ValueError("square is not homotopy cartesian")
    P2, P = sq.source, sq.target
    lhs = extend(P2, x).total
    rhs = extend(P, x).total
    d2, d = lhs.meta["dep_prod"], rhs.meta["dep_prod"]
    Y2, Y = d2.q.source, d.q.source
    I = P.I
    E = P.E
    # V : Y' → Y on the base-changed families
    vo, vm = [], []
    for o in Y2.objects:
        e2 = P2.E.obj(o[0])
        c = sq.over_I.components[e2]
        vo.append(Y.obj((E.objects[sq.uE.obj_map[e2]], o[1], I.comp_labels(o[2], I.morphisms[c]))))
    for m in Y2.morphisms:
        s = Y.objects[vo[Y2.obj(m[0])]]
        vm.append(Y.mor((s, E.morphisms[sq.uE.mor_map[P2.E.mor(m[1])]], m[2])))
    comps = {}

    def comparison(b2):
        r = comps.get(b2)
        if r is None:
            r = _FibreComparison(sq, d2.fibres[b2], d.fibres[sq.uB.obj_map[b2]])
            comps[b2] = r
        return r

    images = {}

    def image(b2, i):
        key = (b2, i)
        if key in images:
            return images[key]
        fc = comparison(b2)
        b = sq.uB.obj_map[b2]
        X = fc.X
        sp = d.spaces[b]
        F = d2.spaces[b2].functors[i]
        g = sp.g
        L = []
        for o in range(X.n_objects):
            start = vo[F[0][fc.k[o]]]
            L.append(sp.index.lifts(start, g.mor_map[fc.w[o]])[0])
        objs = tuple(Y.tgt[l] for l in L)
        mors = []
        for m in range(X.n_morphisms):
            s, t = X.src[m], X.tgt[m]
            km = fc.lift(fc.k[s], fc.k[t], X.chain(X.inv(fc.w[t]), m, fc.w[s]))
            mors.append(Y.chain(L[t], vm[F[1][km]], Y.inv(L[s])))
        G = (objs, tuple(mors))
        j, n = sp.normalize(G)
        images[key] = (j, n, L)
        return images[key]

    B2, B = P2.B, P.B
    om = []
    for (b2l, i) in lhs.objects:
        b2 = B2.obj(b2l)
        om.append(rhs.obj((B.objects[sq.uB.obj_map[b2]], image(b2, i)[0])))
    mm = []
    for lab in lhs.morphisms:
        beta2 = B2.mor(lab[0])
        b21, b22 = B2.src[beta2], B2.tgt[beta2]
        beta = sq.uB.mor_map[beta2]
        j1, n1, L1 = image(b21, lab[1])
        j2, n2, L2 = image(b22, lab[2])
        fc1, fc2 = comparison(b21), comparison(b22)
        X1 = fc1.X
        F1 = d2.spaces[b21].functors[lab[1]]
        theta = d2.thetas[lab]
        _, inv_o, inv_m = _transport(d, beta)
        T2, _, _ = _transport(d2, beta2)
        inv_t2 = {v: k for k, v in enumerate(T2.obj_map)}
        out = []
        for o in range(fc2.X.n_objects):
            po = inv_o[o]
            ko = fc2.k[o]
            pre_k = inv_t2[ko]
            w2_back = inv_m[fc2.w[o]]
            zeta = X1.comp(X1.inv(w2_back), fc1.w[po])
            zeta2 = fc1.lift(fc1.k[po], pre_k, zeta)
            hat = Y.chain(L2[o], vm[theta[ko]], vm[F1[1][zeta2]], Y.inv(L1[po]))
            out.append(Y.chain(n2[o], hat, Y.inv(n1[po])))
        roots = d.spaces[B.tgt[beta]].roots
        mm.append(rhs.mor((B.morphisms[beta], j1, j2, tuple(out[r] for r in roots))))
    return GroupoidMap(lhs, rhs, om, mm, name="poly_morphism")


# -- Beck-Chevalley -------------------------------------------------------------

def beck_chevalley_check(f: GroupoidMap, g: GroupoidMap, family_y=None, family_x=None,
                         square=None) -> CheckReport:
    """Both Beck-Chevalley equivalences for the square over the cospan ``X → Z ← Y``.

    ``square`` is a ``PullbackResult``-like object (``apex``, ``proj1``,
    ``proj2``, ``comparison``); by default the homotopy pullback is used.
    ``family_y`` is pushed along ``g`` and pulled back; ``family_x`` is
    pushed forward along ``f`` with dependent product.  Both default to the
    constant family with fibre ``discrete(2)``.
    """
    X, Yg = f.source, g.source
    sq = square or homotopy_pullback(f, g, name="square")
    notes = []
    ok = True
    gap, _ = _square_gap(f, g, sq)
    if not is_equivalence_map(gap):
        return CheckReport("beck-chevalley", False, {}, ["square is not homotopy cartesian"])
    w = family_y or constant_family(Yg, discrete(2))
    v = family_x or constant_family(X, discrete(2))
    lhs1 = base_change(f, dep_sum(g, w))
    rhs1 = dep_sum(sq.proj1, base_change(sq.proj2, w))
    r1, why1 = families_equivalent(lhs1, rhs1)
    if not r1:
        ok = False
        notes.append(f"pullback of sum: {why1}")
    lhs2 = base_change(g, dep_prod(f, v))
    rhs2 = dep_prod(sq.proj2, base_change(sq.proj1, v))
    r2, why2 = families_equivalent(lhs2, rhs2)
    if not r2:
        ok = False
        notes.append(f"pullback of product: {why2}")
    cards = {"sum_lhs": homotopy_cardinality(lhs1.total), "sum_rhs": homotopy_cardinality(rhs1.total),
             "prod_lhs": homotopy_cardinality(lhs2.total), "prod_rhs": homotopy_cardinality(rhs2.total)}
    return CheckReport("beck-chevalley", ok, cards, notes)


def _square_gap(f, g, sq):
    pb = homotopy_pullback(f, g)
    A, S = sq.apex, f.target
    X, Yg = f.source, g.source
    om, mm = [], []
    for o in range(A.n_objects):
        om.append(pb.apex.obj((X.objects[sq.proj1.obj_map[o]], Yg.objects[sq.proj2.obj_map[o]],
                               S.morphisms[sq.comparison.components[o]])))
    for m in range(A.n_morphisms):
        src = pb.apex.objects[om[A.src[m]]]
        mm.append(pb.apex.mor((src, X.morphisms[sq.proj1.mor_map[m]],
                               Yg.morphisms[sq.proj2.mor_map[m]])))
    return GroupoidMap(A, pb.apex, om, mm), pb
