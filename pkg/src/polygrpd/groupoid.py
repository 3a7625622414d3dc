"""Finite groupoids, functors between them, and natural isomorphisms.

Objects and morphisms carry hashable labels; all algorithms work on integer
indices into ``objects`` / ``morphisms``.  Composition is stored as a table
keyed by ``(g, f)`` meaning "first ``f`` then ``g``".  Constructed groupoids
fill the table lazily from a composition rule; loaded groupoids carry it in
full.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import cached_property

from .config import ParseError, check_cap

IDENT_RE = re.compile(r"^[A-Za-z0-9_]+$")


class FinGroupoid:
    def __init__(self, objects, morphisms, src, tgt, identities,
                 compose=None, table=None, name=None):
        self.objects = tuple(objects)
        self.morphisms = tuple(morphisms)
        self.src = tuple(src)
        self.tgt = tuple(tgt)
        self.ident = tuple(identities)
        self._compose = compose
        self._table = dict(table) if table else {}
        self.name = name
        self.meta = {}
        self._oidx = {o: i for i, o in enumerate(self.objects)}
        self._midx = {m: i for i, m in enumerate(self.morphisms)}
        if len(self._oidx) != len(self.objects):
            raise ParseError("duplicate object identifiers")
        if len(self._midx) != len(self.morphisms):
            raise ParseError("duplicate morphism identifiers")

    # -- construction -----------------------------------------------------

    @classmethod
    def build(cls, objects, morphisms, identity, compose, name=None):
        """Build from labels.

        ``morphisms`` is an iterable of ``(label, src_label, tgt_label)`` and
        must include identities; ``identity(obj)`` names the identity of an
        object and ``compose(g, f)`` returns the label of ``g∘f``.
        """
        objects = list(objects)
        check_cap("objects", len(objects))
        oidx = {o: i for i, o in enumerate(objects)}
        labels, src, tgt = [], [], []
        for m, s, t in morphisms:
            labels.append(m)
            src.append(oidx[s])
            tgt.append(oidx[t])
        midx = {m: i for i, m in enumerate(labels)}
        ident = [midx[identity(o)] for o in objects]

        def rule(g, f):
            return midx[compose(labels[g], labels[f])]

        return cls(objects, labels, src, tgt, ident, compose=rule, name=name)

    @classmethod
    def from_table(cls, objects, morphisms, compose, name=None):
        """Build from the interchange form: identities implicit, table explicit.

        ``morphisms`` holds non-identity ``(id, src, tgt)`` triples and
        ``compose`` holds ``(g, f, gf)`` triples.  The table is stored as
        given, so invalid inputs survive for :func:`validate_groupoid`.
        """
        objects = list(objects)
        check_cap("objects", len(objects))
        oset = set(objects)
        if len(oset) != len(objects):
            raise ParseError("duplicate object identifiers")
        labels, src, tgt = [], [], []
        for o in objects:
            labels.append(f"id_{o}")
        for m, s, t in morphisms:
            if s not in oset or t not in oset:
                raise ParseError(f"morphism {m} has unknown endpoint")
            labels.append(m)
        oidx = {o: i for i, o in enumerate(objects)}
        src = [i for i in range(len(objects))] + [oidx[s] for _, s, _ in morphisms]
        tgt = [i for i in range(len(objects))] + [oidx[t] for _, _, t in morphisms]
        if len(set(labels)) != len(labels):
            raise ParseError("duplicate morphism identifiers (ids of the form id_<object> are reserved)")
        midx = {m: i for i, m in enumerate(labels)}
        table = {}
        for entry in compose:
            g, f, gf = entry
            for m in (g, f, gf):
                if m not in midx:
                    raise ParseError(f"composition entry references unknown morphism {m}")
            key = (midx[g], midx[f])
            if key in table and table[key] != midx[gf]:
                raise ParseError(f"conflicting composition entries for {g}∘{f}")
            table[key] = midx[gf]
        ident = list(range(len(objects)))
        for f in range(len(labels)):
            table.setdefault((ident[tgt[f]], f), f)
            table.setdefault((f, ident[src[f]]), f)
        return cls(objects, labels, src, tgt, ident, table=table, name=name)

    # -- basic access -------------------------------------------------------

    def __repr__(self):
        tag = f" {self.name}" if self.name else ""
        return f"<FinGroupoid{tag}: {len(self.objects)} objects, {len(self.morphisms)} morphisms>"

    @property
    def n_objects(self):
        return len(self.objects)

    @property
    def n_morphisms(self):
        return len(self.morphisms)

    def obj(self, label):
        return self._oidx[label]

    def mor(self, label):
        return self._midx[label]

    def has_obj(self, label):
        return label in self._oidx

    def has_mor(self, label):
        return label in self._midx

    def comp(self, g, f):
        """Index of ``g∘f``."""
        key = (g, f)
        r = self._table.get(key)
        if r is None:
            if self._compose is None:
                raise KeyError(f"no composite for {self.morphisms[g]}∘{self.morphisms[f]}")
            r = self._compose(g, f)
            self._table[key] = r
        return r

    def comp_labels(self, g, f):
        return self.morphisms[self.comp(self._midx[g], self._midx[f])]

    def chain(self, *ms):
        """Compose right-to-left: ``chain(h, g, f) == h∘g∘f``."""
        r = ms[-1]
        for m in reversed(ms[:-1]):
            r = self.comp(m, r)
        return r

    def is_identity(self, m):
        return self.ident[self.src[m]] == m

    @cached_property
    def out_of(self):
        out = [[] for _ in self.objects]
        for m, s in enumerate(self.src):
            out[s].append(m)
        return out

    @cached_property
    def hom(self):
        h = {}
        for m in range(len(self.morphisms)):
            h.setdefault((self.src[m], self.tgt[m]), []).append(m)
        return h

    def homset(self, x, y):
        return self.hom.get((x, y), [])

    def aut(self, x):
        return self.hom.get((x, x), [])

    @cached_property
    def inverse(self):
        inv = [None] * len(self.morphisms)
        for f in range(len(self.morphisms)):
            if inv[f] is not None:
                continue
            s, t = self.src[f], self.tgt[f]
            for g in self.homset(t, s):
                if self.comp(g, f) == self.ident[s] and self.comp(f, g) == self.ident[t]:
                    inv[f] = g
                    inv[g] = f
                    break
            else:
                raise ValueError(f"morphism {self.morphisms[f]!r} has no inverse")
        return inv

    def inv(self, f):
        return self.inverse[f]

    def composable_pairs(self):
        for f in range(len(self.morphisms)):
            for g in self.out_of[self.tgt[f]]:
                yield g, f

    @property
    def table(self):
        """The full composition table, materialised on demand."""
        for g, f in self.composable_pairs():
            self.comp(g, f)
        return dict(self._table)

    def is_discrete(self):
        """True when every hom-set has at most one element (equivalent to a set)."""
        return all(len(v) <= 1 for v in self.hom.values())


# -- functors ---------------------------------------------------------------

class GroupoidMap:
    """A functor between finite groupoids, stored as index arrays."""

    def __init__(self, source, target, obj_map, mor_map, name=None):
        self.source = source
        self.target = target
        self.obj_map = tuple(obj_map)
        self.mor_map = tuple(mor_map)
        self.name = name

    def __repr__(self):
        return f"<GroupoidMap {self.name or ''} {self.source!r} -> {self.target!r}>"

    @classmethod
    def from_labels(cls, source, target, object_map, morphism_map=None, name=None):
        """Labels in, labels out.  Identities may be omitted from ``morphism_map``."""
        morphism_map = morphism_map or {}
        om = []
        for o in source.objects:
            if o not in object_map:
                raise ParseError(f"object {o!r} missing from object map")
            om.append(target.obj(object_map[o]))
        mm = []
        for i, m in enumerate(source.morphisms):
            if m in morphism_map:
                mm.append(target.mor(morphism_map[m]))
            elif source.is_identity(i):
                mm.append(target.ident[om[source.src[i]]])
            else:
                raise ParseError(f"morphism {m!r} missing from morphism map")
        return cls(source, target, om, mm, name=name)

    @classmethod
    def from_functions(cls, source, target, on_obj, on_mor, name=None):
        """``on_obj``/``on_mor`` map source labels to target labels."""
        om = [target.obj(on_obj(o)) for o in source.objects]
        mm = [target.mor(on_mor(m)) for m in source.morphisms]
        return cls(source, target, om, mm, name=name)

    def ob(self, x):
        return self.obj_map[x]

    def mo(self, m):
        return self.mor_map[m]

    def ob_label(self, label):
        return self.target.objects[self.obj_map[self.source.obj(label)]]

    def mo_label(self, label):
        return self.target.morphisms[self.mor_map[self.source.mor(label)]]

    def then(self, other):
        """``other ∘ self``."""
        if other.source is not self.target:
            raise ValueError("maps are not composable")
        return GroupoidMap(self.source, other.target,
                           [other.obj_map[o] for o in self.obj_map],
                           [other.mor_map[m] for m in self.mor_map])

    def __matmul__(self, other):
        return other.then(self)

    def validate(self):
        """List every way this fails to be a functor (empty when valid)."""
        S, T = self.source, self.target
        problems = []
        if len(self.obj_map) != S.n_objects or len(self.mor_map) != S.n_morphisms:
            return ["map arrays do not match source size"]
        for m in range(S.n_morphisms):
            fm = self.mor_map[m]
            if T.src[fm] != self.obj_map[S.src[m]] or T.tgt[fm] != self.obj_map[S.tgt[m]]:
                problems.append(f"endpoints not preserved by {S.morphisms[m]!r}")
        for x in range(S.n_objects):
            if self.mor_map[S.ident[x]] != T.ident[self.obj_map[x]]:
                problems.append(f"identity of {S.objects[x]!r} not preserved")
        if problems:
            return problems
        for g, f in S.composable_pairs():
            if self.mor_map[S.comp(g, f)] != T.comp(self.mor_map[g], self.mor_map[f]):
                problems.append(f"composition {S.morphisms[g]!r}∘{S.morphisms[f]!r} not preserved")
        return problems

    def is_faithful(self):
        seen = set()
        for m in range(self.source.n_morphisms):
            key = (self.source.src[m], self.source.tgt[m], self.mor_map[m])
            if key in seen:
                return False
            seen.add(key)
        return True


def identity_map(X):
    return GroupoidMap(X, X, range(X.n_objects), range(X.n_morphisms), name="id")


def terminal_map(X, pt=None):
    pt = pt or point()
    return GroupoidMap(X, pt, [0] * X.n_objects, [0] * X.n_morphisms)


def name_object(X, x, pt=None):
    """The map ``1 → X`` picking out the object labelled ``x``."""
    pt = pt or point()
    i = X.obj(x)
    return GroupoidMap(pt, X, [i], [X.ident[i]], name=f"name({x})")


@dataclass
class TwoCell:
    """Natural isomorphism ``lhs ⇒ rhs``; ``components[x]`` is a target morphism index."""

    lhs: GroupoidMap
    rhs: GroupoidMap
    components: tuple

    def __post_init__(self):
        self.components = tuple(self.components)

    def validate(self):
        F, G = self.lhs, self.rhs
        S, T = F.source, F.target
        problems = []
        if G.source is not S or G.target is not T:
            return ["two-cell between non-parallel maps"]
        for x in range(S.n_objects):
            c = self.components[x]
            if T.src[c] != F.obj_map[x] or T.tgt[c] != G.obj_map[x]:
                problems.append(f"component at {S.objects[x]!r} has wrong endpoints")
        if problems:
            return problems
        for a in range(S.n_morphisms):
            x, y = S.src[a], S.tgt[a]
            if T.comp(self.components[y], F.mor_map[a]) != T.comp(G.mor_map[a], self.components[x]):
                problems.append(f"naturality fails at {S.morphisms[a]!r}")
        return problems


def identity_cell(F):
    T = F.target
    return TwoCell(F, F, [T.ident[y] for y in F.obj_map])


# -- validation -------------------------------------------------------------

@dataclass
class ValidationReport:
    problems: list = field(default_factory=list)

    @property
    def valid(self):
        return not self.problems

    def __bool__(self):
        return self.valid

    def lines(self):
        return ["valid"] if self.valid else [f"invalid: {p}" for p in self.problems]


def validate_groupoid(g: FinGroupoid) -> ValidationReport:
    """Check the groupoid axioms exhaustively; report every failure found."""
    problems = []
    M = g.morphisms
    table = g._table if g._compose is None else g.table

    for (a, b), c in table.items():
        if g.src[a] != g.tgt[b]:
            problems.append(f"composite defined for non-composable pair {M[a]}∘{M[b]}")
        elif g.src[c] != g.src[b] or g.tgt[c] != g.tgt[a]:
            problems.append(f"composite {M[a]}∘{M[b]} = {M[c]} has wrong endpoints")
    for a, b in g.composable_pairs():
        if (a, b) not in table:
            problems.append(f"composition not total: {M[a]}∘{M[b]} missing")
    for f in range(len(M)):
        s, t = g.src[f], g.tgt[f]
        if table.get((g.ident[t], f), f) != f or table.get((f, g.ident[s]), f) != f:
            problems.append(f"identity law violated at {M[f]}")
        if not g.is_identity(f) and s == t and table.get((f, f)) == f:
            problems.append(f"identity law violated: {M[f]}∘{M[f]} = {M[f]} but {M[f]} is not an identity")
    if problems:
        # associativity and inverses need a well-typed total table
        return ValidationReport(problems + _inverse_problems(g, table))
    for a, b in g.composable_pairs():
        ab = table[(a, b)]
        for c in g.out_of[g.tgt[a]]:
            if table[(c, ab)] != table[(table[(c, a)], b)]:
                problems.append(f"associativity fails for ({M[c]}, {M[a]}, {M[b]})")
    return ValidationReport(problems + _inverse_problems(g, table))


def _inverse_problems(g, table):
    problems = []
    for f in range(g.n_morphisms):
        s, t = g.src[f], g.tgt[f]
        if not any(table.get((h, f)) == g.ident[s] and table.get((f, h)) == g.ident[t]
                   for h in g.homset(t, s)):
            problems.append(f"no inverse for {g.morphisms[f]}")
    return problems


# -- builders ---------------------------------------------------------------

def point(name="1"):
    return FinGroupoid(["pt"], ["id_pt"], [0], [0], [0], table={(0, 0): 0}, name=name)


def discrete(n, prefix="x"):
    objs = [f"{prefix}{i}" for i in range(n)]
    return FinGroupoid(objs, [f"id_{o}" for o in objs], range(n), range(n), range(n),
                       table={(i, i): i for i in range(n)}, name=f"discrete({n})")


def one_object(elements, mul, identity, obj="pt", name=None):
    """One-object groupoid with vertex group given by a multiplication table.

    ``mul`` is a dict or callable with ``mul(a, b) = a∘b``.
    """
    elements = list(elements)
    op = mul if callable(mul) else (lambda a, b: mul[(a, b)])
    eset = set(elements)
    if identity not in eset:
        raise ValueError("identity is not an element")
    for a in elements:
        if op(identity, a) != a or op(a, identity) != a:
            raise ValueError(f"{a!r}: identity law fails")
        if not any(op(a, b) == identity for b in elements):
            raise ValueError(f"{a!r} has no inverse")
        for b in elements:
            if op(a, b) not in eset:
                raise ValueError("group table not closed")
    for a, b, c in itertools.product(elements, repeat=3):
        if op(op(a, b), c) != op(a, op(b, c)):
            raise ValueError("group table not associative")
    return FinGroupoid.build([obj], [(e, obj, obj) for e in elements],
                             lambda _: identity, op, name=name)


def cyclic(n):
    """``BC_n``: one object, rotations ``r0 .. r{n-1}``."""
    if n < 1:
        raise ValueError("cyclic group needs n >= 1")
    return one_object([f"r{j}" for j in range(n)],
                      lambda a, b: f"r{(int(a[1:]) + int(b[1:])) % n}", "r0", name=f"BC{n}")


def perm_label(p):
    return "p" + "_".join(map(str, p))


def parse_perm(label):
    body = label[1:]
    return tuple(int(t) for t in body.split("_")) if body else ()


def compose_perm(p, q):
    """``p∘q`` as tuples of images."""
    return tuple(p[i] for i in q)


def invert_perm(p):
    r = [0] * len(p)
    for i, j in enumerate(p):
        r[j] = i
    return tuple(r)


def symmetric(n):
    """``BS_n``: one object, permutations as image tuples."""
    perms = list(itertools.permutations(range(n)))
    return one_object([perm_label(p) for p in perms],
                      lambda a, b: perm_label(compose_perm(parse_perm(a), parse_perm(b))),
                      perm_label(tuple(range(n))), name=f"BS{n}")


def group_elements(G):
    """Labels of the vertex group of a one-object groupoid."""
    if G.n_objects != 1:
        raise ValueError("expected a one-object groupoid")
    return list(G.morphisms)


def action_groupoid(G, points, act, name=None):
    """Action groupoid of a group acting on a finite set.

    ``G`` is a one-object groupoid; ``act(g, x)`` (or a dict keyed by
    ``(g, x)``) gives ``g·x``.  Morphisms are labelled ``(g, x)`` and go
    ``x → g·x``.
    """
    points = list(points)
    op = act if callable(act) else (lambda g, x: act[(g, x)])
    pset = set(points)
    e = G.morphisms[G.ident[0]]
    for x in points:
        if op(e, x) != x:
            raise ValueError(f"action law fails: e·{x!r} != {x!r}")
        for g in G.morphisms:
            if op(g, x) not in pset:
                raise ValueError("action does not land in the set")
    for g, h in itertools.product(G.morphisms, repeat=2):
        gh = G.comp_labels(g, h)
        for x in points:
            if op(gh, x) != op(g, op(h, x)):
                raise ValueError(f"action law fails: ({g}{h})·{x!r}")
    mors = [((g, x), x, op(g, x)) for x in points for g in G.morphisms]
    return FinGroupoid.build(points, mors, lambda x: (e, x),
                             lambda b, a: (G.comp_labels(b[0], a[0]), a[1]), name=name)


def coproduct(*gs, name=None):
    """Disjoint union; labels become ``(i, label)``."""
    objs, mors = [], []
    for i, g in enumerate(gs):
        objs += [(i, o) for o in g.objects]
        mors += [((i, m), (i, g.objects[g.src[k]]), (i, g.objects[g.tgt[k]]))
                 for k, m in enumerate(g.morphisms)]
    return FinGroupoid.build(
        objs, mors,
        lambda o: (o[0], gs[o[0]].morphisms[gs[o[0]].ident[gs[o[0]].obj(o[1])]]),
        lambda b, a: (a[0], gs[a[0]].comp_labels(b[1], a[1])), name=name)


def product(*gs, name=None):
    """Cartesian product; labels become tuples (the empty product is a point)."""
    objs = list(itertools.product(*[g.objects for g in gs]))
    check_cap("objects", len(objs))
    mors = []
    for combo in itertools.product(*[range(g.n_morphisms) for g in gs]):
        lab = tuple(g.morphisms[m] for g, m in zip(gs, combo))
        s = tuple(g.objects[g.src[m]] for g, m in zip(gs, combo))
        t = tuple(g.objects[g.tgt[m]] for g, m in zip(gs, combo))
        mors.append((lab, s, t))
    return FinGroupoid.build(
        objs, mors,
        lambda o: tuple(g.morphisms[g.ident[g.obj(x)]] for g, x in zip(gs, o)),
        lambda b, a: tuple(g.comp_labels(y, x) for g, y, x in zip(gs, b, a)), name=name)


def power(g, k):
    return product(*([g] * k), name=f"{g.name}^{k}" if g.name else None)


def projection(prod, i, factor):
    """The ``i``-th projection out of :func:`product`."""
    return GroupoidMap.from_functions(prod, factor, lambda o: o[i], lambda m: m[i])
