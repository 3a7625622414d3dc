"""Species in groupoids and the finite-set groupoids they live over.

Every builder is truncated at ``n`` (underlying sets of size at most ``n``).
Unpointed builders are skeletal.  Pointed builders are the coverings with one
object per (size, marked point), so the forgetful map has the marked set as
its strict fibre.

Object labels: ``n{k}`` finite sets, ``c{k}`` cyclic orders, ``l{k}``
linear orders, with a ``p{i}`` suffix for the marked point.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
import inspect
from functools import lru_cache, wraps

from .groupoid import (FinGroupoid, GroupoidMap, compose_perm, coproduct, discrete,
                       parse_perm, perm_label, point, product, terminal_map)
from .homotopy import fibre_transport, homotopy_fibre, homotopy_pullback, groupoid_quotient
from .invariants import aut_group, components, homotopy_cardinality
from .polynomial import PolyDiagram, extend_groupoid, is_combinatorial, strict_square


ONE = point()


def _cached(fn):
    """Memoize on the normalized argument list, so builders return shared objects."""
    sig = inspect.signature(fn)
    inner = lru_cache(maxsize=None)(fn)

    @wraps(fn)
    def wrapper(*args, **kwargs):
        bound = sig.bind(*args, **kwargs)
        bound.apply_defaults()
        return inner(*bound.args)

    return wrapper


def _perms(k):
    return list(itertools.permutations(range(k)))


def _rot(k, j):
    return tuple((i + j) % k for i in range(k))


@_cached
def b_omega(n):
    """Finite sets of size ≤ n and bijections."""
    objs = [f"n{k}" for k in range(n + 1)]
    mors = [(perm_label(s), f"n{k}", f"n{k}") for k in range(n + 1) for s in _perms(k)]
    return FinGroupoid.build(
        objs, mors, lambda o: perm_label(tuple(range(int(o[1:])))),
        lambda b, a: perm_label(compose_perm(parse_perm(b), parse_perm(a))), name=f"B{n}")


def _split_at(label):
    head, _, i = label.rpartition("x")
    return head, int(i)


@_cached
def b_omega_pointed(n):
    """Pointed finite sets: objects ``n{k}p{i}``, morphisms ``σ x i : (k,i) → (k,σ i)``."""
    objs = [f"n{k}p{i}" for k in range(1, n + 1) for i in range(k)]
    mors = [(f"{perm_label(s)}x{i}", f"n{k}p{i}", f"n{k}p{s[i]}")
            for k in range(1, n + 1) for i in range(k) for s in _perms(k)]

    def ident(o):
        k, i = o[1:].split("p")
        return f"{perm_label(tuple(range(int(k))))}x{i}"

    def comp(b, a):
        sb, _ = _split_at(b)
        sa, i = _split_at(a)
        return f"{perm_label(compose_perm(parse_perm(sb), parse_perm(sa)))}x{i}"

    return FinGroupoid.build(objs, mors, ident, comp, name=f"B'{n}")


@_cached
def b_omega_projection(n):
    P, B = b_omega_pointed(n), b_omega(n)
    return GroupoidMap.from_functions(P, B, lambda o: o.split("p")[0], lambda m: _split_at(m)[0])


def _ks(n, with_empty):
    return range(0 if with_empty else 1, n + 1)


@_cached
def c_omega(n, with_empty=False):
    """Cyclically ordered sets of size 1..n (0..n with ``with_empty``) and rotations."""
    ks = _ks(n, with_empty)
    objs = [f"c{k}" for k in ks]
    mors = [(f"c{k}r{j}", f"c{k}", f"c{k}") for k in ks for j in range(max(k, 1))]

    def comp(b, a):
        k, jb = b[1:].split("r")
        ja = a.split("r")[1]
        return f"c{k}r{(int(jb) + int(ja)) % max(int(k), 1)}"

    return FinGroupoid.build(objs, mors, lambda o: f"{o}r0", comp, name=f"C{n}")


@_cached
def c_omega_pointed(n, with_empty=False):
    """Pointed cyclic orders: ``c{k}r{j}x{i} : c{k}p{i} → c{k}p{i+j}``."""
    ks = [k for k in _ks(n, with_empty) if k > 0]
    objs = [f"c{k}p{i}" for k in ks for i in range(k)]
    mors = [(f"c{k}r{j}x{i}", f"c{k}p{i}", f"c{k}p{(i + j) % k}")
            for k in ks for i in range(k) for j in range(k)]

    def comp(b, a):
        rb, _ = _split_at(b)
        ra, i = _split_at(a)
        k, jb = rb[1:].split("r")
        ja = ra.split("r")[1]
        return f"c{k}r{(int(jb) + int(ja)) % int(k)}x{i}"

    return FinGroupoid.build(objs, mors, lambda o: f"{o.split('p')[0]}r0x{o.split('p')[1]}",
                             comp, name=f"C'{n}")


@_cached
def c_omega_projection(n, with_empty=False):
    P, C = c_omega_pointed(n, with_empty), c_omega(n, with_empty)
    return GroupoidMap.from_functions(P, C, lambda o: o.split("p")[0], lambda m: _split_at(m)[0])


@_cached
def lin(n):
    """Linearly ordered sets of size ≤ n; rigid, so discrete."""
    return discrete(n + 1, prefix="l")


@_cached
def lin_pointed(n):
    objs = [f"l{k}p{i}" for k in range(1, n + 1) for i in range(k)]
    return FinGroupoid.build(objs, [(f"id_{o}", o, o) for o in objs], lambda o: f"id_{o}",
                             lambda b, a: a, name=f"L'{n}")


@_cached
def lin_projection(n):
    P, L = lin_pointed(n), lin(n)
    return GroupoidMap.from_functions(P, L, lambda o: o.split("p")[0], lambda m: m.split("p")[0])


def _rot_label(m):
    k, j = m[1:].split("r")
    return perm_label(_rot(int(k), int(j)))


@_cached
def cyclic_to_sets(n, with_empty=False):
    """``C → B`` and ``C' → B'``: a rotation as a permutation."""
    C, B = c_omega(n, with_empty), b_omega(n)
    base = GroupoidMap.from_functions(C, B, lambda o: "n" + o[1:], _rot_label)
    Cp, Bp = c_omega_pointed(n, with_empty), b_omega_pointed(n)

    def on_mor(m):
        r, i = _split_at(m)
        return f"{_rot_label(r)}x{i}"

    top = GroupoidMap.from_functions(Cp, Bp, lambda o: "n" + o[1:], on_mor)
    return top, base


@_cached
def lin_to_cyclic(n):
    """``L → C`` and ``L' → C'`` (cyclic side includes the empty set)."""
    L, C = lin(n), c_omega(n, True)
    base = GroupoidMap.from_functions(L, C, lambda o: "c" + o[1:], lambda m: "c" + m[4:] + "r0")
    Lp, Cp = lin_pointed(n), c_omega_pointed(n, True)

    def on_mor(m):
        k, i = m[4:].split("p")
        return f"c{k}r0x{i}"

    top = GroupoidMap.from_functions(Lp, Cp, lambda o: "c" + o[1:], on_mor)
    return top, base


# -- canonical polynomials -------------------------------------------------------

def _one_variable(E, B, p, name, n):
    return PolyDiagram(ONE, E, B, ONE, terminal_map(E, ONE), p, terminal_map(B, ONE),
                       truncation=n, name=name)


@_cached
def list_polynomial(n):
    return _one_variable(lin_pointed(n), lin(n), lin_projection(n), f"list{n}", n)


@_cached
def multiset_polynomial(n):
    return _one_variable(b_omega_pointed(n), b_omega(n), b_omega_projection(n), f"multiset{n}", n)


@_cached
def cyclic_polynomial(n, with_empty=False):
    return _one_variable(c_omega_pointed(n, with_empty), c_omega(n, with_empty),
                         c_omega_projection(n, with_empty), f"cyclic{n}", n)


def lists_to_cyclic_square(n):
    top, base = lin_to_cyclic(n)
    return strict_square(list_polynomial(n), cyclic_polynomial(n, True), top, base)


def cyclic_to_multiset_square(n, with_empty=True):
    top, base = cyclic_to_sets(n, with_empty)
    return strict_square(cyclic_polynomial(n, with_empty), multiset_polynomial(n), top, base)


# -- species -----------------------------------------------------------------------

@dataclass
class Species:
    truncation: int
    total: FinGroupoid
    structure: GroupoidMap
    name: str | None = None

    def __post_init__(self):
        if self.structure.source is not self.total or self.structure.target is not b_omega(self.truncation):
            raise ValueError("structure map must go from total to the truncated finite-set groupoid")

    def fibre(self, k):
        return homotopy_fibre(self.structure, f"n{k}").total


def multiset_species(n):
    B = b_omega(n)
    return Species(n, B, GroupoidMap(B, B, range(B.n_objects), range(B.n_morphisms)), "multiset")


def linear_species(n):
    L, B = lin(n), b_omega(n)
    return Species(n, L, GroupoidMap.from_functions(L, B, lambda o: "n" + o[1:],
                                                    lambda m: perm_label(tuple(range(int(m[4:]))))),
                   "linear")


def cyclic_species(n):
    return Species(n, c_omega(n), cyclic_to_sets(n)[1], "cyclic")


def egf(F: Species):
    """``a_k = |F_k| / k!`` for ``k ≤ truncation``."""
    return [homotopy_cardinality(F.fibre(k)) / math.factorial(k) for k in range(F.truncation + 1)]


def _permute(seq, s):
    out = [None] * len(seq)
    for i, v in enumerate(seq):
        out[s[i]] = v
    return tuple(out)


def species_extension(F: Species, x: FinGroupoid) -> FinGroupoid:
    """``Σ_k (F_k × x^k) // Aut(k)``, Aut(k) acting on the fibre and permuting factors."""
    B = b_omega(F.truncation)
    terms = []
    for k in range(F.truncation + 1):
        fib = F.fibre(k)
        prod = product(fib, *([x] * k), name=f"F{k}×x^{k}")
        grp = aut_group(B, f"n{k}")

        def act(g, fib=fib, prod=prod):
            s = parse_perm(g)
            T = fibre_transport(F.structure, fib, fib, B.mor(g))
            om = [prod.obj((fib.objects[T.obj_map[fib.obj(o[0])]],) + _permute(o[1:], s))
                  for o in prod.objects]
            mm = [prod.mor((fib.morphisms[T.mor_map[fib.mor(m[0])]],) + _permute(m[1:], s))
                  for m in prod.morphisms]
            return GroupoidMap(prod, prod, om, mm)

        terms.append(groupoid_quotient(grp, prod, act, name=f"term{k}"))
    return coproduct(*terms, name="species extension")


def species_to_polynomial(F: Species) -> PolyDiagram:
    """``1 ← F ×_B B' → F → 1``."""
    n = F.truncation
    pb = homotopy_pullback(F.structure, b_omega_projection(n), name="positions")
    return _one_variable(pb.apex, F.total, pb.proj1, f"poly({F.name})", n)


def polynomial_to_species(P: PolyDiagram, n=None) -> Species:
    """Classifying map ``B → B_ω``: a shape goes to the size of its position set.

    Positions over each shape are ordered by their least object; morphisms go
    to the permutation induced by transport between fibres.
    """
    ok, _ = is_combinatorial(P)
    if not ok:
        raise ValueError("polynomial is not combinatorial")
    B, p = P.B, P.p
    fibres, comp_of, sizes = [], [], []
    for b in B.objects:
        fib = homotopy_fibre(p, b).total
        cs = components(fib)
        idx = {}
        for ci, c in enumerate(cs):
            for o in c:
                idx[o] = ci
        fibres.append(fib)
        comp_of.append(idx)
        sizes.append(len(cs))
    if n is None:
        n = P.truncation if P.truncation is not None else max(sizes, default=0)
    if max(sizes, default=0) > n:
        raise ValueError(f"truncation {n} too small for fibre of size {max(sizes)}")
    Bw = b_omega(n)
    om = [Bw.obj(f"n{k}") for k in sizes]
    mm = []
    for beta in range(B.n_morphisms):
        a, a2 = B.src[beta], B.tgt[beta]
        T = fibre_transport(p, fibres[a], fibres[a2], beta, objects_only=True)
        reps = [c[0] for c in components(fibres[a])]
        s = tuple(comp_of[a2][T[r]] for r in reps)
        mm.append(Bw.mor(perm_label(s)))
    return Species(n, B, GroupoidMap(B, Bw, om, mm), f"species({P.name})")


def classical_extension(P: PolyDiagram, k: int) -> int:
    """Number of isomorphism classes of ``extend(P, discrete(k))``."""
    if not isinstance(k, int) or k < 0:
        raise ValueError("classical extension takes a natural number")
    return len(components(extend_groupoid(P, discrete(k))))

