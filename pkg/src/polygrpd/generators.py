"""Seeded generators of small groups, actions, groupoids, maps, polynomials and species.

Used by the invariant battery and by the test-suite; every generator takes a
``random.Random`` so corpora are reproducible.
"""

from __future__ import annotations

import itertools
import random

from .groupoid import (FinGroupoid, GroupoidMap, action_groupoid, coproduct, cyclic, discrete,
                       identity_map, name_object, product, symmetric, terminal_map)
from .homotopy import FamilyOver, fibration_factorization, homotopy_pullback, is_isofibration
from .invariants import LocalGroup
from .polynomial import PolyDiagram
from .species import ONE, Species, b_omega


def small_groups():
    """Groups of order ≤ 6 as one-object groupoids."""
    out = [cyclic(n) for n in range(1, 7)]
    out.append(product(cyclic(2), cyclic(2), name="V4"))
    out.append(symmetric(3))
    return out


def subgroups(G):
    """All subgroups of a one-object groupoid, as sorted lists of element labels."""
    L = LocalGroup(G, 0)
    found = set()
    for r in range(0, 3):
        for gens in itertools.combinations(range(len(L)), r):
            found.add(frozenset(L.closure(list(gens))))
    return [sorted(G.morphisms[L.elems[i]] for i in s) for s in sorted(found, key=lambda s: (len(s), sorted(s)))]


def coset_action(G, H):
    """Points and action of ``G`` on ``G/H`` (points are sorted label tuples)."""
    cosets = []
    seen = set()
    for g in G.morphisms:
        c = tuple(sorted(G.comp_labels(g, h) for h in H))
        if c not in seen:
            seen.add(c)
            cosets.append(c)
    index = {c: i for i, c in enumerate(cosets)}

    def act(g, i):
        c = cosets[i]
        return index[tuple(sorted(G.comp_labels(g, x) for x in c))]

    return list(range(len(cosets))), act


def random_action(rng: random.Random, G=None, max_points=6):
    """A group with a (possibly non-free, possibly non-transitive) action on ≤ ``max_points`` points."""
    G = G or rng.choice(small_groups())
    subs = subgroups(G)
    orbits = []
    total = 0
    while True:
        H = rng.choice(subs)
        pts, _ = coset_action(G, H)
        if total + len(pts) > max_points:
            break
        orbits.append(H)
        total += len(pts)
        if rng.random() < 0.4:
            break
    acts = [coset_action(G, H) for H in orbits]
    points = [f"o{i}c{j}" for i, (pts, _) in enumerate(acts) for j in pts]

    def act(g, x):
        i, j = x[1:].split("c")
        return f"o{i}c{acts[int(i)][1](g, int(j))}"

    return G, points, act


def random_groupoid(rng: random.Random, max_objects=4, max_group=6):
    """A coproduct of connected pieces ``G//(G/H)``; each piece has vertex group ``H``."""
    pieces = []
    n = 0
    groups = [g for g in small_groups() if g.n_morphisms <= max_group]
    while n < max_objects:
        G = rng.choice(groups)
        H = rng.choice(subgroups(G))
        pts, act = coset_action(G, H)
        if n + len(pts) > max_objects:
            if pieces:
                break
            continue
        pieces.append(action_groupoid(G, pts, act))
        n += len(pts)
        if rng.random() < 0.5:
            break
    return coproduct(*pieces, name="random")


def random_map_into(rng: random.Random, S: FinGroupoid, max_objects=4):
    """A map into ``S`` of a randomly chosen kind."""
    kind = rng.randrange(5)
    if kind == 0 and S.n_objects:
        return name_object(S, S.objects[rng.randrange(S.n_objects)])
    if kind == 1:
        return identity_map(S)
    if kind == 2:
        F = discrete(rng.randrange(1, 3))
        P = product(S, F)
        if P.n_objects <= max_objects:
            return GroupoidMap.from_functions(P, S, lambda o: o[0], lambda m: m[0])
    if kind == 3 and S.n_objects:
        # a vertex group included into S
        x = S.objects[rng.randrange(S.n_objects)]
        i = S.obj(x)
        G = FinGroupoid.build([x], [(S.morphisms[m], x, x) for m in S.aut(i)],
                              lambda _: S.morphisms[S.ident[i]], S.comp_labels)
        return GroupoidMap(G, S, [i], [S.mor(m) for m in G.morphisms])
    if kind == 4:
        X = random_groupoid(rng, max_objects=2, max_group=2)
        # collapse everything onto a single object of S (constant functor)
        if S.n_objects:
            j = rng.randrange(S.n_objects)
            return GroupoidMap(X, S, [j] * X.n_objects, [S.ident[j]] * X.n_morphisms)
    return identity_map(S)


def random_isofibration(rng: random.Random, max_objects=4):
    """An isofibration into a small random groupoid, often via path replacement."""
    while True:
        S = random_groupoid(rng, max_objects=2, max_group=4)
        f = random_map_into(rng, S, max_objects=max_objects)
        if not is_isofibration(f):
            f = fibration_factorization(f).isofibration
        if f.source.n_objects <= 3 * max_objects:
            return f


def random_cartesian_square(rng: random.Random, max_objects=4):
    """``(f, g, square)`` with a homotopy-cartesian square over the cospan ``f, g``."""
    while True:
        S = random_groupoid(rng, max_objects=2, max_group=3)
        f = random_map_into(rng, S, max_objects)
        g = random_map_into(rng, S, max_objects)
        if f.source.n_objects > max_objects or g.source.n_objects > max_objects:
            continue
        sq = homotopy_pullback(f, g)
        if sq.apex.n_objects <= 4 * max_objects:
            return f, g, sq


def _random_points(rng, G, k):
    """Orbits ``G/H`` filling at most ``k`` points; returns (sizes, actions)."""
    acts = []
    used = 0
    subs = subgroups(G)
    while True:
        fits = [H for H in subs if len(coset_action(G, H)[0]) <= k - used]
        if not fits or (acts and rng.random() < 0.3):
            return acts
        pts, act = coset_action(G, rng.choice(fits))
        acts.append((len(pts), act))
        used += len(pts)


def random_combinatorial_polynomial(rng: random.Random, max_positions=3):
    """``1 ← E → B → 1`` with ``B`` a sum of groups acting on small position sets."""
    shapes, positions = [], []
    for _ in range(rng.randrange(1, 4)):
        G = rng.choice(small_groups())
        acts = _random_points(rng, G, rng.randrange(0, max_positions + 1))
        points = [f"a{i}q{j}" for i, (n, _) in enumerate(acts) for j in range(n)]

        def on(g, x, acts=acts):
            i, j = x[1:].split("q")
            return f"a{i}q{acts[int(i)][1](g, int(j))}"

        shapes.append(G)
        positions.append(action_groupoid(G, points, on))
    B = coproduct(*shapes, name="shapes")
    E = coproduct(*positions, name="positions")
    p = GroupoidMap.from_functions(E, B, lambda o: (o[0], shapes[o[0]].objects[0]),
                                   lambda m: (m[0], m[1][0]))
    return PolyDiagram(ONE, E, B, ONE, terminal_map(E, ONE), p, terminal_map(B, ONE),
                       truncation=max_positions, name="random")


def random_species(rng: random.Random, n=3):
    """A sum of one-object pieces over ``B_ω^{≤n}``, some faithful, some not."""
    Bw = b_omega(n)
    pieces, targets = [], []
    for _ in range(rng.randrange(1, 4)):
        k = rng.randrange(0, n + 1)
        x = Bw.obj(f"n{k}")
        e = Bw.morphisms[Bw.ident[x]]
        Sk = FinGroupoid.build(["pt"], [(Bw.morphisms[m], "pt", "pt") for m in Bw.aut(x)],
                               lambda _: e, Bw.comp_labels)
        H = rng.choice(subgroups(Sk))
        Hg = FinGroupoid.build(["pt"], [(h, "pt", "pt") for h in H], lambda _: e, Bw.comp_labels)
        if rng.random() < 0.3:
            pieces.append(product(Hg, cyclic(2)))
            targets.append((k, lambda m: m[0]))
        else:
            pieces.append(Hg)
            targets.append((k, lambda m: m))
    F = coproduct(*pieces, name="species")
    om = [Bw.obj(f"n{targets[o[0]][0]}") for o in F.objects]
    mm = [Bw.mor(targets[m[0]][1](m[1])) for m in F.morphisms]
    return Species(n, F, GroupoidMap(F, Bw, om, mm), "random")


def random_family(rng: random.Random, base: FinGroupoid):
    """A family over ``base``: a random map into it."""
    f = random_map_into(rng, base)
    return FamilyOver(base, f.source, f)

