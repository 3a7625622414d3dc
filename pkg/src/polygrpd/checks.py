"""The invariant battery behind ``polygrpd check-suite``.

Every check is a small function returning ``(ok, details)``; the runner
collects one line per check.  Generated inputs come from fixed seeds, so the
report is byte-for-byte reproducible (timings are only printed on request).
"""

from __future__ import annotations

import random
import time
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

from .config import SizeCapExceeded
from .functors import mapping_groupoid
from .generators import (random_action, random_cartesian_square, random_combinatorial_polynomial,
                         random_family, random_groupoid, random_isofibration, random_map_into,
                         random_species)
from .groupoid import (GroupoidMap, action_groupoid, cyclic, discrete, name_object, point, product,
                       symmetric, terminal_map, validate_groupoid)
from .homotopy import (FamilyOver, constant_family, dep_prod, identity_family, families_equivalent,
                       fibre_decomposition, fubini_check, homotopy_pullback, strict_pullback)
from .invariants import equivalent, homotopy_cardinality, skeleton
from .io import Workspace, fixture_path
from .polynomial import (apply_poly_morphism, beck_chevalley_check, compose1, extend_groupoid,
                         is_homotopy_cartesian)
from . import species as sp
from .trees import enumerate_ptrees, naive_tree_oracle, ptree_aut_order, validate_ptree

GROUPOID_FIXTURES = ("point", "BC2", "BC3", "EC2", "discrete3")
POLY_FIXTURES = ("identity", "list", "multiset", "cyclic")


@dataclass
class CheckResult:
    name: str
    ok: bool
    details: list = field(default_factory=list)
    seconds: float = 0.0
    status: str = ""

    def line(self, timing=False):
        status = self.status or ("PASS" if self.ok else "FAIL")
        out = f"{self.name}: {status}"
        if self.details:
            out += " [" + "; ".join(self.details) + "]"
        if timing:
            out += f" ({self.seconds:.3f}s)"
        return out


class Context:
    """Fixture objects shared by the checks."""

    def __init__(self, overrides=None, base=None):
        self.ws = Workspace(base)
        self.paths = {name: fixture_path(f"{name}.json") for name in GROUPOID_FIXTURES + POLY_FIXTURES}
        for name, path in (overrides or {}).items():
            self.paths[name] = path
        self.g = {}
        self.poly = {}

    def groupoid(self, name):
        if name not in self.g:
            self.g[name] = self.ws.groupoid(str(self.paths[name]))
        return self.g[name]

    def polynomial(self, name, n):
        key = (name, n)
        if key not in self.poly:
            self.poly[key] = self.ws.polynomial(str(self.paths[name]), trunc=n)
        return self.poly[key]


# -- groupoid core ----------------------------------------------------------

def check_fixtures(ctx):
    bad = []
    for name in GROUPOID_FIXTURES:
        rep = validate_groupoid(ctx.groupoid(name))
        if not rep.valid:
            bad.append(f"{name}: {rep.problems[0]}")
    return not bad, bad


def check_fixture_cards(ctx):
    want = {"point": Fraction(1), "BC2": Fraction(1, 2), "BC3": Fraction(1, 3),
            "EC2": Fraction(1), "discrete3": Fraction(3)}
    got = {k: homotopy_cardinality(ctx.groupoid(k)) for k in want}
    return got == want, [f"{k}={v}" for k, v in got.items()]


def check_quotient_cards(ctx):
    rng = random.Random(101)
    free = 0
    for _ in range(20):
        G, pts, act = random_action(rng)
        A = action_groupoid(G, pts, act)
        if homotopy_cardinality(A) != Fraction(len(pts), G.n_morphisms):
            return False, [f"mismatch for {G.name} on {len(pts)} points"]
        free += all(act(g, x) != x for x in pts for g in G.morphisms if g != G.morphisms[G.ident[0]])
    return True, ["actions=20", f"free={free}"]


def check_skeleton(ctx):
    rng = random.Random(102)
    for _ in range(10):
        g = random_groupoid(rng)
        sk = skeleton(g).groupoid
        if equivalent(g, sk) is None or homotopy_cardinality(g) != homotopy_cardinality(sk):
            return False, ["skeleton is not equivalent"]
    return True, ["instances=10"]


def check_mapping_groupoid(ctx):
    BC2 = ctx.groupoid("BC2")
    M = mapping_groupoid(discrete(2), BC2)
    N = mapping_groupoid(BC2, BC2)
    ok = equivalent(M, product(BC2, BC2)) is not None
    card = homotopy_cardinality(N)
    return ok and card == 1, [f"|Map(2,BC2)|={homotopy_cardinality(M)}", f"|Map(BC2,BC2)|={card}"]


# -- homotopy operations ----------------------------------------------------

def check_loop_spaces(ctx):
    out = []
    for G in (cyclic(2), cyclic(3), symmetric(3)):
        pt = name_object(G, G.objects[0])
        L = homotopy_pullback(pt, pt).apex
        if equivalent(L, discrete(G.n_morphisms)) is None:
            return False, [f"loop space of {G.name} is wrong"]
        out.append(f"{G.name}={homotopy_cardinality(L)}")
    return True, out


def check_isofibrations(ctx):
    rng = random.Random(103)
    for _ in range(10):
        f = random_isofibration(rng)
        g = random_map_into(rng, f.target)
        if equivalent(strict_pullback(f, g).apex, homotopy_pullback(f, g).apex) is None:
            return False, ["strict and homotopy pullbacks differ"]
    return True, ["instances=10"]


def check_dep_prod(ctx):
    D, X = discrete(2), discrete(5)
    y = FamilyOver(D, X, GroupoidMap(X, D, [0, 0, 1, 1, 1], [D.ident[i] for i in (0, 0, 1, 1, 1)]))
    P = dep_prod(terminal_map(D, sp.ONE), y)
    E = discrete(0)
    empty = dep_prod(terminal_map(E, sp.ONE), identity_family(E))
    ok = equivalent(P.total, discrete(6)) is not None and equivalent(empty.total, point()) is not None
    return ok, [f"|prod|={homotopy_cardinality(P.total)}", f"|empty prod|={homotopy_cardinality(empty.total)}"]


def check_fubini(ctx):
    rng = random.Random(104)
    for _ in range(10):
        A = random_groupoid(rng, 2)
        f = random_map_into(rng, A)
        y = random_family(rng, f.source)
        rep = fubini_check(f, y)
        if not rep.ok:
            return False, rep.notes
    return True, ["instances=10"]


def check_fibre_decomposition(ctx):
    rng = random.Random(105)
    for _ in range(10):
        B = random_groupoid(rng, 3)
        y = random_family(rng, B)
        if not fibre_decomposition(y.projection).holds:
            return False, ["reassembled fibres differ from the total"]
    return True, ["instances=10"]


def check_beck_chevalley(ctx):
    rng = random.Random(106)
    for _ in range(20):
        f, g, sq = random_cartesian_square(rng)
        rep = beck_chevalley_check(f, g, square=sq)
        if not rep.ok:
            return False, rep.notes
    return True, ["squares=20"]


# -- polynomials ------------------------------------------------------------

def _expected_extension(kind, k, n=3):
    if kind == "list":
        return sum(Fraction(k) ** j for j in range(n + 1))
    if kind == "cyclic":
        return sum(Fraction(k) ** j / j for j in range(1, n + 1))
    return sum(Fraction(k) ** j / factorial(j) for j in range(n + 1))


def check_extensions(ctx):
    out = []
    for kind in ("list", "cyclic", "multiset"):
        P = ctx.polynomial(kind, 3)
        vals = [homotopy_cardinality(extend_groupoid(P, discrete(k))) for k in range(3)]
        if vals != [_expected_extension(kind, k) for k in range(3)]:
            return False, [f"{kind}: {', '.join(map(str, vals))}"]
        out.append(f"{kind}=" + ",".join(map(str, vals)))
    return True, out


def check_compose(ctx):
    out = []
    I = ctx.polynomial("identity", 2)
    for name, outer, inner in (("list.list", ctx.polynomial("list", 2), ctx.polynomial("list", 2)),
                               ("multiset.multiset", ctx.polynomial("multiset", 2),
                                ctx.polynomial("multiset", 2)),
                               ("identity.list", I, ctx.polynomial("list", 2)),
                               ("identity.multiset", I, ctx.polynomial("multiset", 2))):
        C = compose1(outer, inner)
        vals = []
        for k in range(3):
            X = discrete(k)
            one = homotopy_cardinality(extend_groupoid(C, X))
            two = homotopy_cardinality(extend_groupoid(outer, extend_groupoid(inner, X)))
            if one != two:
                return False, [f"{name} at k={k}: {one} != {two}"]
            vals.append(str(one))
        out.append(f"{name}=" + ",".join(vals))
    return True, out


def check_cartesian_chain(ctx):
    for n in (2, 3):
        for sq in (sp.lists_to_cyclic_square(n), sp.cyclic_to_multiset_square(n)):
            if sq.validate() or not is_homotopy_cartesian(sq):
                return False, [f"square at truncation {n} is not cartesian"]
    return True, ["truncations=2,3"]


def check_natural_map(ctx):
    sq = sp.lists_to_cyclic_square(3)
    x = constant_family(sp.ONE, discrete(2))
    F = apply_poly_morphism(sq, x)
    return not F.validate(), [f"|source|={homotopy_cardinality(F.source)}", f"|target|={homotopy_cardinality(F.target)}"]


# -- species ----------------------------------------------------------------

def check_egf(ctx):
    want = {
        "multiset": [Fraction(1, factorial(k)) for k in range(6)],
        "cyclic": [Fraction(0)] + [Fraction(1, k) for k in range(1, 6)],
        "linear": [Fraction(1)] * 6,
    }
    builders = {"multiset": sp.multiset_species, "cyclic": sp.cyclic_species, "linear": sp.linear_species}
    out = []
    for name, exp in want.items():
        got = sp.egf(builders[name](5))
        if got != exp:
            return False, [f"{name}: {', '.join(map(str, got))}"]
        out.append(f"{name}=" + ",".join(map(str, got)))
    return True, out


_TEST_SPACES = (discrete(0), discrete(1), discrete(2), cyclic(2))


def check_poly_roundtrip(ctx):
    rng = random.Random(107)
    for _ in range(10):
        P = random_combinatorial_polynomial(rng)
        F = sp.polynomial_to_species(P)
        P2 = sp.species_to_polynomial(F)
        ok, why = families_equivalent(FamilyOver(P.B, P.E, P.p), FamilyOver(P2.B, P2.E, P2.p))
        if not ok:
            return False, [why]
        for X in _TEST_SPACES:
            if equivalent(extend_groupoid(P, X), sp.species_extension(F, X)) is None:
                return False, [f"extensions differ on {X.name}"]
    return True, ["instances=10"]


def check_species_roundtrip(ctx):
    rng = random.Random(108)
    for _ in range(10):
        F = random_species(rng)
        P = sp.species_to_polynomial(F)
        F2 = sp.polynomial_to_species(P, F.truncation)
        Bw = sp.b_omega(F.truncation)
        ok, why = families_equivalent(FamilyOver(Bw, F.total, F.structure),
                                      FamilyOver(Bw, F2.total, F2.structure))
        if not ok:
            return False, [why]
        for X in _TEST_SPACES:
            if equivalent(extend_groupoid(P, X), sp.species_extension(F, X)) is None:
                return False, [f"extensions differ on {X.name}"]
    return True, ["instances=10"]


# -- trees ------------------------------------------------------------------

def _aut_profile(classes):
    got = {}
    for c in classes:
        got.setdefault(c.n_edges, []).append(c.aut_order)
    return {k: sorted(v) for k, v in got.items()}


def check_identity_trees(ctx):
    classes = enumerate_ptrees(ctx.polynomial("identity", 1), 7)
    counts = Counter(c.n_edges for c in classes)
    ok = counts == Counter(range(1, 8)) and all(c.aut_order == 1 for c in classes)
    return ok, [f"classes={len(classes)}"]


def check_tree_oracle(ctx):
    out = []
    for flavor, name in (("planar", "list"), ("abstract", "multiset")):
        classes = enumerate_ptrees(ctx.polynomial(name, 5), 6)
        got = _aut_profile(classes)
        if got != naive_tree_oracle(flavor, 6):
            return False, [f"{name} enumeration disagrees with the brute-force count"]
        if flavor == "planar" and any(c.aut_order != 1 for c in classes):
            return False, ["planar tree with nontrivial automorphisms"]
        for c in classes:
            if not validate_ptree(c.representative).valid or ptree_aut_order(c.representative) != c.aut_order:
                return False, [f"bad representative {c.key}"]
        out.append(f"{name}=" + ",".join(str(len(got.get(m, []))) for m in range(1, 7)))
    return True, out


CHECKS = [
    ("groupoid.fixtures_valid", check_fixtures),
    ("groupoid.fixture_cardinalities", check_fixture_cards),
    ("homotopy.loop_spaces", check_loop_spaces),
    ("homotopy.isofibration_pullbacks", check_isofibrations),
    ("groupoid.quotient_cardinality", check_quotient_cards),
    ("groupoid.skeleton", check_skeleton),
    ("groupoid.mapping_groupoid", check_mapping_groupoid),
    ("homotopy.dep_prod", check_dep_prod),
    ("homotopy.fubini", check_fubini),
    ("homotopy.fibre_decomposition", check_fibre_decomposition),
    ("homotopy.beck_chevalley", check_beck_chevalley),
    ("polynomial.extensions", check_extensions),
    ("polynomial.compose", check_compose),
    ("polynomial.cartesian_chain", check_cartesian_chain),
    ("polynomial.natural_map", check_natural_map),
    ("species.egf", check_egf),
    ("species.poly_roundtrip", check_poly_roundtrip),
    ("species.species_roundtrip", check_species_roundtrip),
    ("trees.identity", check_identity_trees),
    ("trees.oracle", check_tree_oracle),
]


def run_suite(overrides=None, base=None, only=None):
    """Run the battery; returns ``(results, exit_code)``.

    Stops early when the fixtures are invalid (exit 1) or a size cap is hit (exit 2).
    """
    ctx = Context(overrides, base)
    results = []
    code = 0
    for name, fn in CHECKS:
        if only and not any(name.startswith(p) for p in only):
            continue
        t0 = time.perf_counter()
        try:
            ok, details = fn(ctx)
            res = CheckResult(name, ok, list(details))
        except SizeCapExceeded as exc:
            res = CheckResult(name, False, [str(exc)], status="CAP")
            res.seconds = time.perf_counter() - t0
            results.append(res)
            return results, 2
        res.seconds = time.perf_counter() - t0
        results.append(res)
        if not res.ok:
            code = 1
            if name == "groupoid.fixtures_valid":
                break
    return results, code
