"""JSON interchange for groupoids, maps, families, polynomials, species and trees.

References between files are relative paths (resolved against the referring
file) or inline objects.  A :class:`Workspace` caches everything it loads by
resolved path, so two references to one file give the same Python object,
which the kernel relies on when checking that endpoints agree.

Any object may instead be ``{"builtin": name, ...}``; see :data:`BUILTINS`.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .config import ParseError
from .groupoid import (IDENT_RE, FinGroupoid, GroupoidMap, action_groupoid, cyclic, discrete,
                       point, symmetric)
from .homotopy import FamilyOver
from .polynomial import PolyDiagram, identity_polynomial, strict_square
from . import species as sp
from .trees import Node, PTree, TreeDiagram


def _ec2():
    G = cyclic(2)
    return action_groupoid(G, list(G.morphisms), G.comp_labels, name="EC2")


GROUPOID_BUILTINS = {
    "point": lambda a: point(),
    "discrete": lambda a: discrete(a.get("n", 1)),
    "cyclic": lambda a: cyclic(a.get("n", 2)),
    "symmetric": lambda a: symmetric(a.get("n", 2)),
    "EC2": lambda a: _ec2(),
    "b_omega": lambda a: sp.b_omega(a["n"]),
    "b_omega_pointed": lambda a: sp.b_omega_pointed(a["n"]),
    "c_omega": lambda a: sp.c_omega(a["n"], a.get("with_empty", False)),
    "c_omega_pointed": lambda a: sp.c_omega_pointed(a["n"], a.get("with_empty", False)),
    "lin": lambda a: sp.lin(a["n"]),
    "lin_pointed": lambda a: sp.lin_pointed(a["n"]),
}

POLY_BUILTINS = {
    "identity": lambda n: identity_polynomial(),
    "list": lambda n: sp.list_polynomial(n),
    "multiset": lambda n: sp.multiset_polynomial(n),
    "cyclic": lambda n: sp.cyclic_polynomial(n),
    "linear": lambda n: sp.list_polynomial(n),
}

SPECIES_BUILTINS = {
    "multiset": sp.multiset_species,
    "linear": sp.linear_species,
    "list": sp.linear_species,
    "cyclic": sp.cyclic_species,
    "identity": lambda n: sp.polynomial_to_species(identity_polynomial(), n),
}

SQUARE_BUILTINS = {
    "lists-to-cyclic": sp.lists_to_cyclic_square,
    "cyclic-to-multiset": sp.cyclic_to_multiset_square,
}

BUILTINS = {"groupoid": GROUPOID_BUILTINS, "polynomial": POLY_BUILTINS,
            "species": SPECIES_BUILTINS, "square": SQUARE_BUILTINS}


def read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ParseError(f"no such file: {path}") from exc
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"{path}: not valid JSON ({exc})") from exc


def fixture_path(name):
    return Path(str(resources.files("polygrpd") / "fixtures" / name))


def _need(d, key, what):
    if not isinstance(d, dict) or key not in d:
        raise ParseError(f"{what}: missing field {key!r}")
    return d[key]


def _ident(x, what):
    if not isinstance(x, str) or not IDENT_RE.match(x):
        raise ParseError(f"{what}: bad identifier {x!r}")
    return x


def parse_groupoid(data, name=None) -> FinGroupoid:
    if isinstance(data, dict) and "builtin" in data:
        fn = GROUPOID_BUILTINS.get(data["builtin"])
        if fn is None:
            raise ParseError(f"unknown builtin groupoid {data['builtin']!r}")
        return fn(data)
    objs = _need(data, "objects", "groupoid")
    mors = data.get("morphisms", [])
    comp = data.get("compose", [])
    if not isinstance(objs, list) or not isinstance(mors, list) or not isinstance(comp, list):
        raise ParseError("groupoid: objects, morphisms and compose must be lists")
    objs = sorted(_ident(o, "object") for o in objs)
    triples = []
    for m in mors:
        triples.append((_ident(_need(m, "id", "morphism"), "morphism"),
                        _need(m, "src", "morphism"), _need(m, "tgt", "morphism")))
    triples.sort()
    entries = []
    for e in comp:
        if not isinstance(e, list) or len(e) != 3:
            raise ParseError(f"compose entry {e!r} is not a triple")
        entries.append(tuple(e))
    return FinGroupoid.from_table(objs, triples, entries, name=name)


def dump_names(g: FinGroupoid):
    """Identifier names used when writing ``g``: ``(object names, morphism names)``.

    Labels that are already identifiers are kept; otherwise objects become
    ``o{i}`` and morphisms ``m{i}``.  Identities are always ``id_<object>``.
    """
    if "_dump_names" in g.meta:
        return g.meta["_dump_names"]
    plain = all(isinstance(o, str) and IDENT_RE.match(o) for o in g.objects)
    onames = list(g.objects) if plain else [f"o{i}" for i in range(g.n_objects)]
    ids = {g.ident[x] for x in range(g.n_objects)}
    mnames = []
    for m in range(g.n_morphisms):
        lab = g.morphisms[m]
        if m in ids:
            mnames.append(f"id_{onames[g.src[m]]}")
        elif plain and isinstance(lab, str) and IDENT_RE.match(lab) and not lab.startswith("id_"):
            mnames.append(lab)
        else:
            mnames.append(None)
    taken = set(n for n in mnames if n)
    k = 0
    for m in range(g.n_morphisms):
        if mnames[m] is None:
            while f"m{k}" in taken:
                k += 1
            mnames[m] = f"m{k}"
            taken.add(mnames[m])
    g.meta["_dump_names"] = (onames, mnames)
    return onames, mnames


def groupoid_to_json(g: FinGroupoid) -> dict:
    onames, mnames = dump_names(g)
    ids = {g.ident[x] for x in range(g.n_objects)}
    morphisms = [{"id": mnames[m], "src": onames[g.src[m]], "tgt": onames[g.tgt[m]]}
                 for m in range(g.n_morphisms) if m not in ids]
    compose = [[mnames[a], mnames[b], mnames[g.comp(a, b)]]
               for a, b in g.composable_pairs() if a not in ids and b not in ids]
    return {"objects": onames, "morphisms": morphisms, "compose": compose}


def map_to_json(F: GroupoidMap, target_names=None) -> dict:
    """Object and morphism maps in dump names; ``target_names`` overrides the target's."""
    so, sm = dump_names(F.source)
    to, tm = target_names or dump_names(F.target)
    return {"object_map": {so[i]: to[F.obj_map[i]] for i in range(F.source.n_objects)},
            "morphism_map": {sm[m]: tm[F.mor_map[m]] for m in range(F.source.n_morphisms)}}


def polynomial_to_json(P: PolyDiagram) -> dict:
    out = {k: groupoid_to_json(getattr(P, k)) for k in ("I", "E", "B", "J")}
    out.update(s=map_to_json(P.s), p=map_to_json(P.p), t=map_to_json(P.t))
    if P.truncation is not None:
        out["truncation"] = P.truncation
    return out


def species_to_json(F) -> dict:
    B = F.structure.target
    return {"truncation": F.truncation, "total": groupoid_to_json(F.total),
            "structure": map_to_json(F.structure, (list(B.objects), list(B.morphisms)))}


class Workspace:
    """Resolves and caches file references."""

    def __init__(self, base=None):
        self.base = Path(base) if base else Path.cwd()
        self.cache = {}

    def _resolve(self, ref, base):
        if isinstance(ref, (dict, list)):
            return None, ref
        if not isinstance(ref, str):
            raise ParseError(f"bad reference {ref!r}")
        if ref.startswith("fixture:"):
            path = fixture_path(ref[len("fixture:"):])
        else:
            path = (Path(base) / ref) if base else Path(ref)
        path = path.resolve()
        return path, None

    def _load(self, kind, ref, base, parser):
        path, inline = self._resolve(ref, base)
        if path is None:
            try:
                return parser(inline, base)
            except (TypeError, AttributeError, IndexError) as exc:
                raise ParseError(f"malformed inline {kind} ({exc})") from exc
        key = (kind, str(path))
        if key not in self.cache:
            data = read_json(path)
            try:
                self.cache[key] = parser(data, path.parent)
            except (TypeError, AttributeError, IndexError) as exc:
                raise ParseError(f"{path.name}: malformed {kind} ({exc})") from exc
        return self.cache[key]

    def groupoid(self, ref, base=None):
        def parse(d, b):
            if isinstance(d, dict) and "builtin" in d:
                key = ("groupoid-builtin", json.dumps(d, sort_keys=True))
                if key not in self.cache:
                    self.cache[key] = parse_groupoid(d)
                return self.cache[key]
            return parse_groupoid(d)
        return self._load("groupoid", ref, base or self.base, parse)

    def map(self, ref, base=None, source=None, target=None):
        def parse(d, b):
            src = source if source is not None else self.groupoid(_need(d, "source", "map"), b)
            tgt = target if target is not None else self.groupoid(_need(d, "target", "map"), b)
            om = _need(d, "object_map", "map")
            mm = d.get("morphism_map", {})
            if not isinstance(om, dict) or not isinstance(mm, dict):
                raise ParseError("map: object_map and morphism_map must be objects")
            try:
                return GroupoidMap.from_labels(src, tgt, om, mm)
            except KeyError as exc:
                raise ParseError(f"map refers to unknown label {exc}") from exc
        return self._load("map", ref, base or self.base, parse)

    def family(self, ref, base=None):
        def parse(d, b):
            total = self.groupoid(_need(d, "total", "family"), b)
            B = self.groupoid(_need(d, "base", "family"), b)
            proj = self.map(_need(d, "projection", "family"), b, source=total, target=B)
            return FamilyOver(B, total, proj)
        return self._load("family", ref, base or self.base, parse)

    def polynomial(self, ref, base=None, trunc=None):
        def parse(d, b):
            if isinstance(d, dict) and "builtin" in d:
                fn = POLY_BUILTINS.get(d["builtin"])
                if fn is None:
                    raise ParseError(f"unknown builtin polynomial {d['builtin']!r}")
                n = trunc if trunc is not None else d.get("truncation", 3)
                return fn(n)
            G = {k: self.groupoid(_need(d, k, "polynomial"), b) for k in ("I", "E", "B", "J")}
            s = self.map(_need(d, "s", "polynomial"), b, G["E"], G["I"])
            p = self.map(_need(d, "p", "polynomial"), b, G["E"], G["B"])
            t = self.map(_need(d, "t", "polynomial"), b, G["B"], G["J"])
            return PolyDiagram(G["I"], G["E"], G["B"], G["J"], s, p, t,
                               truncation=d.get("truncation"), name=d.get("name"))
        if trunc is not None:
            path, inline = self._resolve(ref, base or self.base)
            return parse(inline if path is None else read_json(path),
                         base or self.base if path is None else path.parent)
        return self._load("polynomial", ref, base or self.base, parse)

    def species(self, ref, base=None, trunc=None):
        def parse(d, b):
            if isinstance(d, dict) and "builtin" in d:
                fn = SPECIES_BUILTINS.get(d["builtin"])
                if fn is None:
                    raise ParseError(f"unknown builtin species {d['builtin']!r}")
                return fn(trunc if trunc is not None else d.get("truncation", 3))
            n = _need(d, "truncation", "species")
            if trunc is not None and trunc != n:
                raise ParseError(f"species file has truncation {n}, not {trunc}")
            total = self.groupoid(_need(d, "total", "species"), b)
            st = self.map(_need(d, "structure", "species"), b, total, sp.b_omega(n))
            return sp.Species(n, total, st, d.get("name"))
        path, inline = self._resolve(ref, base or self.base)
        return parse(inline if path is None else read_json(path),
                     base or self.base if path is None else path.parent)

    def square(self, ref, base=None):
        def parse(d, b):
            if isinstance(d, dict) and "builtin" in d:
                fn = SQUARE_BUILTINS.get(d["builtin"])
                if fn is None:
                    raise ParseError(f"unknown builtin square {d['builtin']!r}")
                return fn(d.get("truncation", 3))
            P2 = self.polynomial(_need(d, "source", "square"), b)
            P = self.polynomial(_need(d, "target", "square"), b)
            uE = self.map(_need(d, "uE", "square"), b, P2.E, P.E)
            uB = self.map(_need(d, "uB", "square"), b, P2.B, P.B)
            try:
                return strict_square(P2, P, uE, uB)
            except ValueError as exc:
                raise ParseError(str(exc)) from exc
        return self._load("square", ref, base or self.base, parse)

    def tree(self, ref, base=None):
        return self._load("tree", ref, base or self.base, lambda d, b: parse_tree(d))

    def ptree(self, ref, base=None):
        def parse(d, b):
            tree = parse_tree(_need(d, "tree", "ptree"))
            P = self.polynomial(_need(d, "poly", "ptree"), b)
            nodes = {int(k): v for k, v in _need(d, "node_dec", "ptree").items()}
            slot = {(s["node"], s["edge"]): (s["e"], s["beta"]) for s in d.get("slot", [])}
            phi = {(s["node"], s["edge"]): s["mor"] for s in d.get("phi", [])}
            psi = {int(k): v for k, v in d.get("psi", {}).items()}
            return PTree(tree, P, dict(_need(d, "edge_dec", "ptree")), nodes, slot, phi, psi)
        return self._load("ptree", ref, base or self.base, parse)


def parse_tree(d) -> TreeDiagram:
    edges = _need(d, "edges", "tree")
    nodes = []
    for n in _need(d, "nodes", "tree"):
        ins = n.get("in", []) if isinstance(n, dict) else None
        if ins is None or not isinstance(ins, list):
            raise ParseError("tree node needs an 'in' list")
        nodes.append(Node(_need(n, "out", "tree node"), tuple(ins)))
    return TreeDiagram(tuple(edges), tuple(nodes))


def tree_to_json(t: TreeDiagram) -> dict:
    return {"edges": list(t.edges), "nodes": [{"out": n.out, "in": list(n.ins)} for n in t.nodes]}


def ptree_to_json(pt: PTree, poly_ref) -> dict:
    return {
        "tree": tree_to_json(pt.tree),
        "poly": poly_ref,
        "edge_dec": dict(pt.edge_dec),
        "node_dec": {str(k): v for k, v in sorted(pt.node_dec.items())},
        "slot": [{"node": k[0], "edge": k[1], "e": v[0], "beta": v[1]} for k, v in sorted(pt.slot.items())],
        "phi": [{"node": k[0], "edge": k[1], "mor": v} for k, v in sorted(pt.phi.items())],
        "psi": {str(k): v for k, v in sorted(pt.psi.items())},
    }
