"""Command-line front end.

Exit codes: 0 success, 1 validation or semantic failure, 2 size cap
exceeded, 3 parse error (bad file or bad arguments).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .config import Caps, ParseError, SizeCapExceeded, size_caps
from .groupoid import FinGroupoid, GroupoidMap, action_groupoid, discrete, validate_groupoid
from .homotopy import FamilyOver, homotopy_fibre, homotopy_pullback, strict_pullback
from .invariants import compare, components, homotopy_cardinality
from . import io as fio
from .polynomial import (beck_chevalley_check, cartesian_gap_map, compose1, extend,
                         extend_groupoid, is_combinatorial, is_homotopy_cartesian,
                         validate_polynomial)
from . import species as sp
from .trees import (enumerate_ptrees, ptree_iso, tree_stats, validate_ptree, validate_tree)

OK, FAILED, CAPPED, PARSE = 0, 1, 2, 3


class Report:
    """Result of one command: ordered payload, text lines and status."""

    def __init__(self, command):
        self.command = command
        self.payload = {}
        self.text = []
        self.status = OK

    def put(self, key, value, line=None):
        self.payload[key] = value
        if line is not False:
            self.text.append(line if line is not None else f"{key}: {_plain(value)}")

    def fail(self, msg=None):
        self.status = FAILED
        if msg:
            self.payload.setdefault("errors", []).append(msg)
            self.text.append(msg)

    def render(self, fmt):
        if fmt == "json":
            doc = {"command": self.command, "status": _STATUS[self.status], "result": _jsonable(self.payload)}
            return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
        return "".join(line + "\n" for line in self.text)


_STATUS = {OK: "ok", FAILED: "failed", CAPPED: "cap-exceeded", PARSE: "parse-error"}


def _plain(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (list, tuple)):
        return ", ".join(_plain(x) for x in v)
    return str(v)


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, bool) or v is None or isinstance(v, (int, str)):
        return v
    return str(v)


class _Parser(argparse.ArgumentParser):
    """Argument errors are parse errors (exit 3), not argparse's default 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise ParseError(f"{self.prog}: {message}")


# -- helpers ------------------------------------------------------------------

def _groupoid(ws, ref, rep, what="groupoid"):
    g = ws.groupoid(ref)
    vr = validate_groupoid(g)
    if not vr.valid:
        rep.fail(f"{what} {ref} is not a groupoid: {vr.problems[0]}")
        return None
    return g


def _summary(g: FinGroupoid):
    return {"objects": g.n_objects, "morphisms": g.n_morphisms, "components": len(components(g)),
            "cardinality": homotopy_cardinality(g)}


def _put_groupoid(rep, key, g, dump_path=None):
    s = _summary(g)
    rep.put(key, s, f"{key}: {s['objects']} objects, {s['morphisms']} morphisms, "
                    f"{s['components']} components, cardinality {s['cardinality']}")
    if dump_path:
        _write(dump_path, fio.groupoid_to_json(g))
        rep.put("written", str(dump_path))


def _write(path, doc):
    Path(path).write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def _detect(data):
    if not isinstance(data, dict):
        raise ParseError("top-level JSON value must be an object")
    if "builtin" in data:
        b = data["builtin"]
        for kind in ("square", "polynomial", "groupoid"):
            if b in fio.BUILTINS[kind]:
                return kind
        raise ParseError(f"unknown builtin {b!r}")
    for key, kind in (("objects", "groupoid"), ("object_map", "map"), ("projection", "family"),
                      ("uE", "square"), ("structure", "species"), ("tree", "ptree"),
                      ("edges", "tree"), ("E", "polynomial")):
        if key in data:
            return kind
    raise ParseError("cannot tell what kind of file this is; pass --kind")


# -- commands -------------------------------------------------------------------

def cmd_validate(a, ws, rep):
    kind = a.kind or _detect(fio.read_json(a.file))
    rep.put("kind", kind)
    problems = []
    if kind == "groupoid":
        problems = validate_groupoid(ws.groupoid(a.file)).problems
    elif kind in ("map", "family"):
        F = ws.map(a.file) if kind == "map" else ws.family(a.file).projection
        for g in (F.source, F.target):
            problems += validate_groupoid(g).problems
        problems = problems or F.validate()
    elif kind == "polynomial":
        problems = validate_polynomial(ws.polynomial(a.file, trunc=a.trunc)).problems
    elif kind == "species":
        F = ws.species(a.file, trunc=a.trunc)
        problems = validate_groupoid(F.total).problems or F.structure.validate()
    elif kind == "square":
        sq = ws.square(a.file)
        for P in (sq.source, sq.target):
            problems += validate_polynomial(P).problems
        problems = problems or sq.validate()
    elif kind == "tree":
        problems = validate_tree(ws.tree(a.file)).problems
    elif kind == "ptree":
        problems = validate_ptree(ws.ptree(a.file)).problems
    else:
        raise ParseError(f"unknown kind {kind!r}")
    rep.put("valid", not problems, "valid" if not problems else "invalid")
    rep.put("problems", list(problems), False)
    for p in problems:
        rep.text.append(f"  {p}")
    if problems:
        rep.status = FAILED


def cmd_card(a, ws, rep):
    g = _groupoid(ws, a.file, rep)
    if g is not None:
        rep.put("cardinality", homotopy_cardinality(g), str(homotopy_cardinality(g)))


def cmd_pi0(a, ws, rep):
    g = _groupoid(ws, a.file, rep)
    if g is None:
        return
    comps = []
    for c in components(g):
        comps.append({"objects": [str(g.objects[x]) for x in c], "aut_order": len(g.aut(c[0]))})
    rep.put("count", len(comps), f"{len(comps)} components")
    rep.put("components", comps, False)
    for c in comps:
        rep.text.append(f"  {{{', '.join(c['objects'])}}} aut={c['aut_order']}")


def cmd_equiv(a, ws, rep):
    g, h = _groupoid(ws, a.first, rep), _groupoid(ws, a.second, rep)
    if g is None or h is None:
        return
    w, why = compare(g, h)
    rep.put("equivalent", w is not None, "equivalent" if w else f"not equivalent: {why}")
    if w is None:
        rep.status = FAILED
        return
    rep.put("witness", {"forward_objects": {str(g.objects[i]): str(h.objects[j])
                                            for i, j in enumerate(w.forward.obj_map)}}, False)
    rep.text.append("  forward: " + ", ".join(f"{g.objects[i]} -> {h.objects[j]}"
                                               for i, j in enumerate(w.forward.obj_map)))


def cmd_pullback(a, ws, rep):
    f, g = ws.map(a.f), ws.map(a.g)
    if f.target is not g.target:
        raise ValueError("the two maps must share a target")
    P = strict_pullback(f, g) if a.strict else homotopy_pullback(f, g)
    _put_groupoid(rep, "pullback", P.apex, a.out)


def cmd_fibre(a, ws, rep):
    p = ws.map(a.map)
    if not p.target.has_obj(a.object):
        rep.fail(f"no object {a.object!r} in the target")
        return
    F = homotopy_fibre(p, a.object)
    _put_groupoid(rep, "fibre", F.total, a.out)


def _parse_action(ws, path):
    d = fio.read_json(path)
    G = ws.groupoid(fio._need(d, "group", "action"), Path(path).resolve().parent)
    if G.n_objects != 1:
        raise ParseError("action: the group file must have exactly one object")
    pts = fio._need(d, "points", "action")
    table = fio._need(d, "act", "action")
    for g in G.morphisms:
        if g != G.morphisms[G.ident[0]] and g not in table:
            raise ParseError(f"action: no row for {g}")

    def act(g, x):
        if g == G.morphisms[G.ident[0]]:
            return x
        return table[g][x]
    for g in table:
        if set(table[g]) != set(pts) or set(table[g].values()) != set(pts):
            raise ParseError(f"action: row {g} is not a permutation of the points")
    return G, sorted(pts), act


def cmd_quotient(a, ws, rep):
    G, pts, act = _parse_action(ws, a.action)
    for g in G.morphisms:
        for h in G.morphisms:
            for x in pts:
                if act(g, act(h, x)) != act(G.comp_labels(g, h), x):
                    rep.fail(f"not an action: {g}({h}({x})) != ({g}{h})({x})")
                    return
    Q = action_groupoid(G, pts, act)
    _put_groupoid(rep, "quotient", Q, a.out)
    rep.put("expected", Fraction(len(pts), G.n_morphisms), f"|X|/|G| = {Fraction(len(pts), G.n_morphisms)}")


def _poly(ws, a, rep, ref=None):
    P = ws.polynomial(ref or a.poly, trunc=a.trunc)
    vr = validate_polynomial(P)
    if not vr.valid:
        rep.fail(f"invalid polynomial: {vr.problems[0]}")
        return None
    return P


def cmd_eval(a, ws, rep):
    P = _poly(ws, a, rep)
    if P is None:
        return
    if a.family:
        x = ws.family(a.family)
        if x.base is not P.I and not (x.base.n_objects == 1 and P.I.n_objects == 1):
            raise ValueError("family must live over the polynomial's I")
        if x.base is not P.I:
            x = _rebase(x, P.I)
        Y = extend(P, x)
        _put_groupoid(rep, "extension", Y.total, a.out)
    else:
        X = _groupoid(ws, a.groupoid, rep)
        if X is None:
            return
        _put_groupoid(rep, "extension", extend_groupoid(P, X), a.out)


def _rebase(x, I):
    p = GroupoidMap(x.total, I, [0] * x.total.n_objects, [I.ident[0]] * x.total.n_morphisms)
    return FamilyOver(I, x.total, p)


def cmd_compose(a, ws, rep):
    outer, inner = _poly(ws, a, rep, a.outer), _poly(ws, a, rep, a.inner)
    if outer is None or inner is None:
        return
    C = compose1(outer, inner)
    rep.put("shapes", _summary(C.B)["cardinality"], f"composite shapes: cardinality {_summary(C.B)['cardinality']}")
    rows = []
    for k in range(a.up_to + 1):
        X = discrete(k)
        one = homotopy_cardinality(extend_groupoid(C, X))
        two = homotopy_cardinality(extend_groupoid(outer, extend_groupoid(inner, X)))
        rows.append({"k": k, "composite": one, "two_stage": two})
        rep.text.append(f"k={k}: composite {one}, two-stage {two}" + ("" if one == two else "  MISMATCH"))
        if one != two:
            rep.status = FAILED
    rep.put("values", rows, False)
    if a.out:
        _write(a.out, fio.polynomial_to_json(C))
        rep.put("written", str(a.out))


def cmd_cartesian(a, ws, rep):
    sq = ws.square(a.square)
    problems = sq.validate()
    if problems:
        rep.fail(f"square cells invalid: {problems[0]}")
        return
    ok = is_homotopy_cartesian(sq)
    gap, _ = cartesian_gap_map(sq)
    rep.put("cartesian", ok, "cartesian" if ok else "not cartesian")
    rep.put("gap", {"source": homotopy_cardinality(gap.source), "target": homotopy_cardinality(gap.target)},
            f"gap map: {homotopy_cardinality(gap.source)} -> {homotopy_cardinality(gap.target)}")
    if not ok:
        rep.status = FAILED


def cmd_bc(a, ws, rep):
    f, g = ws.map(a.f), ws.map(a.g)
    if f.target is not g.target:
        raise ValueError("the two maps must share a target")
    r = beck_chevalley_check(f, g)
    rep.put("holds", r.ok, r.line())
    rep.put("cardinalities", r.cardinalities, False)
    for n in r.notes:
        rep.text.append(f"  {n}")
    if not r.ok:
        rep.status = FAILED


def cmd_species(a, ws, rep):
    if a.action == "egf":
        F = ws.species(a.species, trunc=a.trunc)
        coeffs = sp.egf(F)
        rep.put("egf", coeffs, ", ".join(map(str, coeffs)))
    elif a.action == "to-poly":
        P = sp.species_to_polynomial(ws.species(a.species, trunc=a.trunc))
        _emit(rep, a, fio.polynomial_to_json(P))
    elif a.action == "from-poly":
        P = _poly(ws, a, rep)
        if P is None:
            return
        ok, freport = is_combinatorial(P)
        if not P.one_variable or not ok:
            rep.fail("polynomial is not a one-variable combinatorial polynomial")
            for line in freport.lines():
                rep.text.append(f"  {line}")
            return
        _emit(rep, a, fio.species_to_json(sp.polynomial_to_species(P, a.trunc)))
    else:
        F = ws.species(a.species, trunc=a.trunc)
        X = _groupoid(ws, a.groupoid, rep)
        if X is not None:
            _put_groupoid(rep, "extension", sp.species_extension(F, X), a.out)


def _emit(rep, a, doc):
    if a.out:
        _write(a.out, doc)
        rep.put("written", str(a.out))
    else:
        rep.put("document", doc, json.dumps(doc, indent=2, ensure_ascii=False))


def cmd_trees(a, ws, rep):
    if a.action == "validate":
        kind = _detect(fio.read_json(a.first))
        if kind == "ptree":
            vr = validate_ptree(ws.ptree(a.first))
        else:
            vr = validate_tree(ws.tree(a.first))
        rep.put("valid", vr.valid, "valid" if vr.valid else "invalid")
        rep.put("problems", list(vr.problems), False)
        for p in vr.problems:
            rep.text.append(f"  {p}")
        if vr.valid and kind == "tree":
            st = tree_stats(ws.tree(a.first))
            rep.put("stats", {"root": st.root, "leaves": sorted(st.leaves), "nodes": st.n_nodes,
                              "edges": st.n_edges, "depth": st.depth})
        if not vr.valid:
            rep.status = FAILED
    elif a.action == "enumerate":
        P = _poly(ws, a, rep)
        if P is None:
            return
        classes = enumerate_ptrees(P, a.max_edges)
        rows = [{"edges": c.n_edges, "aut": c.aut_order, "key": c.key} for c in classes]
        rep.put("count", len(rows), f"{len(rows)} classes")
        rep.put("classes", rows, False)
        for r in rows:
            rep.text.append(f"  edges={r['edges']} aut={r['aut']} {r['key']}")
    else:
        x, y = ws.ptree(a.first), ws.ptree(a.second)
        iso = ptree_iso(x, y)
        rep.put("isomorphic", iso is not None, "isomorphic" if iso else "not isomorphic")
        if iso is not None:
            rep.put("edge_map", dict(iso.edge_map), "  " + ", ".join(f"{k} -> {v}" for k, v in iso.edge_map.items()))
        else:
            rep.status = FAILED


def cmd_check_suite(a, ws, rep):
    from .checks import run_suite
    overrides = {k: _resolve(v, a._config_dir) for k, v in a._fixtures.items()}
    results, code = run_suite(overrides, only=a.only)
    for r in results:
        rep.text.append(r.line(a.timing))
    rep.payload["checks"] = [{"name": r.name, "status": r.status or ("pass" if r.ok else "fail"),
                              "details": r.details, **({"seconds": round(r.seconds, 3)} if a.timing else {})}
                             for r in results]
    passed = sum(r.ok for r in results)
    rep.put("summary", f"{passed}/{len(results)} checks passed")
    rep.status = code


def _resolve(path, base):
    p = Path(path)
    return p if p.is_absolute() or base is None else base / p


# -- argument parsing -------------------------------------------------------------

def build_parser():
    common = _Parser(add_help=False)
    # SUPPRESS so a flag given before the subcommand is not reset by the subparser
    common.add_argument("--format", choices=["text", "json"], default=argparse.SUPPRESS)
    common.add_argument("--cap-objects", type=int, default=argparse.SUPPRESS)
    common.add_argument("--cap-sections", type=int, default=argparse.SUPPRESS)
    common.add_argument("--trunc", type=int, default=argparse.SUPPRESS)
    common.add_argument("--config", default=argparse.SUPPRESS, help="JSON file with caps, trunc, format and fixtures")

    p = _Parser(prog="polygrpd", description="Finite groupoids, polynomial functors, species and trees.",
                parents=[common])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help):
        s = sub.add_parser(name, help=help, parents=[common])
        s.set_defaults(fn=fn)
        return s

    s = add("validate", cmd_validate, "check any input file")
    s.add_argument("file")
    s.add_argument("--kind", choices=["groupoid", "map", "family", "polynomial", "species", "square",
                                      "tree", "ptree"])
    add("card", cmd_card, "homotopy cardinality").add_argument("file")
    add("pi0", cmd_pi0, "connected components").add_argument("file")
    s = add("equiv", cmd_equiv, "decide equivalence of two groupoids")
    s.add_argument("first")
    s.add_argument("second")
    s = add("pullback", cmd_pullback, "pullback of a cospan of maps")
    s.add_argument("f")
    s.add_argument("g")
    s.add_argument("--strict", action="store_true")
    s.add_argument("--out")
    s = add("fibre", cmd_fibre, "homotopy fibre of a map over an object")
    s.add_argument("map")
    s.add_argument("object")
    s.add_argument("--out")
    s = add("quotient", cmd_quotient, "homotopy quotient of a group action")
    s.add_argument("action")
    s.add_argument("--out")
    s = add("eval", cmd_eval, "evaluate a polynomial")
    s.add_argument("--poly", required=True)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--groupoid")
    g.add_argument("--family")
    s.add_argument("--out")
    s = add("compose", cmd_compose, "compose one-variable polynomials and compare with two-stage evaluation")
    s.add_argument("--outer", required=True)
    s.add_argument("--inner", required=True)
    s.add_argument("--up-to", type=int, default=2)
    s.add_argument("--out")
    add("cartesian-check", cmd_cartesian, "is a square of polynomials homotopy cartesian").add_argument("square")
    s = add("bc-check", cmd_bc, "Beck-Chevalley equivalences for the pullback of two maps")
    s.add_argument("f")
    s.add_argument("g")

    s = add("species", cmd_species, "species operations")
    s.add_argument("action", choices=["egf", "to-poly", "from-poly", "eval"])
    s.add_argument("--species")
    s.add_argument("--poly")
    s.add_argument("--groupoid")
    s.add_argument("--out")

    s = add("trees", cmd_trees, "trees and P-trees")
    s.add_argument("action", choices=["validate", "enumerate", "iso"])
    s.add_argument("first", nargs="?")
    s.add_argument("second", nargs="?")
    s.add_argument("--poly")
    s.add_argument("--max-edges", type=int, default=5)

    s = add("check-suite", cmd_check_suite, "run the bundled invariant battery")
    s.add_argument("--timing", action="store_true")
    s.add_argument("--only", action="append", help="run only checks with this name prefix")
    return p


_REQUIRED = {
    ("species", "egf"): ["species"], ("species", "to-poly"): ["species"],
    ("species", "from-poly"): ["poly"], ("species", "eval"): ["species", "groupoid"],
    ("trees", "validate"): ["first"], ("trees", "enumerate"): ["poly"],
    ("trees", "iso"): ["first", "second"],
}


def _load_config(path):
    cfg = fio.read_json(path)
    if not isinstance(cfg, dict):
        raise ParseError("config must be a JSON object")
    return cfg


def _settings(a):
    for key in ("format", "cap_objects", "cap_sections", "trunc", "config"):
        if not hasattr(a, key):
            setattr(a, key, None)
    cfg = _load_config(a.config) if a.config else {}
    a._config_dir = Path(a.config).resolve().parent if a.config else None
    caps = dict(cfg.get("caps", {}))
    for key in ("objects", "sections", "group_order"):
        if f"cap_{key}" in cfg:
            caps[key] = cfg[f"cap_{key}"]
    if a.cap_objects is not None:
        caps["objects"] = a.cap_objects
    if a.cap_sections is not None:
        caps["sections"] = a.cap_sections
    bad = set(caps) - set(Caps.__dataclass_fields__)
    if bad or not all(isinstance(v, int) for v in caps.values()):
        raise ParseError(f"config: bad caps {sorted(caps)}")
    if a.trunc is None:
        a.trunc = cfg.get("trunc")
    a.format = a.format or cfg.get("format", "text")
    if a.format not in ("text", "json"):
        raise ParseError(f"config: unknown format {a.format!r}")
    a._fixtures = dict(cfg.get("fixtures", {}))
    return caps


def run(argv=None, out=None):
    """Run one command; writes the report and returns the exit code."""
    out = out or sys.stdout
    fmt = "text"
    rep = Report(" ".join(argv if argv is not None else sys.argv[1:]))
    try:
        a = build_parser().parse_args(argv)
        caps = _settings(a)
        fmt = a.format
        key = (a.command, getattr(a, "action", None))
        for field_ in _REQUIRED.get(key, []):
            if getattr(a, field_) is None:
                raise ParseError(f"{a.command} {key[1]} needs --{field_}" if field_ not in ("first", "second")
                                 else f"{a.command} {key[1]}: missing file argument")
        ws = fio.Workspace()
        with size_caps(**caps):
            a.fn(a, ws, rep)
    except ParseError as exc:
        rep.status = PARSE
        rep.payload["error"] = str(exc)
        rep.text.append(f"parse error: {exc}")
    except SizeCapExceeded as exc:
        rep.status = CAPPED
        rep.payload["error"] = str(exc)
        rep.text.append(f"size cap exceeded: {exc}")
    except (ValueError, KeyError) as exc:
        rep.status = FAILED
        rep.payload["error"] = str(exc)
        rep.text.append(f"error: {exc}")
    out.write(rep.render(fmt))
    out.flush()
    return rep.status


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
