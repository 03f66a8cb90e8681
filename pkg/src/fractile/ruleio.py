"""Rule documents: JSON files describing a substitution rule with optional
graph and pair blocks.

Rationals are string-encoded ("p/q", "p/q+r/s√d") so nothing passes through
floating point.  Semantic errors carry JSON-path locations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from fractile.field import FieldError, FieldScalar, Point, format_scalar, parse_scalar, scalar
from fractile.geometry import GeometryError, Polygon
from fractile.graphs import BOUNDARY, INTERIOR, EmbeddedGraph, GraphEdge, GraphVertex
from fractile.tiling import Prototile, RuleError, SubstitutionRule

FORMAT_VERSION = 1


class ParseIssue(Exception):
    def __init__(self, issues: list[str]):
        self.issues = issues
        super().__init__("; ".join(issues))


@dataclass
class RuleDocument:
    rule: SubstitutionRule
    graph_blocks: dict[str, EmbeddedGraph] = field(default_factory=dict)
    pair_block: dict | None = None
    raw: dict | None = None

    def graph(self, name: str = "G") -> EmbeddedGraph:
        return self.graph_blocks[name]

    def pair(self):
        from fractile.recurrent import RecurrentPair

        if self.pair_block is None:
            raise RuleError("document has no pair block")
        return RecurrentPair.build(self.rule, self.graph("G"),
                                   self.pair_block["n"],
                                   self.pair_block["selection"])


def _scalar_at(issues, text, d, where) -> FieldScalar | None:
    try:
        return parse_scalar(str(text), d=d)
    except FieldError as exc:
        issues.append(f"{where}: {exc}")
        return None


def _point_at(issues, pair, d, where) -> Point | None:
    if not isinstance(pair, (list, tuple)) or len(pair) != 2:
        issues.append(f"{where}: expected [x, y]")
        return None
    x = _scalar_at(issues, pair[0], d, where + "[0]")
    y = _scalar_at(issues, pair[1], d, where + "[1]")
    if x is None or y is None:
        return None
    return Point(x, y)


def parse_rule(text: str) -> RuleDocument:
    """Parse and validate a rule document; raises ParseIssue with precise
    locations on failure."""
    issues: list[str] = []
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseIssue([f"line {exc.lineno}, column {exc.colno}: {exc.msg}"])
    if not isinstance(doc, dict):
        raise ParseIssue(["top level must be an object"])
    if doc.get("formatVersion") != FORMAT_VERSION:
        raise ParseIssue([f"formatVersion must be {FORMAT_VERSION}"])
    d = doc.get("field", {}).get("d", 1)
    if not isinstance(d, int) or d < 1:
        raise ParseIssue(["field.d: must be a positive integer"])
    lam = _scalar_at(issues, doc.get("lambda", "2"), d, "lambda")
    protos_json = doc.get("prototiles", [])
    if not protos_json:
        issues.append("prototiles: at least one prototile is required")
        raise ParseIssue(issues)
    prototiles = []
    for idx, pj in enumerate(protos_json):
        where = f"prototiles[{idx}]"
        verts = []
        for vi, vj in enumerate(pj.get("vertices", [])):
            pt = _point_at(issues, vj, d, f"{where}.vertices[{vi}]")
            if pt is not None:
                verts.append(pt)
        if issues:
            continue
        try:
            poly = Polygon(verts)
        except GeometryError as exc:
            issues.append(f"{where}: {exc}")
            continue
        prototiles.append(Prototile(idx, str(pj.get("label", f"p{idx}")), poly))
    if issues:
        raise ParseIssue(issues)
    m = len(prototiles)
    digits_json = doc.get("digits")
    if not isinstance(digits_json, list) or len(digits_json) != m or \
            any(len(row) != m for row in digits_json):
        raise ParseIssue([f"digits: expected an {m}x{m} array of vector lists"])
    digits = []
    for p in range(m):
        row = []
        for q in range(m):
            vecs = []
            for k, vj in enumerate(digits_json[p][q]):
                pt = _point_at(issues, vj, d, f"digits[{p}][{q}][{k}]")
                if pt is not None:
                    vecs.append(pt)
            row.append(tuple(vecs))
        digits.append(row)
    if issues:
        raise ParseIssue(issues)
    rule = SubstitutionRule(prototiles, lam, digits, d=d,
                            name=str(doc.get("name", "")),
                            max_closure_depth=int(doc.get("maxClosureDepth", 6)))
    report = rule.validate(check_edges=False)
    if not report.valid:
        raise ParseIssue([f"rule: {e}" for e in report.errors])

    out = RuleDocument(rule, raw=doc)
    for name, gj in (doc.get("graphs") or {}).items():
        out.graph_blocks[name] = _parse_graph(issues, rule, gj, d, f"graphs.{name}")
    if issues:
        raise ParseIssue(issues)
    pj = doc.get("pair")
    if pj is not None:
        n = pj.get("n")
        sel = pj.get("selection")
        if not isinstance(n, int) or n < 0:
            issues.append("pair.n: nonnegative integer required")
        if not isinstance(sel, list) or not all(isinstance(s, str) for s in sel):
            issues.append("pair.selection: list of edge-copy ids required")
        if issues:
            raise ParseIssue(issues)
        out.pair_block = {"n": n, "selection": sel}
    return out


def _parse_graph(issues, rule, gj, d, where) -> EmbeddedGraph | None:
    vertices = []
    edges = []
    for p in range(rule.m):
        where_p = f"{where}[{p}]"
        block = gj[p] if isinstance(gj, list) and p < len(gj) else None
        if block is None:
            issues.append(f"{where_p}: missing per-prototile graph block")
            return None
        vlist = []
        for vi, vj in enumerate(block.get("vertices", [])):
            pt = _point_at(issues, vj.get("at"), d, f"{where_p}.vertices[{vi}].at")
            kind = vj.get("kind", INTERIOR)
            if kind not in (INTERIOR, BOUNDARY):
                issues.append(f"{where_p}.vertices[{vi}].kind: bad kind {kind!r}")
                continue
            if pt is not None:
                vlist.append(GraphVertex(pt, kind, vj.get("hostEdge")))
        elist = []
        for ei, ej in enumerate(block.get("edges", [])):
            pts = []
            for k, vj in enumerate(ej.get("polyline", [])):
                pt = _point_at(issues, vj, d, f"{where_p}.edges[{ei}].polyline[{k}]")
                if pt is not None:
                    pts.append(pt)
            if len(pts) >= 2:
                elist.append(GraphEdge(tuple(pts)))
            else:
                issues.append(f"{where_p}.edges[{ei}]: polyline needs 2+ points")
        vertices.append(vlist)
        edges.append(elist)
    if issues:
        return None
    try:
        return EmbeddedGraph(rule, vertices, edges)
    except Exception as exc:
        issues.append(f"{where}: {exc}")
        return None


def print_rule(docobj: RuleDocument) -> str:
    """Canonical serialization; parse(print(doc)) round-trips."""
    rule = docobj.rule

    def fmt_pt(p: Point):
        return [format_scalar(p.x), format_scalar(p.y)]

    doc: dict[str, Any] = {
        "formatVersion": FORMAT_VERSION,
        "name": rule.name,
        "field": {"d": rule.d},
        "lambda": format_scalar(rule.lam),
        "prototiles": [
            {"id": p.id, "label": p.label,
             "vertices": [fmt_pt(v) for v in p.support.vertices]}
            for p in rule.prototiles
        ],
        "digits": [[[fmt_pt(v) for v in rule.digits[p][q]]
                    for q in range(rule.m)] for p in range(rule.m)],
    }
    if docobj.graph_blocks:
        graphs = {}
        for name, g in docobj.graph_blocks.items():
            blocks = []
            for p in range(rule.m):
                blocks.append({
                    "vertices": [
                        {"at": fmt_pt(v.point), "kind": v.kind,
                         **({"hostEdge": v.host_edge}
                            if v.host_edge is not None else {})}
                        for v in g.vertices[p]],
                    "edges": [{"polyline": [fmt_pt(q) for q in e.polyline]}
                              for e in g.edges[p]],
                })
            graphs[name] = blocks
        doc["graphs"] = graphs
    if docobj.pair_block is not None:
        doc["pair"] = {"n": docobj.pair_block["n"],
                       "selection": list(docobj.pair_block["selection"])}
    return json.dumps(doc, indent=1)


def load_bundled(name: str) -> RuleDocument:
    import importlib.resources

    ref = importlib.resources.files("fractile") / "rules" / f"{name}.rule"
    return parse_rule(ref.read_text())


def bundled_names() -> list[str]:
    import importlib.resources

    ref = importlib.resources.files("fractile") / "rules"
    return sorted(f.name[:-5] for f in ref.iterdir() if f.name.endswith(".rule"))
