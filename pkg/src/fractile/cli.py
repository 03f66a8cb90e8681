"""Command line interface.

Exit codes: 0 ok, 1 validation failure, 2 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path


def _load(path: str):
    from fractile.ruleio import load_bundled, parse_rule

    p = Path(path)
    if p.exists():
        return parse_rule(p.read_text())
    try:
        return load_bundled(path.removesuffix(".rule"))
    except FileNotFoundError:
        raise SystemExit(f"rule file not found: {path}")


def _emit_error(args, code: int, message: str, detail=None) -> int:
    if getattr(args, "json", False):
        print(json.dumps({"error": message, "detail": detail}))
    else:
        print(f"error: {message}", file=sys.stderr)
        if detail:
            for line in (detail if isinstance(detail, list) else [detail]):
                print(f"  {line}", file=sys.stderr)
    return code


def cmd_validate(args) -> int:
    doc = _load(args.rule)
    report = doc.rule.validate()
    octagon = ""
    if not report.valid:
        return _emit_error(args, 1, "rule invalid", report.errors)
    if args.json:
        print(json.dumps({
            "valid": True,
            "substitutionMatrix": report.substitution_matrix,
            "primitive": report.primitive,
            "singlyEdgeToEdge": report.singly_edge_to_edge,
            "closureDepth": report.vertex_closure_depth,
            "vertexCounts": [len(v) for v in doc.rule.vertex_sets],
        }))
        return 0
    extra = sum(len(v) for v in doc.rule.vertex_sets) - sum(
        len(doc.rule.support(p).vertices) for p in range(doc.rule.m))
    if not report.singly_edge_to_edge and extra > 0:
        octagon = " (consistent closure enlarges the vertex sets)"
    print(str(report) + octagon)
    print(f"vertex closure reached at supertile depth {report.vertex_closure_depth}")
    print("substitution matrix rows:")
    for row in report.substitution_matrix:
        print("  " + " ".join(f"{x:3d}" for x in row))
    return 0


def cmd_render(args) -> int:
    from fractile.fractal import build_edge_substitution, iterate
    from fractile.svg import render_rule_overlay
    from fractile.workbench import load_session

    doc = _load(args.rule)
    session = load_session(doc)
    es = None
    polylines = None
    if doc.pair_block is not None:
        es = build_edge_substitution(session.pair())
        polylines = iterate(es, args.level).polylines
    graph = doc.graph_blocks.get("G")
    patch = None
    if args.patch > 0:
        patch = doc.rule.supertile(0, args.patch)
    svg = render_rule_overlay(doc.rule, graph=graph, level_polylines=polylines,
                              patch=patch, es=es)
    Path(args.out).write_text(svg)
    print(f"wrote {args.out}")
    return 0


def cmd_dimension(args) -> int:
    from fractile.workbench import load_session

    doc = _load(args.rule)
    if doc.pair_block is None:
        return _emit_error(args, 1, "rule has no pair block; run search first")
    session = load_session(doc)
    result = session.analysis()
    if args.json:
        print(json.dumps({"dimension": result.dimension,
                          "dimensionText": result.dimension_text,
                          "injectivityDepth": result.injectivity_n}))
    else:
        print(f"boundary dimension = {result.dimension_text}")
        print(f"(injectivity conditions pass on {result.injectivity_n}-subtiles)")
    return 0


def cmd_cohomology(args) -> int:
    if args.matrices:
        return _cohomology_fixture(args)
    from fractile.workbench import load_session

    doc = _load(args.rule)
    if doc.pair_block is None:
        return _emit_error(args, 1, "rule has no pair block; run search first")
    session = load_session(doc)
    result = session.analysis()
    if args.json:
        print(json.dumps({"groups": list(result.groups),
                          "diagnostics": result.index_diagnostics}))
        return 0
    _print_complex(session)
    for line in result.cohomology_lines():
        print(line)
    for d in result.index_diagnostics:
        print(f"note: {d}")
    return 0


def _print_complex(session) -> None:
    from fractile.cohomology import build_ap_complex
    from fractile.fractal import build_fractal_prototiles

    pair = session.pair()
    fps = build_fractal_prototiles(pair)
    ap = build_ap_complex(pair, fps)
    print(f"complex: {len(ap.vertices)} vertices, {len(ap.edges)} edges, "
          f"{len(ap.a2)} faces")
    for name, mat in (("delta0", ap.delta0), ("delta1", ap.delta1),
                      ("A1", ap.a1), ("A2", ap.a2)):
        print(f"{name} =")
        for row in mat:
            print("   " + " ".join(f"{x:3d}" for x in row))


def _cohomology_fixture(args) -> int:
    from fractile.cohomology import (cohomology_from_matrices, format_group,
                                     parse_matrix)

    base = Path(args.matrices)
    mats = {}
    for name in ("delta0", "delta1", "a0", "a1", "a2"):
        f = base / f"{name}.txt"
        if not f.exists():
            return _emit_error(args, 1, f"missing matrix fixture {f}")
        mats[name] = parse_matrix(f.read_text())
    res = cohomology_from_matrices(mats["delta0"], mats["delta1"],
                                   mats["a0"], mats["a1"], mats["a2"])
    h = res["approximant"]
    lims = res["limits"]
    if args.json:
        print(json.dumps({
            "approximant": [str(x.group) for x in h],
            "groups": [format_group(x) for x in lims],
        }))
        return 0
    print("approximant cohomology: "
          + ", ".join(f"H{i} = {x.group}" for i, x in enumerate(h)))
    for i, lim in enumerate(lims):
        print(f"H{i} = {format_group(lim)}")
    return 0


def cmd_search(args) -> int:
    from fractile.catalog import midpoint_dual_graph
    from fractile.ruleio import RuleDocument, print_rule
    from fractile.search import (DualTargetError, SearchError, convex_dual_pair,
                                 search_pair_sequence)

    doc = _load(args.rule)
    rule = doc.rule
    g0 = doc.graph_blocks.get("G") or midpoint_dual_graph(rule)
    try:
        if args.target == "dual":
            result = convex_dual_pair(rule, seed=args.seed, max_n=args.max_n)
        else:
            result = search_pair_sequence(rule, g0, seed=args.seed,
                                          max_n=args.max_n,
                                          allow_non_singly=args.force)
    except DualTargetError as exc:
        return _emit_error(args, 1, "dual target impossible", str(exc))
    except SearchError as exc:
        return _emit_error(args, 1, "search failed", str(exc))
    pair = result.pair
    print(f"found a pair at contraction depth {result.n} "
          f"after {result.iterations} redraw iterations")
    print(f"injectivity: {result.report.summary()}")
    if args.out:
        out = RuleDocument(rule)
        out.graph_blocks["G"] = pair.g
        out.pair_block = {
            "n": pair.n,
            "selection": sorted(c.id() for p in range(rule.m)
                                for c in pair.s.provenance[p]),
        }
        Path(args.out).write_text(print_rule(out) + "\n")
        print(f"wrote {args.out}")
    return 0


def cmd_serve(args) -> int:
    from fractile.server import serve
    from fractile.workbench import load_session

    doc = _load(args.rule)
    session = load_session(doc)
    serve(session, args.port)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fractile",
        description="workbench for substitution tilings and their fractal "
                    "realizations")
    parser.add_argument("--json", action="store_true",
                        help="machine-readable errors and results")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check covering/packing and structure")
    p.add_argument("rule")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("render", help="write an SVG of the rule/graph/curves")
    p.add_argument("rule")
    p.add_argument("--level", type=int, default=0)
    p.add_argument("--patch", type=int, default=0,
                   help="render over this supertile depth instead")
    p.add_argument("--out", default="out.svg")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("dimension", help="boundary dimension of the pair")
    p.add_argument("rule")
    p.set_defaults(func=cmd_dimension)

    p = sub.add_parser("cohomology", help="tiling space cohomology")
    p.add_argument("rule", nargs="?")
    p.add_argument("--matrices", help="directory of matrix fixtures")
    p.set_defaults(func=cmd_cohomology)

    p = sub.add_parser("search", help="construct a recurrent pair")
    p.add_argument("rule")
    p.add_argument("--target", choices=("quasi-dual", "dual"),
                   default="quasi-dual")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-n", type=int, default=6)
    p.add_argument("--force", action="store_true",
                   help="attempt even when not singly edge-to-edge")
    p.add_argument("--out", help="write the found pair as a rule file")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("serve", help="run the local session service")
    p.add_argument("rule")
    p.add_argument("--port", type=int, default=8642)
    p.set_defaults(func=cmd_serve)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        from fractile.ruleio import ParseIssue

        if isinstance(exc, ParseIssue):
            return _emit_error(args, 1, "parse failed", exc.issues)
        if getattr(args, "json", False):
            print(json.dumps({"error": "internal", "detail": str(exc)}))
        else:
            print(f"internal error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
