"""Shared computation core behind the command line and the session service.

A session holds one rule document, the current contraction of its graph,
and a candidate subgraph selection; every analysis (validation,
equivalence, injectivity, dimension, cohomology) runs through here so the
command line and the service cannot disagree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from fractile.cohomology import (
    ap_cohomology,
    build_ap_complex,
    format_group,
)
from fractile.fractal import (
    build_edge_substitution,
    build_fractal_prototiles,
    hausdorff_dimension,
    iterate,
)
from fractile.graphs import check_consistency
from fractile.recurrent import (
    ContractedGraph,
    PairError,
    RecurrentPair,
    least_passing_injectivity,
)
from fractile.ruleio import RuleDocument


def dimension_string(value: float) -> str:
    return f"{value:.12f}"


@dataclass
class AnalysisResult:
    dimension: float
    dimension_text: str
    injectivity_n: int
    groups: tuple[str, str, str]
    index_diagnostics: list[str]

    def cohomology_lines(self) -> list[str]:
        h0, h1, h2 = self.groups
        return [f"H0 = {h0}", f"H1 = {h1}", f"H2 = {h2}"]


def analyze_pair(pair: RecurrentPair) -> AnalysisResult:
    n_pass, reports = least_passing_injectivity(pair)
    if n_pass is None:
        raise PairError("the selection fails the injectivity conditions "
                        f"for every tested depth: {reports[1].summary()}")
    es = build_edge_substitution(pair)
    dim = hausdorff_dimension(es)
    fps = build_fractal_prototiles(pair)
    ap = build_ap_complex(pair, fps)
    res = ap_cohomology(ap)
    lims = res["limits"]
    diags = []
    for name, lim in zip(("H1", "H2"), lims[1:]):
        if lim.eigenvector_index is not None:
            diags.append(
                f"{name}: eigenvector lattice index {lim.eigenvector_index}"
                + ("" if lim.index_coprime in (None, True)
                   else " (NOT coprime to the inverted primes; the splitting "
                        "is formal)"))
    return AnalysisResult(dim, dimension_string(dim), n_pass,
                          tuple(format_group(x) for x in lims), diags)


@dataclass
class Session:
    doc: RuleDocument
    n: int = 1
    version: int = 0
    selection: list[str] = field(default_factory=list)
    _contracted: ContractedGraph | None = None
    _pair: RecurrentPair | None = None
    _analysis: AnalysisResult | None = None
    _selection_report: dict | None = None

    def __post_init__(self):
        if self.doc.pair_block is not None:
            self.n = self.doc.pair_block["n"]

    @property
    def rule(self):
        return self.doc.rule

    @property
    def graph(self):
        return self.doc.graph("G")

    @property
    def contracted(self) -> ContractedGraph:
        if self._contracted is None:
            self._contracted = ContractedGraph(self.rule, self.graph, self.n)
        return self._contracted

    def scene(self) -> dict[str, Any]:
        rule = self.rule
        g = self.graph
        tiles = [{
            "id": p,
            "label": rule.prototiles[p].label,
            "outline": [v.as_floats() for v in rule.support(p).vertices],
        } for p in range(rule.m)]
        gedges = [{
            "prototile": p,
            "polyline": [q.as_floats() for q in e.polyline],
        } for p in range(rule.m) for e in g.edges[p]]
        copies = [{
            "id": c.id(),
            "prototile": c.prototile,
            "polyline": [q.as_floats() for q in self.contracted.polyline(c)],
            "selected": c.id() in set(self.selection),
        } for p in range(rule.m) for c in self.contracted.copies[p]]
        return {
            "formatVersion": 1,
            "version": self.version,
            "name": rule.name,
            "n": self.n,
            "prototiles": tiles,
            "graph": gedges,
            "contracted": copies,
            "selection": sorted(self.selection),
            "reports": self._selection_report,
        }

    def set_selection(self, ids: list[str]) -> dict[str, Any]:
        self.version += 1
        self.selection = sorted(set(ids))
        self._pair = None
        self._analysis = None
        report: dict[str, Any] = {"version": self.version}
        if not self.selection:
            report["equivalence"] = {
                "ok": False,
                "detail": "selection is empty: S has no edges in any prototile",
            }
            report["injectivity"] = None
            self._selection_report = report
            return report
        missing = [p for p in range(self.rule.m)
                   if not any(i.startswith(f"{p}|") for i in self.selection)]
        if missing:
            label = self.rule.prototiles[missing[0]].label
            report["equivalence"] = {
                "ok": False,
                "detail": f"S has no edges in prototile {label}",
            }
            report["injectivity"] = None
            self._selection_report = report
            return report
        try:
            pair = RecurrentPair.build(self.rule, self.graph, self.n,
                                       self.selection)
        except (PairError, KeyError) as exc:
            report["equivalence"] = {"ok": False, "detail": str(exc)}
            report["injectivity"] = None
            self._selection_report = report
            return report
        self._pair = pair
        s_report = check_consistency(pair.s, self.rule)
        n_pass, reports = least_passing_injectivity(pair)
        inj = reports[min(reports)] if n_pass is None else reports[n_pass]
        report["equivalence"] = {
            "ok": True,
            "detail": "selection is combinatorially equivalent to G",
            "t_consistent": s_report.t_consistent,
            "quasi_dual": s_report.quasi_dual,
            "dual": s_report.dual,
        }
        report["injectivity"] = {
            "passed": n_pass is not None,
            "n": n_pass,
            "summary": inj.summary(),
            "witnesses": {
                "separation": inj.separation.witnesses[:4],
                "shared_vertex": inj.shared_vertex.witnesses[:4],
                "corners": inj.corners_avoided.witnesses[:4],
                "boundary": inj.boundary_trace.witnesses[:4],
                "refinement": inj.refinement.witnesses[:4],
            },
        }
        self._selection_report = report
        return report

    def pair(self) -> RecurrentPair:
        if self._pair is None:
            raise PairError("no valid pair: make a selection first")
        return self._pair

    def iterate_polylines(self, level: int) -> list[dict]:
        es = build_edge_substitution(self.pair())
        approx = iterate(es, level)
        out = []
        for (p, i), poly in zip(es.edges, approx.polylines):
            out.append({"prototile": p, "edge": i,
                        "points": [[float(x), float(y)] for x, y in poly]})
        return out

    def analysis(self) -> AnalysisResult:
        if self._analysis is None:
            self._analysis = analyze_pair(self.pair())
        return self._analysis


def load_session(doc: RuleDocument) -> Session:
    s = Session(doc)
    if doc.pair_block is not None:
        s.set_selection(doc.pair_block["selection"])
    return s
