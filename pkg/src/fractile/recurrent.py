"""Recurrent pairs: a graph G and an equivalent subgraph S of its N-fold
contraction, with the edge refinement map between them.

The contraction draws a scaled copy of G in every N-subtile; a selection of
copies forms S.  Equivalence matching produces the per-prototile skeleton
isomorphism (boundary vertices stay on their host edges, rotational orders
are preserved), and the injectivity conditions are decided exactly on
N-subtile patches.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from fractile.field import FieldScalar, Point, scalar
from fractile.geometry import Polygon, boundary_intersection, point_on_segment, polyline_meets_polygon
from fractile.graphs import (
    BOUNDARY,
    INTERIOR,
    EmbeddedGraph,
    GraphEdge,
    GraphError,
    GraphVertex,
    Skeleton,
)
from fractile.tiling import PlacedTile, SubstitutionRule


class PairError(ValueError):
    pass


@dataclass(frozen=True)
class EdgeCopy:
    """One scaled copy of a G-edge inside the N-fold contraction of a prototile."""

    prototile: int               # supertile the copy is drawn in
    digits: tuple[Point, ...]    # digit path, outermost first
    src_prototile: int
    src_edge: int                # raw edge index in G_{src_prototile}
    t: Point                     # composed translation (copy = lam^-N (edge + t))

    def id(self) -> str:
        digs = "/".join(f"{d.x},{d.y}" for d in self.digits)
        return f"{self.prototile}|{digs}|{self.src_prototile}.{self.src_edge}"


class ContractedGraph:
    """R^N applied to an embedded graph: all scaled G-copies per prototile."""

    def __init__(self, rule: SubstitutionRule, g: EmbeddedGraph, n: int):
        self.rule = rule
        self.g = g
        self.n = n
        self.copies: list[list[EdgeCopy]] = [[] for _ in range(rule.m)]
        if n == 0:
            for p in range(rule.m):
                for i, _e in enumerate(g.edges[p]):
                    self.copies[p].append(EdgeCopy(p, (), p, i, Point.of(0, 0)))
        else:
            for p in range(rule.m):
                for path, t, q in rule.digit_compositions(p, n):
                    for i, _e in enumerate(g.edges[q]):
                        self.copies[p].append(EdgeCopy(p, path, q, i, t))
        self._by_id = {c.id(): c for p in range(rule.m) for c in self.copies[p]}

    def polyline(self, c: EdgeCopy) -> tuple[Point, ...]:
        inv = self.rule.lam ** (-self.n)
        base = self.g.edges[c.src_prototile][c.src_edge].polyline
        return tuple((q + c.t).scale(inv) for q in base)

    def by_id(self, cid: str) -> EdgeCopy:
        return self._by_id[cid]

    def as_graph(self) -> EmbeddedGraph:
        return self.select(self._by_id.keys())

    def select(self, ids) -> EmbeddedGraph:
        """Build the embedded graph formed by the chosen edge copies."""
        chosen = [self._by_id[i] if isinstance(i, str) else i for i in ids]
        chosen.sort(key=lambda c: c.id())
        vertices: list[list[GraphVertex]] = [[] for _ in range(self.rule.m)]
        edges: list[list[GraphEdge]] = [[] for _ in range(self.rule.m)]
        provenance: list[list[EdgeCopy]] = [[] for _ in range(self.rule.m)]
        seen_pts: list[set[Point]] = [set() for _ in range(self.rule.m)]
        for c in chosen:
            poly = self.polyline(c)
            p = c.prototile
            edges[p].append(GraphEdge(poly))
            provenance[p].append(c)
            support = self.rule.support(p)
            for endpoint in (poly[0], poly[-1]):
                if endpoint in seen_pts[p]:
                    continue
                seen_pts[p].add(endpoint)
                kind = BOUNDARY if support.locate(endpoint) == 0 else INTERIOR
                host = (self.rule.edge_of_boundary_point(p, endpoint)
                        if kind == BOUNDARY else None)
                vertices[p].append(GraphVertex(endpoint, kind, host))
        g = EmbeddedGraph(self.rule, vertices, edges, validate=False)
        g.provenance = provenance
        return g


@dataclass
class Correspondence:
    """Per-prototile skeleton isomorphism G_p -> S_p."""

    vertex_maps: list[dict[int, int]]
    edge_maps: list[dict[int, tuple[int, bool]]]


def match_equivalence(g: EmbeddedGraph, s: EmbeddedGraph,
                      rule: SubstitutionRule) -> Correspondence:
    """Find skeleton isomorphisms respecting boundary hosts and rotational
    order; raises PairError describing the first obstruction."""
    vmaps, emaps = [], []
    for p in range(rule.m):
        gs, ss = g.skeletons[p], s.skeletons[p]
        result = _match_skeletons(gs, ss)
        if result is None:
            raise PairError(_mismatch_reason(gs, ss, p))
        vmaps.append(result[0])
        emaps.append(result[1])
    return Correspondence(vmaps, emaps)


def _signature(skel: Skeleton, v: int):
    sv = skel.vertices[v]
    return (sv.kind, sv.host_edge, skel.degree(v))


def _mismatch_reason(gs: Skeleton, ss: Skeleton, p: int) -> str:
    if len(gs.vertices) != len(ss.vertices) or len(gs.edges) != len(ss.edges):
        return (f"prototile {p}: skeleton size mismatch "
                f"({len(gs.vertices)}v/{len(gs.edges)}e vs "
                f"{len(ss.vertices)}v/{len(ss.edges)}e)")
    gsig = sorted(_signature(gs, v) for v in range(len(gs.vertices)))
    ssig = sorted(_signature(ss, v) for v in range(len(ss.vertices)))
    if gsig != ssig:
        return (f"prototile {p}: vertex signatures differ (kind/host/degree): "
                f"{gsig} vs {ssig}")
    return f"prototile {p}: no isomorphism preserves rotational order"


def _match_skeletons(gs: Skeleton, ss: Skeleton):
    ng = len(gs.vertices)
    if ng != len(ss.vertices) or len(gs.edges) != len(ss.edges):
        return None

    g_adj: dict[int, list[tuple[int, int]]] = {v: [] for v in range(ng)}
    for i, e in enumerate(gs.edges):
        g_adj[e.a].append((e.b, i))
        g_adj[e.b].append((e.a, i))

    def compatible(gv, sv):
        return _signature(gs, gv) == _signature(ss, sv)

    order = sorted(range(ng), key=lambda v: -gs.degree(v))
    assignment: dict[int, int] = {}
    used: set[int] = set()

    def backtrack(k: int):
        if k == ng:
            emap = _edge_map(gs, ss, assignment)
            if emap is not None and _rotation_ok(gs, ss, assignment, emap):
                return dict(assignment), emap
            return None
        gv = order[k]
        for sv in range(ng):
            if sv in used or not compatible(gv, sv):
                continue
            # adjacency consistency with already-assigned vertices
            ok = True
            for (nb, _ei) in g_adj[gv]:
                if nb in assignment:
                    if not _skel_has_edge(ss, sv, assignment[nb]):
                        ok = False
                        break
            if not ok:
                continue
            assignment[gv] = sv
            used.add(sv)
            res = backtrack(k + 1)
            if res is not None:
                return res
            del assignment[gv]
            used.discard(sv)
        return None

    return backtrack(0)


def _skel_has_edge(skel: Skeleton, a: int, b: int) -> bool:
    return any((e.a, e.b) in ((a, b), (b, a)) for e in skel.edges)


def _edge_map(gs: Skeleton, ss: Skeleton, vmap: dict[int, int]):
    emap: dict[int, tuple[int, bool]] = {}
    taken: set[int] = set()
    for i, e in enumerate(gs.edges):
        sa, sb = vmap[e.a], vmap[e.b]
        cand = [(j, se.a == sa) for j, se in enumerate(ss.edges)
                if j not in taken and (se.a, se.b) in ((sa, sb), (sb, sa))]
        if not cand:
            return None
        j, forward = cand[0]
        emap[i] = (j, forward)
        taken.add(j)
    return emap


def _rotation_ok(gs: Skeleton, ss: Skeleton, vmap, emap) -> bool:
    """Cyclic rotational orders must map forward (orientation preserved)."""
    for gv, sv in vmap.items():
        if gs.degree(gv) < 3:
            continue
        g_order = gs.rotational_order(gv)
        s_order = ss.rotational_order(sv)
        mapped = [_map_end(emap, gs, end) for end in g_order]
        # compare cyclic sequences
        n = len(s_order)
        if n != len(mapped):
            return False
        for shift in range(n):
            if all(mapped[k] == s_order[(k + shift) % n] for k in range(n)):
                break
        else:
            return False
    return True


def _map_end(emap, gs: Skeleton, end):
    i, fwd = end
    j, same = emap[i]
    return (j, fwd if same else not fwd)


@dataclass
class RecurrentPair:
    rule: SubstitutionRule
    g: EmbeddedGraph
    n: int
    contracted: ContractedGraph
    s: EmbeddedGraph          # selection of contraction copies (has .provenance)
    psi: Correspondence

    @staticmethod
    def build(rule: SubstitutionRule, g: EmbeddedGraph, n: int,
              selection) -> "RecurrentPair":
        contracted = ContractedGraph(rule, g, n)
        s = contracted.select(selection)
        psi = match_equivalence(g, s, rule)
        pair = RecurrentPair(rule, g, n, contracted, s, psi)
        pair.verify_decompositions()
        return pair

    def s_edge_of(self, p: int, g_edge: int) -> tuple[int, bool]:
        """Skeleton edge of S_p corresponding to a G_p skeleton edge."""
        return self.psi.edge_maps[p][g_edge]

    def decomposition(self, p: int, g_edge: int) -> list[tuple[EdgeCopy, bool]]:
        """Copies making up the image of a G-edge, in traversal order."""
        j, forward = self.s_edge_of(p, g_edge)
        skel_edge = self.s.skeletons[p].edges[j]
        pieces = list(skel_edge.pieces)
        if not forward:
            pieces = [(idx, not f) for idx, f in reversed(pieces)]
        return [(self.s.provenance[p][idx], f) for idx, f in pieces]

    def verify_decompositions(self) -> None:
        """Each image re-evaluates exactly to the matched S polyline."""
        for p in range(self.rule.m):
            for i in self.psi.edge_maps[p]:
                j, forward = self.psi.edge_maps[p][i]
                target = self.s.skeletons[p].edges[j].polyline
                if not forward:
                    target = tuple(reversed(target))
                pts: list[Point] = []
                for copy, fwd in self.decomposition(p, i):
                    poly = self.contracted.polyline(copy)
                    if not fwd:
                        poly = tuple(reversed(poly))
                    pts.extend(poly if not pts else poly[1:])
                if tuple(pts) != target:
                    raise PairError(
                        f"prototile {p} edge {i}: decomposition does not "
                        f"re-evaluate to the S polyline")

    def g_edge_list(self) -> list[tuple[int, int]]:
        """Global indexing of G skeleton edges as (prototile, edge index)."""
        out = []
        for p in range(self.rule.m):
            for i in range(len(self.g.skeletons[p].edges)):
                out.append((p, i))
        return out


# -- injectivity -------------------------------------------------------------

@dataclass
class ConditionResult:
    passed: bool
    witnesses: list[str]


@dataclass
class InjectivityReport:
    n_tested: int
    separation: ConditionResult        # distinct edge patches meet iff adjacent
    shared_vertex: ConditionResult     # common patch is one interior subtile
    corners_avoided: ConditionResult   # patch of S_p avoids prototile vertices
    boundary_trace: ConditionResult    # patch touches the boundary like its edge
    refinement: ConditionResult        # each edge image spans >= 2 subedges
    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in (self.separation, self.shared_vertex,
                                      self.corners_avoided, self.boundary_trace,
                                      self.refinement))

    def summary(self) -> str:
        names = ["I1", "I2", "I3", "I4", "refine"]
        conds = [self.separation, self.shared_vertex, self.corners_avoided,
                 self.boundary_trace, self.refinement]
        return ", ".join(f"{n}={'pass' if c.passed else 'FAIL'}"
                         for n, c in zip(names, conds))


def check_injectivity(pair: RecurrentPair, n_test: int) -> InjectivityReport:
    rule = pair.rule
    sep = ConditionResult(True, [])
    shared = ConditionResult(True, [])
    corners = ConditionResult(True, [])
    btrace = ConditionResult(True, [])
    refine = ConditionResult(True, [])

    for p in range(rule.m):
        subtiles = rule.subtile_patch(p, n_test)
        supports = [rule.tile_support(t) for t in subtiles]
        skel = pair.s.skeletons[p]
        support_p = rule.support(p)
        patches = []
        for e in skel.edges:
            bb = _polyline_bbox(e.polyline)
            hit = frozenset(
                i for i, sup in enumerate(supports)
                if _bbox_meet(bb, sup.bbox)
                and polyline_meets_polygon(e.polyline, sup))
            patches.append(hit)
        # a subtile (contained in the support) touches the boundary iff one of
        # its vertices lies on it or a support vertex lies on the subtile
        parent_vs = support_p.vertices
        interior_subtiles = set()
        for i, sup in enumerate(supports):
            touches = any(support_p.locate(v) == 0 for v in sup.vertices)
            if not touches:
                touches = any(_bbox_has(sup.bbox, pv) and sup.locate(pv) != -1
                              for pv in parent_vs)
            if not touches:
                interior_subtiles.add(i)

        # I1/I2 on every pair of S-edges of this prototile
        for (i, ei), (j, ej) in itertools.combinations(enumerate(skel.edges), 2):
            shared_vs = ({ei.a, ei.b} & {ej.a, ej.b})
            meets = bool(patches[i] & patches[j])
            if meets != bool(shared_vs):
                detail = (f"meet in subtiles {sorted(patches[i] & patches[j])}"
                          if meets else "are patch-disjoint")
                sep.passed = False
                sep.witnesses.append(
                    f"p{p}: edges {i},{j} {detail} but "
                    f"{'do not share' if meets else 'share'} a vertex")
                continue
            if shared_vs:
                if len(shared_vs) > 1:
                    shared.passed = False
                    shared.witnesses.append(f"p{p}: edges {i},{j} share two vertices")
                    continue
                (v,) = shared_vs
                vp = skel.vertices[v].point
                v_patch = {k for k, sup in enumerate(supports)
                           if sup.locate(vp) != -1}
                inter = patches[i] & patches[j]
                if not (len(v_patch) == 1 and inter == v_patch
                        and inter <= interior_subtiles):
                    shared.passed = False
                    shared.witnesses.append(
                        f"p{p}: edges {i},{j} share subtiles {sorted(inter)} at "
                        f"{vp}; expected the single interior subtile containing it")

        # I3: the whole graph's patch avoids prototile vertices
        union_patch = set().union(*patches) if patches else set()
        for k in union_patch:
            for v in rule.vertex_sets[p]:
                if supports[k].locate(v) != -1:
                    corners.passed = False
                    corners.witnesses.append(
                        f"p{p}: subtile {k} of the graph patch contains vertex {v}")

        # I4: boundary trace of each edge patch is connected and faithful
        for i, e in enumerate(skel.edges):
            touches_edge = any(support_p.locate(q) == 0 for q in e.polyline)
            trace = _boundary_trace(rule, p, [supports[k] for k in patches[i]])
            if bool(trace) != touches_edge:
                btrace.passed = False
                btrace.witnesses.append(
                    f"p{p}: edge {i} patch {'touches' if trace else 'misses'} the "
                    f"boundary but the edge does {'not' if trace else ''}")
            elif trace and not _trace_connected(rule, p, trace):
                btrace.passed = False
                btrace.witnesses.append(
                    f"p{p}: edge {i} boundary trace is disconnected")

        # refinement: every edge image decomposes into >= 2 copies
        for i in pair.psi.edge_maps[p]:
            if len(pair.decomposition(p, i)) < 2:
                refine.passed = False
                refine.witnesses.append(f"p{p}: edge {i} image is a single copy")

    return InjectivityReport(n_test, sep, shared, corners, btrace, refine)


def _polyline_bbox(poly):
    xs = [float(p.x) for p in poly]
    ys = [float(p.y) for p in poly]
    return (min(xs), min(ys), max(xs), max(ys))


def _bbox_meet(a, b, pad=1e-9):
    return not (a[2] < b[0] - pad or b[2] < a[0] - pad
                or a[3] < b[1] - pad or b[3] < a[1] - pad)


def _bbox_has(bb, p, pad=1e-9):
    x, y = float(p.x), float(p.y)
    return bb[0] - pad <= x <= bb[2] + pad and bb[1] - pad <= y <= bb[3] + pad


def least_passing_injectivity(pair: RecurrentPair, n_range=range(1, 5)):
    reports = {}
    for n in n_range:
        rep = check_injectivity(pair, n)
        reports[n] = rep
        if rep.all_passed:
            return n, reports
    return None, reports


def _boundary_trace(rule: SubstitutionRule, p: int, supports: list[Polygon]):
    """Pieces of the prototile boundary met by the subtile supports."""
    support_p = rule.support(p)
    feats = []
    for sup in supports:
        segs, pts = boundary_intersection(sup, support_p)
        feats.extend(("seg", a, b) for a, b in segs)
        feats.extend(("pt", q, q) for q in pts)
    return feats


def _trace_connected(rule: SubstitutionRule, p: int, feats) -> bool:
    """Is the union of boundary features one arc of the boundary circle?

    The boundary is parameterized by an exact coordinate in [0, n): corner i
    sits at i and edge i spans [i, i+1]; each feature lies within one edge.
    """
    poly = rule.support(p)
    corners = poly.vertices
    n = len(corners)

    def edge_param(q: Point, i: int) -> FieldScalar | None:
        a, b = corners[i], corners[(i + 1) % n]
        if not point_on_segment(q, a, b):
            return None
        dirv = b - a
        return scalar(i) + (q - a).dot(dirv) / dirv.dot(dirv)

    intervals: list[tuple[FieldScalar, FieldScalar]] = []
    for kind, a, b in feats:
        placed = False
        for i in range(n):
            ta, tb = edge_param(a, i), edge_param(b, i)
            if ta is not None and tb is not None:
                lo, hi = (ta, tb) if ta <= tb else (tb, ta)
                intervals.append((lo, hi))
                placed = True
                break
        if not placed:
            return False
    intervals.sort(key=lambda iv: iv[0])
    merged: list[list[FieldScalar]] = []
    for lo, hi in intervals:
        if merged and lo <= merged[-1][1]:
            if merged[-1][1] < hi:
                merged[-1][1] = hi
        else:
            merged.append([lo, hi])
    if len(merged) <= 1:
        return True
    # wraparound at 0 == n
    total = scalar(n)
    if merged[0][0] == scalar(0) and merged[-1][1] == total:
        merged[0][0] = merged[-1][0] - total
        merged.pop()
    return len(merged) <= 1
