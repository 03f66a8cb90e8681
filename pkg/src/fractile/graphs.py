"""Geometric graphs embedded on prototiles and the tilings they induce.

A graph assigns to each prototile a set of vertices (interior or on the
boundary) and polyline edges meeting only at shared vertices.  Skeletons
suppress degree-2 interior vertices; consistency checks decide whether the
boundary vertices glue across all tile adjacencies, and face traversal of
the graph drawn over a patch recovers the induced tiling.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

from fractile.field import Point, scalar
from fractile.geometry import point_on_segment, segment_intersection
from fractile.tiling import Patch, SubstitutionRule, _dir_key, patch_vertex_points


class GraphError(ValueError):
    pass


INTERIOR, BOUNDARY = "interior", "boundary"


@dataclass(frozen=True)
class GraphVertex:
    point: Point
    kind: str  # INTERIOR or BOUNDARY
    host_edge: int | None = None  # prototile edge index for boundary vertices


@dataclass(frozen=True)
class GraphEdge:
    polyline: tuple[Point, ...]

    @property
    def start(self) -> Point:
        return self.polyline[0]

    @property
    def end(self) -> Point:
        return self.polyline[-1]

    def reversed(self) -> "GraphEdge":
        return GraphEdge(tuple(reversed(self.polyline)))


class EmbeddedGraph:
    """Per-prototile geometric graphs, validated against the rule's supports."""

    def __init__(self, rule: SubstitutionRule,
                 vertices: list[list[GraphVertex]],
                 edges: list[list[GraphEdge]], validate: bool = True):
        self.rule = rule
        self.vertices = vertices
        self.edges = edges
        if validate:
            self._validate()

    def _validate(self) -> None:
        for p in range(self.rule.m):
            support = self.rule.support(p)
            vpoints = {v.point for v in self.vertices[p]}
            if len(vpoints) != len(self.vertices[p]):
                raise GraphError(f"prototile {p}: repeated graph vertex")
            for v in self.vertices[p]:
                on_boundary = support.locate(v.point) == 0
                if (v.kind == BOUNDARY) != on_boundary:
                    raise GraphError(f"prototile {p}: vertex {v.point} kind mismatch")
                if v.kind == BOUNDARY:
                    host = self.rule.edge_of_boundary_point(p, v.point)
                    if v.host_edge is not None and v.host_edge != host:
                        raise GraphError(f"prototile {p}: bad host edge for {v.point}")
            for e in self.edges[p]:
                if e.start not in vpoints or e.end not in vpoints:
                    raise GraphError(f"prototile {p}: edge endpoint is not a vertex")
                for seg_a, seg_b in zip(e.polyline, e.polyline[1:]):
                    if seg_a == seg_b:
                        raise GraphError(f"prototile {p}: zero-length edge segment")
                # interior points of the edge must avoid the support boundary
                for q in e.polyline[1:-1]:
                    if support.locate(q) == 0:
                        raise GraphError(
                            f"prototile {p}: edge touches the boundary off a vertex")
            self._check_edge_crossings(p, vpoints, support)

    def _segments_of(self, e: GraphEdge):
        return list(zip(e.polyline, e.polyline[1:]))

    def _check_edge_crossings(self, p, vpoints, support) -> None:
        edges = self.edges[p]
        allsegs = []
        for idx, e in enumerate(edges):
            for s in self._segments_of(e):
                allsegs.append((idx, s))
        for (i1, (a, b)), (i2, (c, d)) in itertools.combinations(allsegs, 2):
            hit = segment_intersection(a, b, c, d)
            if hit.kind == "none":
                continue
            if hit.kind == "overlap":
                raise GraphError(f"prototile {p}: overlapping edge segments")
            pt = hit.points[0]
            if pt in vpoints:
                continue
            if i1 == i2 and (pt == b or pt == c) and (b == c or a == d):
                continue  # consecutive segments of one polyline share a joint
            if i1 == i2:
                ends = {a, b} & {c, d}
                if ends:
                    continue
            raise GraphError(
                f"prototile {p}: edges meet at {pt}, which is not a graph vertex")
        # boundary crossing check: edge interiors may not touch the support boundary
        for idx, (a, b) in allsegs:
            for sa, sb in support.edges():
                hit = segment_intersection(a, b, sa, sb)
                if hit.kind == "overlap":
                    raise GraphError(f"prototile {p}: edge runs along the boundary")
                if hit.kind == "point" and hit.points[0] not in vpoints:
                    raise GraphError(
                        f"prototile {p}: edge crosses the boundary at {hit.points[0]}")

    # -- structure ----------------------------------------------------------

    def degree(self, p: int, pt: Point) -> int:
        deg = 0
        for e in self.edges[p]:
            deg += (e.start == pt) + (e.end == pt)
        return deg

    def boundary_vertices(self, p: int) -> list[GraphVertex]:
        return [v for v in self.vertices[p] if v.kind == BOUNDARY]

    def interior_vertices(self, p: int) -> list[GraphVertex]:
        return [v for v in self.vertices[p] if v.kind == INTERIOR]

    def host_edge(self, p: int, v: GraphVertex) -> int | None:
        if v.host_edge is not None:
            return v.host_edge
        return self.rule.edge_of_boundary_point(p, v.point)

    def translate_copy(self) -> "EmbeddedGraph":
        return self

    @cached_property
    def skeletons(self) -> list["Skeleton"]:
        return [Skeleton.from_graph(self, p) for p in range(self.rule.m)]


@dataclass(frozen=True)
class SkelVertex:
    point: Point
    kind: str
    host_edge: int | None


@dataclass
class SkelEdge:
    a: int  # skeleton vertex ids
    b: int
    polyline: tuple[Point, ...]  # concatenated geometric course a -> b
    pieces: tuple[tuple[int, bool], ...]  # (raw edge index, forward?) along a -> b


class Skeleton:
    """Combinatorial graph without degree-2 interior vertices, plus
    exact rotational order of edge-ends around every vertex."""

    def __init__(self, vertices: list[SkelVertex], edges: list[SkelEdge]):
        self.vertices = vertices
        self.edges = edges

    @staticmethod
    def from_graph(g: EmbeddedGraph, p: int) -> "Skeleton":
        raw = g.edges[p]
        vinfo = {v.point: v for v in g.vertices[p]}
        deg: dict[Point, int] = {}
        for e in raw:
            for pt in (e.start, e.end):
                deg[pt] = deg.get(pt, 0) + 1
        keep = [pt for pt in vinfo
                if deg.get(pt, 0) != 2 or vinfo[pt].kind == BOUNDARY]
        keep_set = set(keep)
        # walk chains between kept vertices through degree-2 interior vertices
        incident: dict[Point, list[tuple[int, bool]]] = {}
        for i, e in enumerate(raw):
            incident.setdefault(e.start, []).append((i, True))
            incident.setdefault(e.end, []).append((i, False))
        used = set()
        vertices = [SkelVertex(pt, vinfo[pt].kind, g.host_edge(p, vinfo[pt]))
                    for pt in keep]
        vid = {pt: i for i, pt in enumerate(keep)}
        edges: list[SkelEdge] = []
        for start_pt in keep:
            for (ei, forward) in incident.get(start_pt, ()):
                if (ei, forward) in used:
                    continue
                # walk forward until the next kept vertex
                chain = [(ei, forward)]
                used.add((ei, forward))
                cur = raw[ei].end if forward else raw[ei].start
                course = list(raw[ei].polyline if forward
                              else raw[ei].reversed().polyline)
                while cur not in keep_set:
                    nxt = [(j, f) for (j, f) in incident[cur]
                           if (j, f) != (chain[-1][0], not chain[-1][1])]
                    assert len(nxt) == 1, "degree-2 walk ambiguous"
                    j, f = nxt[0]
                    chain.append((j, f))
                    used.add((j, f))
                    seg = raw[j].polyline if f else raw[j].reversed().polyline
                    course.extend(seg[1:])
                    cur = seg[-1]
                used.add((chain[-1][0], not chain[-1][1]))
                # register the reverse as used via canonical ordering
                edges.append(SkelEdge(vid[start_pt], vid[cur], tuple(course),
                                      tuple(chain)))
        # each chain was found twice (once from each end); dedupe
        seen = {}
        dedup = []
        for e in edges:
            key = frozenset([(e.a, e.polyline), (e.b, tuple(reversed(e.polyline)))])
            if key in seen:
                continue
            seen[key] = True
            dedup.append(e)
        return Skeleton(vertices, dedup)

    def degree(self, v: int) -> int:
        return sum((e.a == v) + (e.b == v) for e in self.edges)

    def edge_ends(self, v: int) -> list[tuple[int, bool]]:
        """Edge-ends at v as (edge index, leaves-along-forward?)."""
        out = []
        for i, e in enumerate(self.edges):
            if e.a == v:
                out.append((i, True))
            if e.b == v:
                out.append((i, False))
        return out

    def rotational_order(self, v: int) -> list[tuple[int, bool]]:
        """Edge-ends at v sorted counterclockwise by exact leave direction."""
        ends = self.edge_ends(v)

        def direction(end):
            i, fwd = end
            pl = self.edges[i].polyline if fwd else tuple(reversed(self.edges[i].polyline))
            return _dir_key(pl[1] - pl[0])

        return sorted(ends, key=direction)

    def is_tree(self) -> bool:
        n, m = len(self.vertices), len(self.edges)
        if m != n - 1:
            return False
        # connectivity
        if n == 0:
            return False
        adj: dict[int, set[int]] = {i: set() for i in range(n)}
        for e in self.edges:
            adj[e.a].add(e.b)
            adj[e.b].add(e.a)
        seen = {0}
        stack = [0]
        while stack:
            cur = stack.pop()
            for nb in adj[cur]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        return len(seen) == n


@dataclass
class ConsistencyReport:
    t_consistent: bool
    quasi_dual: bool
    dual: bool
    diagnostics: list[str]


def check_consistency(g: EmbeddedGraph, rule: SubstitutionRule) -> ConsistencyReport:
    diags: list[str] = []
    # (i) handled by EmbeddedGraph validation; (ii) boundary vertices closed
    t_consistent = True
    bsets = [{v.point for v in g.boundary_vertices(p)} for p in range(rule.m)]
    for adj in rule.adjacency_classes:
        feats = list(adj.segments) + [(pt, pt) for pt in adj.points]
        for a, b in feats:
            for v in bsets[adj.p1]:
                if point_on_segment(v, a, b) and (v - adj.delta) not in bsets[adj.p2]:
                    t_consistent = False
                    diags.append(
                        f"boundary vertex {v} of prototile {adj.p1} has no partner "
                        f"in prototile {adj.p2}")
            for v in bsets[adj.p2]:
                w = v + adj.delta
                if point_on_segment(w, a, b) and w not in bsets[adj.p1]:
                    t_consistent = False
                    diags.append(
                        f"boundary vertex {v} of prototile {adj.p2} has no partner "
                        f"in prototile {adj.p1}")
    quasi = t_consistent
    for p in range(rule.m):
        skel = g.skeletons[p]
        if not skel.is_tree():
            quasi = False
            diags.append(f"prototile {p}: graph is not a connected tree")
        counts: dict[int, int] = {}
        vset = set(rule.vertex_sets[p])
        for v in g.boundary_vertices(p):
            if v.point in vset:
                quasi = False
                diags.append(f"prototile {p}: boundary vertex at a tiling vertex {v.point}")
                continue
            host = g.host_edge(p, v)
            counts[host] = counts.get(host, 0) + 1
        n_edges = len(rule.prototile_edges(p))
        if any(counts.get(i, 0) != 1 for i in range(n_edges)):
            quasi = False
            diags.append(
                f"prototile {p}: boundary vertices per edge {counts}, expected one each")
        for i, sv in enumerate(skel.vertices):
            if sv.kind == INTERIOR and skel.degree(i) < 3:
                quasi = False
                diags.append(
                    f"prototile {p}: interior vertex {sv.point} has skeleton degree "
                    f"{skel.degree(i)}")
    dual = quasi and all(len(g.interior_vertices(p)) == 1 for p in range(rule.m))
    return ConsistencyReport(t_consistent, quasi, dual, diags)


def _skel_vid(skel: Skeleton, pt: Point) -> int | None:
    for i, v in enumerate(skel.vertices):
        if v.point == pt:
            return i
    return None


# -- the graph drawn over a patch, and its faces -----------------------------

@dataclass
class Face:
    cycle: tuple[tuple[Point, Point], ...]  # directed merged-edge course
    polygon_points: tuple[Point, ...]
    complete: bool
    half_ids: tuple[int, ...] = ()
    label: object | None = None


class PatchGraph:
    """Union of per-tile graph copies over a unit-scale patch, with merged
    vertices and exact rotational orders, supporting face traversal."""

    def __init__(self, rule: SubstitutionRule, g: EmbeddedGraph, patch: Patch):
        self.rule = rule
        self.g = g
        self.patch = patch
        self.half_edges: list[tuple[Point, Point, tuple[Point, ...], object]] = []
        # merged vertex -> list of (half edge id) leaving it
        self.out_at: dict[Point, list[int]] = {}
        self.twin: list[int] = []
        self._build()

    def _build(self) -> None:
        for tile in self.patch:
            assert tile.level == 0
            for idx, e in enumerate(self.g.edges[tile.prototile]):
                poly = tuple(q + tile.translation for q in e.polyline)
                tag = (tile, idx)
                a, b = poly[0], poly[-1]
                h1 = len(self.half_edges)
                self.half_edges.append((a, b, poly, (tag, True)))
                h2 = len(self.half_edges)
                self.half_edges.append((b, a, tuple(reversed(poly)), (tag, False)))
                self.twin.extend([h2, h1])
                self.out_at.setdefault(a, []).append(h1)
                self.out_at.setdefault(b, []).append(h2)
        # dedupe geometrically identical half-edges (copies glued at boundaries)
        self._dedupe()
        for pt, hs in self.out_at.items():
            hs.sort(key=lambda h: _dir_key(self.half_edges[h][2][1] - pt))

    def _dedupe(self) -> None:
        canon: dict[tuple, int] = {}
        remap: dict[int, int] = {}
        for h, (a, b, poly, tag) in enumerate(self.half_edges):
            key = (a, b, poly)
            if key in canon:
                remap[h] = canon[key]
            else:
                canon[key] = h
                remap[h] = h
        new_ids: dict[int, int] = {}
        kept = sorted(set(remap.values()))
        for new, old in enumerate(kept):
            new_ids[old] = new
        self.half_edges = [self.half_edges[h] for h in kept]
        self.twin = [new_ids[remap[self.twin[h]]] for h in kept]
        out_at: dict[Point, list[int]] = {}
        for h, (a, b, poly, tag) in enumerate(self.half_edges):
            out_at.setdefault(a, []).append(h)
        self.out_at = out_at

    def next_in_face(self, h: int) -> int:
        """Half-edge following h in its face (interior kept on the left)."""
        a, b, poly, tag = self.half_edges[h]
        incoming_dir = _dir_key(poly[-2] - b)
        outs = self.out_at[b]
        # choose the outgoing edge immediately clockwise of the reversed arrival
        keyed = sorted(outs, key=lambda o: _dir_key(self.half_edges[o][2][1] - b))
        dirs = [_dir_key(self.half_edges[o][2][1] - b) for o in keyed]
        # position of the arrival direction in the CCW order
        import bisect
        pos = bisect.bisect_left(dirs, incoming_dir)
        # step to the previous one cyclically (max strictly below)
        return keyed[(pos - 1) % len(keyed)]

    def faces(self) -> list[Face]:
        visited = set()
        out: list[Face] = []
        for h0 in range(len(self.half_edges)):
            if h0 in visited:
                continue
            cycle = []
            h = h0
            while True:
                visited.add(h)
                cycle.append(h)
                h = self.next_in_face(h)
                if h == h0:
                    break
            pts: list[Point] = []
            complete = True
            used = set()
            for h in cycle:
                a, b, poly, tag = self.half_edges[h]
                if self.twin[h] in cycle:
                    complete = False  # walks back over itself: dangling edge
                pts.extend(poly[:-1])
            area2 = scalar(0)
            n = len(pts)
            for i in range(n):
                area2 = area2 + pts[i].cross(pts[(i + 1) % n])
            if area2.sign() <= 0:
                complete = False  # outer face
            out.append(Face(tuple((self.half_edges[h][0], self.half_edges[h][1])
                                  for h in cycle), tuple(pts), complete,
                            tuple(cycle)))
        return out


def induced_tiling(rule: SubstitutionRule, g: EmbeddedGraph, patch: Patch):
    """Closed faces of the graph drawn over the patch, labelled by the
    translation class of the sub-patch of tiles each face meets."""
    pg = PatchGraph(rule, g, patch)
    faces = pg.faces()
    from fractile.geometry import Polygon
    labelled = []
    for f in faces:
        if not f.complete:
            labelled.append(f)
            continue
        poly = Polygon(f.polygon_points, check=False)
        anchor = min(f.polygon_points,
                     key=lambda q: (q.x.a, q.x.b, q.y.a, q.y.b))
        cls = []
        for tile in patch:
            sup = rule.tile_support(tile)
            if polygons_touch(sup, poly):
                cls.append((tile.prototile, tile.translation - anchor))
        f.label = tuple(sorted(cls, key=lambda t: (t[0], str(t[1]))))
        labelled.append(f)
    return labelled


def polygons_touch(a, b) -> bool:
    from fractile.geometry import interiors_overlap
    if not _bbox_touch(a.bbox, b.bbox):
        return False
    if interiors_overlap(a, b):
        return True
    from fractile.geometry import boundary_intersection
    segs, pts = boundary_intersection(a, b)
    return bool(segs or pts)


def _bbox_touch(a, b, pad=1e-9):
    return not (a[2] < b[0] - pad or b[2] < a[0] - pad
                or a[3] < b[1] - pad or b[3] < a[1] - pad)
