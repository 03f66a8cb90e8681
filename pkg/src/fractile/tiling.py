"""Substitution rules on polygonal prototiles via digit matrices.

A rule stores, for each ordered prototile pair (p, q), the finite set of
translation vectors placing scaled q-copies inside p; the shrink-and-replace
operator iterates these digit sets.  Validation proves covering and packing
exactly, and the tiling-level vertex structure (consistent boundary vertex
sets, adjacency classes, vertex stars) is derived from supertile patches.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from fractile.field import FieldScalar, ORIGIN, Point, scalar
from fractile.geometry import (
    INSIDE,
    ON,
    OUTSIDE,
    Polygon,
    boundary_intersection,
    contains_polygon,
    interiors_overlap,
    orientation,
    point_on_segment,
)


class RuleError(ValueError):
    pass


@dataclass(frozen=True)
class Prototile:
    id: int
    label: str
    support: Polygon


@dataclass(frozen=True, slots=True)
class PlacedTile:
    """Tile with support = lam**-level * supp(prototile) + translation."""

    prototile: int
    translation: Point
    level: int = 0


Patch = tuple[PlacedTile, ...]


@dataclass(frozen=True)
class Adjacency:
    """Translation class of a two-tile contact: q2 + delta next to q1 (q1 at origin)."""

    p1: int
    p2: int
    delta: Point
    segments: tuple[tuple[Point, Point], ...]  # in p1 coordinates
    points: tuple[Point, ...]

    def key(self):
        return (self.p1, self.p2, self.delta)


@dataclass(frozen=True)
class VertexStar:
    """Translation class of the tiles meeting at a tiling vertex (anchor at origin)."""

    tiles: tuple[tuple[int, Point], ...]  # sorted (prototile, translation)

    @staticmethod
    def of(tiles: Iterable[tuple[int, Point]]) -> "VertexStar":
        return VertexStar(tuple(sorted(tiles, key=lambda t: (t[0], _point_key(t[1])))))


def _point_key(p: Point):
    return (p.x.a, p.x.b, p.y.a, p.y.b)


@dataclass
class ValidationReport:
    valid: bool
    errors: list[str]
    substitution_matrix: list[list[int]]
    primitive: bool
    singly_edge_to_edge: bool | None
    vertex_closure_depth: int | None

    def __str__(self) -> str:
        if not self.valid:
            return "invalid: " + "; ".join(self.errors)
        bits = ["valid", "primitive" if self.primitive else "NOT primitive"]
        if self.singly_edge_to_edge is not None:
            bits.append("singly edge-to-edge" if self.singly_edge_to_edge
                        else "NOT singly edge-to-edge")
        return "; ".join(bits)


class SubstitutionRule:
    def __init__(self, prototiles: Sequence[Prototile], lam: FieldScalar,
                 digits: Sequence[Sequence[Sequence[Point]]], d: int = 1,
                 name: str = "", max_closure_depth: int = 6,
                 max_extra_vertices: int | None = None):
        self.prototiles = list(prototiles)
        self.lam = lam
        self.d = d
        self.name = name
        self.max_closure_depth = max_closure_depth
        self.max_extra_vertices = max_extra_vertices
        m = len(self.prototiles)
        if m == 0:
            raise RuleError("at least one prototile is required")
        if lam <= scalar(1):
            raise RuleError("expansion factor must exceed 1")
        self.digits: list[list[tuple[Point, ...]]] = [
            [tuple(digits[p][q]) for q in range(m)] for p in range(m)
        ]
        self.M = [[len(self.digits[p][q]) for q in range(m)] for p in range(m)]

    # -- basics -----------------------------------------------------------

    @property
    def m(self) -> int:
        return len(self.prototiles)

    def support(self, p: int) -> Polygon:
        return self.prototiles[p].support

    def area(self, p: int) -> FieldScalar:
        return self.support(p).area()

    def tile_support(self, tile: PlacedTile) -> Polygon:
        poly = self.support(tile.prototile)
        if tile.level:
            poly = poly.scale(self.lam ** (-tile.level))
        return poly.translate(tile.translation)

    @cached_property
    def primitive(self) -> bool:
        m = self.m
        reach = [[bool(self.M[i][j]) for j in range(m)] for i in range(m)]
        power = [row[:] for row in reach]
        limit = (m - 1) * (m - 1) + 1
        for _ in range(limit):
            if all(all(row) for row in power):
                return True
            power = [[any(power[i][k] and reach[k][j] for k in range(m))
                      for j in range(m)] for i in range(m)]
        return all(all(row) for row in power)

    # -- patches ----------------------------------------------------------

    def subtile_patch(self, p: int, n: int) -> Patch:
        """The n-fold subdivision of prototile p: tiles at scale lam**-n."""
        if n < 0:
            raise RuleError("n must be nonnegative")
        if n == 0:
            return (PlacedTile(p, ORIGIN, 0),)
        # subdividing a depth-k tile: lam**-k (lam**-1 (supp r + d) + t)
        #                           = lam**-(k+1) (supp r + d + lam*t)
        tiles = [(p, ORIGIN)]
        for _ in range(n):
            nxt = []
            for q, t in tiles:
                scaled = t.scale(self.lam)
                for r in range(self.m):
                    for dvec in self.digits[q][r]:
                        nxt.append((r, scaled + dvec))
            tiles = nxt
        inv = self.lam ** (-n)
        return tuple(PlacedTile(q, t.scale(inv), n) for q, t in tiles)

    def supertile(self, p: int, n: int) -> Patch:
        """n-fold inflation of p: unit-scale tiles tiling lam**n * supp(p)."""
        if n == 0:
            return (PlacedTile(p, ORIGIN, 0),)
        sub = self.subtile_patch(p, n)
        lam_pow = self.lam ** n
        return tuple(PlacedTile(t.prototile, t.translation.scale(lam_pow), 0) for t in sub)

    def digit_compositions(self, p: int, n: int):
        """Yield (digit path, composed translation, target prototile) for n-subtiles."""
        stack = [(p, (), ORIGIN)]
        for _ in range(n):
            nxt = []
            for q, path, t in stack:
                scaled = t.scale(self.lam)
                for r in range(self.m):
                    for dvec in self.digits[q][r]:
                        nxt.append((r, path + (dvec,), scaled + dvec))
            stack = nxt
        for q, path, t in stack:
            yield path, t, q

    # -- validation ---------------------------------------------------------

    def validate(self, check_edges: bool = True) -> ValidationReport:
        errors: list[str] = []
        for p in range(self.m):
            parent = self.support(p)
            pieces = []
            for q in range(self.m):
                for dvec in self.digits[p][q]:
                    pieces.append((q, dvec,
                                   self.support(q).translate(dvec).scale(1 / self.lam)))
            total = scalar(0)
            for q, dvec, poly in pieces:
                if not contains_polygon(parent, poly):
                    errors.append(f"prototile {p}: subtile ({q}, {dvec}) leaves the support")
                total = total + poly.area()
            if total != parent.area():
                errors.append(
                    f"prototile {p}: subtile areas sum to {total}, expected {parent.area()}")
            for (q1, d1, a), (q2, d2, b) in itertools.combinations(pieces, 2):
                if _bbox_overlap(a.bbox, b.bbox) and interiors_overlap(a, b):
                    errors.append(
                        f"prototile {p}: subtiles ({q1}, {d1}) and ({q2}, {d2}) overlap")
                    break
        valid = not errors
        singly = None
        depth = None
        if valid and check_edges:
            try:
                depth = self.vertex_closure_depth
                singly = self.singly_edge_to_edge
            except RuleError as exc:
                errors.append(str(exc))
                valid = False
        return ValidationReport(valid, errors, [row[:] for row in self.M],
                                self.primitive if valid else False, singly, depth)

    # -- tiling vertex structure -------------------------------------------

    @cached_property
    def adjacency_classes(self) -> list[Adjacency]:
        self._build_vertex_structure()
        return self._adjacencies

    @cached_property
    def vertex_sets(self) -> list[list[Point]]:
        """Per prototile, boundary vertices in CCW order (closure of all corners)."""
        self._build_vertex_structure()
        return self._vertex_sets

    @cached_property
    def vertex_closure_depth(self) -> int:
        self._build_vertex_structure()
        return self._closure_depth

    @cached_property
    def singly_edge_to_edge(self) -> bool:
        """True when no two adjacent tiles share more than one tiling edge."""
        for adj in self.adjacency_classes:
            edge_count = len(adj.segments)
            if edge_count == 0:
                continue
            # count tiling edges on the shared part: vertices subdividing it
            verts = self.vertex_sets[adj.p1]
            n_edges = 0
            for a, b in adj.segments:
                interior_cuts = sum(
                    1 for v in verts
                    if v != a and v != b and point_on_segment(v, a, b))
                n_edges += interior_cuts + 1
            if n_edges > 1:
                return False
        return True

    def _scan_depth(self, depth: int, found: dict) -> None:
        """Add adjacency classes appearing inside depth-`depth` supertiles."""
        for p in range(self.m):
            patch = self.supertile(p, depth)
            _collect_adjacencies(self, patch, found)

    def _build_vertex_structure(self) -> None:
        if hasattr(self, "_vertex_sets"):
            return
        marks: list[set[Point]] = [set(self.support(p).vertices) for p in range(self.m)]
        found: dict = {}
        prev_state = None
        depth_used = None
        n_corners = sum(len(self.support(p).vertices) for p in range(self.m))
        for depth in range(1, self.max_closure_depth + 1):
            self._scan_depth(depth, found)
            _propagate_all(self, list(found.values()), marks,
                           None if self.max_extra_vertices is None
                           else n_corners + self.max_extra_vertices)
            if self.max_extra_vertices is not None and \
                    sum(len(m) for m in marks) > n_corners + self.max_extra_vertices:
                raise RuleError(
                    "consistent vertex closure exceeded the extra-vertex "
                    "budget; subtile edges are probably misaligned")
            # stabilization: the marks and the 1-dimensional contact classes;
            # pure corner contacts may keep enumerating without affecting the
            # vertex structure once the marks are stable
            state = (frozenset(k for k, adj in found.items() if adj.segments),
                     tuple(frozenset(m) for m in marks))
            if state == prev_state:
                depth_used = depth - 1
                break
            prev_state = state
        else:
            raise RuleError(
                f"vertex set failed to stabilize within supertile depth "
                f"{self.max_closure_depth}; the rule may lack finite local complexity")
        self._closure_depth = depth_used
        self._adjacencies = sorted(found.values(), key=lambda a: _adj_sort_key(a.key()))
        self._vertex_sets = [
            _order_on_boundary(self.support(p), marks[p]) for p in range(self.m)
        ]

    def prototile_edges(self, p: int) -> list[tuple[Point, Point]]:
        """Tiling edges of prototile p: consecutive boundary vertices, CCW."""
        vs = self.vertex_sets[p]
        return [(vs[i], vs[(i + 1) % len(vs)]) for i in range(len(vs))]

    def edge_of_boundary_point(self, p: int, pt: Point) -> int | None:
        """Index of the prototile edge whose closed segment contains pt."""
        for i, (a, b) in enumerate(self.prototile_edges(p)):
            if point_on_segment(pt, a, b):
                return i
        return None

    # -- vertex stars -------------------------------------------------------

    @cached_property
    def vertex_stars(self) -> list[VertexStar]:
        seeds: set[VertexStar] = set()
        for p in range(self.m):
            for k in (1, 2):
                patch = self.supertile(p, k)
                for star in _complete_stars(self, patch):
                    seeds.add(star)
        frontier = list(seeds)
        known = set(seeds)
        rounds = 0
        while frontier:
            rounds += 1
            if rounds > 50:
                raise RuleError("vertex star enumeration failed to stabilize")
            new: list[VertexStar] = []
            for star in frontier:
                for child in self.substitute_star(star):
                    if child not in known:
                        known.add(child)
                        new.append(child)
            frontier = new
        return sorted(known, key=lambda s: tuple((p, _point_key(t)) for p, t in s.tiles))

    def substitute_patch(self, patch: Patch) -> Patch:
        """Inflate each unit-scale tile of the patch once (result unit-scale)."""
        out = []
        for tile in patch:
            assert tile.level == 0
            base = tile.translation.scale(self.lam)
            for q in range(self.m):
                for dvec in self.digits[tile.prototile][q]:
                    out.append(PlacedTile(q, base + dvec))
        return tuple(out)

    def substitute_star(self, star: VertexStar) -> set[VertexStar]:
        patch = self.substitute_patch(tuple(PlacedTile(p, t) for p, t in star.tiles))
        return set(_complete_stars(self, patch))

    @cached_property
    def _vertex_lookup(self) -> list[set[Point]]:
        return [set(vs) for vs in self.vertex_sets]

    def star_of_vertex(self, patch: Patch, v: Point) -> VertexStar | None:
        """Star at v if complete inside the patch (v surrounded by tiles)."""
        inc = [t for t in patch
               if (v - t.translation) in self._vertex_lookup[t.prototile]]
        if not inc or not _vertex_is_surrounded(self, inc, v):
            return None
        return VertexStar.of((t.prototile, t.translation - v) for t in inc)


# -- helpers ---------------------------------------------------------------

def _bbox_overlap(a, b, pad: float = 1e-9) -> bool:
    return not (a[2] < b[0] - pad or b[2] < a[0] - pad
                or a[3] < b[1] - pad or b[3] < a[1] - pad)


def _adj_sort_key(key):
    p1, p2, delta = key
    return (p1, p2, _point_key(delta))


def _line_key(a: Point, b: Point):
    """Canonical exact key for the line through a, b."""
    A, B = b.y - a.y, a.x - b.x
    C = A * a.x + B * a.y
    lead = A if A.sign() != 0 else B
    inv = lead.inverse()
    A, B, C = A * inv, B * inv, C * inv
    return ((A.a, A.b, A.d), (B.a, B.b, B.d), (C.a, C.b, C.d))


def contact_pairs(rule: SubstitutionRule, patch: Patch,
                  supports: list[Polygon] | None = None) -> set[tuple[int, int]]:
    """Index pairs (i, j) of tiles whose boundaries intersect, via line/point hashes."""
    if supports is None:
        supports = [rule.tile_support(t) for t in patch]
    pairs: set[tuple[int, int]] = set()
    lines: dict = {}
    vertex_at: dict = {}
    for i, sup in enumerate(supports):
        for a, b in sup.edges():
            lines.setdefault(_line_key(a, b), []).append((i, a, b))
        for v in sup.vertices:
            vertex_at.setdefault(v, []).append(i)
    # 1-dimensional overlaps / touches along shared lines
    for group in lines.values():
        if len(group) < 2:
            continue
        _, a0, b0 = group[0]
        dirv = b0 - a0
        ivals = []
        for i, a, b in group:
            ta, tb = (a - a0).dot(dirv), (b - a0).dot(dirv)
            if ta > tb:
                ta, tb = tb, ta
            ivals.append((ta, tb, i))
        ivals.sort(key=lambda x: x[0])
        for k in range(len(ivals)):
            ta, tb, i = ivals[k]
            for l in range(k + 1, len(ivals)):
                tc, td, j = ivals[l]
                if tc > tb:
                    break
                if i != j:
                    pairs.add((min(i, j), max(i, j)))
    # vertex-vertex coincidence
    for v, owners in vertex_at.items():
        for i, j in itertools.combinations(sorted(set(owners)), 2):
            pairs.add((i, j))
    # vertex on edge interior (pure point contacts at T-junctions)
    grid: dict = {}
    cell = 0.5
    for v, owners in vertex_at.items():
        gx, gy = int(float(v.x) // cell), int(float(v.y) // cell)
        grid.setdefault((gx, gy), []).append((v, owners))
    for i, sup in enumerate(supports):
        for a, b in sup.edges():
            ax, ay, bx, by = float(a.x), float(a.y), float(b.x), float(b.y)
            gx0, gx1 = sorted((int(ax // cell), int(bx // cell)))
            gy0, gy1 = sorted((int(ay // cell), int(by // cell)))
            for gx in range(gx0 - 1, gx1 + 2):
                for gy in range(gy0 - 1, gy1 + 2):
                    for v, owners in grid.get((gx, gy), ()):
                        if point_on_segment(v, a, b):
                            for j in owners:
                                if j != i:
                                    pairs.add((min(i, j), max(i, j)))
    return pairs


def _collect_adjacencies(rule: SubstitutionRule, patch: Patch, found: dict) -> None:
    supports = [rule.tile_support(t) for t in patch]
    for i, j in contact_pairs(rule, patch, supports):
        t1, t2 = patch[i], patch[j]
        key = (t1.prototile, t2.prototile, t2.translation - t1.translation)
        alt = (t2.prototile, t1.prototile, t1.translation - t2.translation)
        if key in found or alt in found:
            continue
        if _adj_sort_key(alt) < _adj_sort_key(key):
            t1, t2 = t2, t1
            key = alt
            i, j = j, i
        segs, pts = boundary_intersection(supports[i], supports[j])
        if not segs and not pts:
            continue
        base = t1.translation
        segs_local = tuple((a - base, b - base) for a, b in segs)
        pts_local = tuple(p - base for p in pts)
        found[key] = Adjacency(key[0], key[1], key[2], segs_local, pts_local)


def _shared_features(adj: Adjacency):
    for a, b in adj.segments:
        yield ("seg", a, b)
    for p in adj.points:
        yield ("pt", p, p)


def _feat_boxes(adj: Adjacency):
    boxes = getattr(adj, "_boxes", None)
    if boxes is None:
        pad = 1e-7
        boxes = []
        for kind, a, b in _shared_features(adj):
            xs = (float(a.x), float(b.x))
            ys = (float(a.y), float(b.y))
            boxes.append((kind, a, b,
                          (min(xs) - pad, min(ys) - pad,
                           max(xs) + pad, max(ys) + pad)))
        object.__setattr__(adj, "_boxes", boxes)
    return boxes


def _exact_on(pt: Point, kind: str, a: Point, b: Point) -> bool:
    if kind == "pt":
        return pt == a
    return point_on_segment(pt, a, b)


def _propagate_marks(rule: SubstitutionRule, adj: Adjacency,
                     marks: list[set[Point]],
                     marks_f: list[dict[Point, tuple[float, float]]]) -> bool:
    """Copy marks across one adjacency class; floats prefilter, exact confirms."""
    changed = False
    dx, dy = float(adj.delta.x), float(adj.delta.y)

    def add(p: int, pt: Point) -> bool:
        if pt in marks[p]:
            return False
        marks[p].add(pt)
        marks_f[p][pt] = (float(pt.x), float(pt.y))
        return True

    for kind, a, b, box in _feat_boxes(adj):
        x0, y0, x1, y1 = box
        for m, (mx, my) in list(marks_f[adj.p1].items()):
            if x0 <= mx <= x1 and y0 <= my <= y1 and _exact_on(m, kind, a, b):
                if add(adj.p2, m - adj.delta):
                    changed = True
        for m, (mx, my) in list(marks_f[adj.p2].items()):
            sx, sy = mx + dx, my + dy
            if x0 <= sx <= x1 and y0 <= sy <= y1:
                shifted = m + adj.delta
                if _exact_on(shifted, kind, a, b) and add(adj.p1, shifted):
                    changed = True
    return changed


def _propagate_all(rule: SubstitutionRule, adjacencies: list[Adjacency],
                   marks: list[set[Point]], budget: int | None = None) -> None:
    """Worklist fixpoint of mark propagation across all classes."""
    marks_f = [{m: (float(m.x), float(m.y)) for m in ms} for ms in marks]
    touching: dict[int, list[Adjacency]] = {p: [] for p in range(rule.m)}
    for adj in adjacencies:
        touching[adj.p1].append(adj)
        if adj.p2 != adj.p1:
            touching[adj.p2].append(adj)
    pending = set(range(rule.m))
    while pending:
        if budget is not None and sum(len(m) for m in marks) > budget:
            return
        p = pending.pop()
        for adj in touching[p]:
            before1, before2 = len(marks[adj.p1]), len(marks[adj.p2])
            if _propagate_marks(rule, adj, marks, marks_f):
                if len(marks[adj.p1]) > before1:
                    pending.add(adj.p1)
                if len(marks[adj.p2]) > before2:
                    pending.add(adj.p2)


def _order_on_boundary(poly: Polygon, pts: set[Point]) -> list[Point]:
    """Sort boundary points CCW along the polygon outline."""
    out = []
    n = len(poly.vertices)
    for i in range(n):
        a, b = poly.vertices[i], poly.vertices[(i + 1) % n]
        on_edge = [p for p in pts if p != b and point_on_segment(p, a, b)]
        dirv = b - a
        on_edge.sort(key=lambda p: (p - a).dot(dirv))
        out.extend(on_edge)
    assert len(out) == len(pts), "mark off the polygon boundary"
    return out


def _incident_tiles(rule: SubstitutionRule, patch: Patch, v: Point) -> list[PlacedTile]:
    out = []
    vx, vy = float(v.x), float(v.y)
    for tile in patch:
        sup = rule.tile_support(tile)
        bb = sup.bbox
        if not (bb[0] - 1e-9 <= vx <= bb[2] + 1e-9 and bb[1] - 1e-9 <= vy <= bb[3] + 1e-9):
            continue
        if sup.locate(v) != OUTSIDE:
            out.append(tile)
    return out


def _vertex_is_surrounded(rule: SubstitutionRule, inc: list[PlacedTile], v: Point) -> bool:
    """Do the closed wedges of the incident tiles at v chain around the full circle?"""
    wedges = []
    for tile in inc:
        sup = rule.tile_support(tile)
        if sup.locate(v) == INSIDE:
            return True
        vs = sup.vertices
        n = len(vs)
        # find the boundary directions at v
        hit = None
        for i in range(n):
            a, b = vs[i], vs[(i + 1) % n]
            if v == a:
                prev = vs[(i - 1) % n]
                hit = (prev - v, b - v)
                break
            if v != b and point_on_segment(v, a, b):
                hit = (a - v, b - v)
                break
        if hit is None:
            return False
        wedges.append(hit)
    starts = sorted((_dir_key(w[1]) for w in wedges))
    ends = sorted((_dir_key(w[0]) for w in wedges))
    return starts == ends and len(starts) == len(wedges)


def _dir_key(v: Point):
    """Exact direction key: equal iff positively proportional."""
    sx, sy = v.x.sign(), v.y.sign()
    if sx == 0 and sy == 0:
        raise ValueError("zero direction")
    if sy == 0:
        return (0 if sx > 0 else 2, scalar(0).a, scalar(0).b)
    if sx == 0:
        return (1 if sy > 0 else 3, scalar(0).a, scalar(0).b)
    quad = {(1, 1): 0.5, (-1, 1): 1.5, (-1, -1): 2.5, (1, -1): 3.5}[(sx, sy)]
    slope = v.y / v.x
    return (quad, slope.a, slope.b)


def patch_vertex_points(rule: SubstitutionRule, patch: Patch) -> dict[Point, list[PlacedTile]]:
    """All tiling-vertex points of a unit-scale patch, mapped to incident tiles."""
    out: dict[Point, list[PlacedTile]] = {}
    for tile in patch:
        assert tile.level == 0
        for v in rule.vertex_sets[tile.prototile]:
            out.setdefault(v + tile.translation, []).append(tile)
    return out


def _complete_stars(rule: SubstitutionRule, patch: Patch):
    """Vertex stars fully surrounded inside the patch."""
    for v, inc in patch_vertex_points(rule, patch).items():
        if _vertex_is_surrounded(rule, inc, v):
            yield VertexStar.of((t.prototile, t.translation - v) for t in inc)
