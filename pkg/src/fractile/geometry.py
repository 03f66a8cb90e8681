"""Exact planar predicates: orientation, segment intersection, simple polygons.

All decisions reduce to sign computations in the coordinate field; the
interiors-overlap test is complete for arbitrary simple polygons (proper
crossings, containment, shared boundary arcs and wedge contacts).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from fractile.field import FieldScalar, Point, scalar

LEFT, RIGHT, COLLINEAR = 1, -1, 0


class GeometryError(ValueError):
    pass


def orientation(p: Point, q: Point, r: Point) -> int:
    """Sign of the determinant of (q-p, r-p): +1 left turn, -1 right, 0 collinear."""
    return (q - p).cross(r - p).sign()


def _on_segment(p: Point, a: Point, b: Point) -> bool:
    """p collinear with a-b assumed; is p within the closed segment?"""
    return (a - p).dot(b - p).sign() <= 0


def point_on_segment(p: Point, a: Point, b: Point) -> bool:
    return orientation(a, b, p) == 0 and _on_segment(p, a, b)


@dataclass(frozen=True)
class SegmentHit:
    kind: str  # "none" | "point" | "overlap"
    points: tuple[Point, ...] = ()
    proper: bool = False  # interior-interior transversal crossing


def segment_intersection(a: Point, b: Point, c: Point, d: Point) -> SegmentHit:
    """Exact intersection of closed segments ab and cd."""
    o1, o2 = orientation(a, b, c), orientation(a, b, d)
    o3, o4 = orientation(c, d, a), orientation(c, d, b)
    if o1 == 0 and o2 == 0:  # all four points on one line
        dirv = b - a
        key = (lambda p: p.x) if dirv.x != 0 else (lambda p: p.y)
        lo1, hi1 = sorted((a, b), key=key)
        lo2, hi2 = sorted((c, d), key=key)
        lo = lo1 if key(lo1) >= key(lo2) else lo2
        hi = hi1 if key(hi1) <= key(hi2) else hi2
        if key(lo) > key(hi):
            return SegmentHit("none")
        if lo == hi:
            return SegmentHit("point", (lo,))
        return SegmentHit("overlap", (lo, hi))
    if o1 != o2 and o3 != o4:
        # They intersect in exactly one point.
        if o1 and o2 and o3 and o4:
            t_num = (c - a).cross(d - c)
            t_den = (b - a).cross(d - c)
            t = t_num / t_den
            pt = Point(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t)
            return SegmentHit("point", (pt,), proper=True)
        # an endpoint lies on the other segment
        for p, (u, v) in ((c, (a, b)), (d, (a, b)), (a, (c, d)), (b, (c, d))):
            if point_on_segment(p, u, v):
                return SegmentHit("point", (p,))
        return SegmentHit("none")
    # touching without straddling: an endpoint may sit on the other segment
    for p, (u, v) in ((c, (a, b)), (d, (a, b)), (a, (c, d)), (b, (c, d))):
        if point_on_segment(p, u, v):
            return SegmentHit("point", (p,))
    return SegmentHit("none")


INSIDE, ON, OUTSIDE = 1, 0, -1


class Polygon:
    """Simple polygon, vertices in counterclockwise order, positive area."""

    def __init__(self, vertices: list[Point] | tuple[Point, ...], check: bool = True):
        self.vertices: tuple[Point, ...] = tuple(vertices)
        if len(self.vertices) < 3:
            raise GeometryError("polygon needs at least 3 vertices")
        if check:
            self._validate()

    def _validate(self) -> None:
        if self.signed_area2().sign() <= 0:
            raise GeometryError("polygon must be counterclockwise with positive area")
        n = len(self.vertices)
        for i in range(n):
            a, b = self.vertices[i], self.vertices[(i + 1) % n]
            if a == b:
                raise GeometryError("repeated consecutive vertex")
            for j in range(i + 1, n):
                c, d = self.vertices[j], self.vertices[(j + 1) % n]
                hit = segment_intersection(a, b, c, d)
                if hit.kind == "none":
                    continue
                adjacent = j == i + 1 or (i == 0 and j == n - 1)
                if hit.kind == "overlap":
                    raise GeometryError("polygon edges overlap")
                if hit.proper:
                    raise GeometryError("polygon edges cross")
                if adjacent:
                    shared = self.vertices[j] if j == i + 1 else self.vertices[i]
                    if hit.points[0] != shared:
                        raise GeometryError("adjacent edges touch off the shared vertex")
                else:
                    raise GeometryError("non-adjacent edges touch")

    def signed_area2(self) -> FieldScalar:
        tot = scalar(0)
        n = len(self.vertices)
        for i in range(n):
            tot = tot + self.vertices[i].cross(self.vertices[(i + 1) % n])
        return tot

    def area(self) -> FieldScalar:
        return self.signed_area2() / 2

    def edges(self):
        n = len(self.vertices)
        for i in range(n):
            yield self.vertices[i], self.vertices[(i + 1) % n]

    def translate(self, t: Point) -> "Polygon":
        return Polygon(tuple(v + t for v in self.vertices), check=False)

    def scale(self, k) -> "Polygon":
        return Polygon(tuple(v.scale(k) for v in self.vertices), check=False)

    @cached_property
    def bbox(self) -> tuple[float, float, float, float]:
        xs = [float(v.x) for v in self.vertices]
        ys = [float(v.y) for v in self.vertices]
        return (min(xs), min(ys), max(xs), max(ys))

    def locate(self, p: Point) -> int:
        """INSIDE, ON or OUTSIDE, decided exactly by crossing parity."""
        crossings = 0
        for a, b in self.edges():
            if point_on_segment(p, a, b):
                return ON
            ay_gt = (a.y - p.y).sign() > 0
            by_gt = (b.y - p.y).sign() > 0
            if ay_gt == by_gt:
                continue
            side = orientation(a, b, p)
            if (side > 0) == (not ay_gt):
                # edge crosses the rightward ray from p
                crossings ^= 1
        return INSIDE if crossings else OUTSIDE

    def interior_point(self) -> Point:
        """A point strictly inside (centroid of one ear)."""
        vs = self.vertices
        n = len(vs)
        for i in range(n):
            a, b, c = vs[(i - 1) % n], vs[i], vs[(i + 1) % n]
            if orientation(a, b, c) <= 0:
                continue
            blocked = False
            for j in range(n):
                if (j - i) % n in (0, 1, n - 1):
                    continue
                p = vs[j]
                if (orientation(a, b, p) >= 0 and orientation(b, c, p) >= 0
                        and orientation(c, a, p) >= 0):
                    blocked = True
                    break
            if not blocked:
                third = Fraction(1, 3)
                return Point((a.x + b.x + c.x) * third, (a.y + b.y + c.y) * third)
        raise GeometryError("no ear found; polygon not simple?")

    def __eq__(self, other):
        return isinstance(other, Polygon) and self.vertices == other.vertices

    def __hash__(self):
        return hash(self.vertices)

    def __repr__(self):
        return f"Polygon({len(self.vertices)} vertices)"


def _edge_pieces(a: Point, b: Point, other: Polygon):
    """Midpoints of the pieces of segment ab cut by contacts with other's boundary."""
    contacts = [a, b]
    for c, d in other.edges():
        hit = segment_intersection(a, b, c, d)
        contacts.extend(hit.points)
    dirv = b - a
    def param(p: Point):
        return (p - a).dot(dirv)
    contacts = sorted(set(contacts), key=param)
    half = Fraction(1, 2)
    for u, v in zip(contacts, contacts[1:]):
        yield Point((u.x + v.x) * half, (u.y + v.y) * half)


def interiors_overlap(pa: Polygon, pb: Polygon) -> bool:
    """Exact test whether Int(pa) and Int(pb) intersect.

    Complete for simple polygons: every boundary penetration is caught by a
    cut-piece midpoint, and mutual containment by an interior sample point.
    """
    for a, b in pa.edges():
        for mid in _edge_pieces(a, b, pb):
            if pb.locate(mid) == INSIDE:
                return True
    for a, b in pb.edges():
        for mid in _edge_pieces(a, b, pa):
            if pa.locate(mid) == INSIDE:
                return True
    if pb.locate(pa.interior_point()) == INSIDE:
        return True
    if pa.locate(pb.interior_point()) == INSIDE:
        return True
    return False


def contains_polygon(outer: Polygon, inner: Polygon) -> bool:
    """Closed containment inner ⊆ outer, exact."""
    for a, b in inner.edges():
        for mid in _edge_pieces(a, b, outer):
            if outer.locate(mid) == OUTSIDE:
                return False
    for v in inner.vertices:
        if outer.locate(v) == OUTSIDE:
            return False
    return outer.locate(inner.interior_point()) != OUTSIDE


def boundary_intersection(pa: Polygon, pb: Polygon):
    """Shared boundary: (segments, isolated points), each exact.

    Segments are maximal up to the input edge subdivision; isolated points
    exclude endpoints of returned segments.
    """
    segs: list[tuple[Point, Point]] = []
    pts: set[Point] = set()
    for a, b in pa.edges():
        for c, d in pb.edges():
            hit = segment_intersection(a, b, c, d)
            if hit.kind == "overlap":
                segs.append((hit.points[0], hit.points[1]))
            elif hit.kind == "point":
                pts.add(hit.points[0])
    covered = set()
    for u, v in segs:
        covered.add(u)
        covered.add(v)
    pts -= covered
    merged = _merge_collinear(segs)
    return merged, sorted(pts, key=lambda p: (float(p.x), float(p.y)))


def _merge_collinear(segs: list[tuple[Point, Point]]) -> list[tuple[Point, Point]]:
    out: list[tuple[Point, Point]] = []
    pool = list(segs)
    while pool:
        a, b = pool.pop()
        changed = True
        while changed:
            changed = False
            for i, (c, d) in enumerate(pool):
                if orientation(a, b, c) == 0 and orientation(a, b, d) == 0:
                    if point_on_segment(c, a, b) or point_on_segment(d, a, b) or \
                       point_on_segment(a, c, d) or point_on_segment(b, c, d):
                        allpts = [a, b, c, d]
                        dirv = b - a
                        allpts.sort(key=lambda p: (p - a).dot(dirv))
                        a, b = allpts[0], allpts[-1]
                        pool.pop(i)
                        changed = True
                        break
        out.append((a, b))
    dedup = []
    seen = set()
    for a, b in out:
        key = frozenset((a, b))
        if key not in seen:
            seen.add(key)
            dedup.append((a, b))
    return dedup


def segment_meets_polygon(a: Point, b: Point, poly: Polygon) -> bool:
    """Does the closed segment ab intersect the closed polygon at all?"""
    if poly.locate(a) != OUTSIDE or poly.locate(b) != OUTSIDE:
        return True
    for c, d in poly.edges():
        if segment_intersection(a, b, c, d).kind != "none":
            return True
    return False


def polyline_meets_polygon(polyline: tuple[Point, ...], poly: Polygon) -> bool:
    return any(segment_meets_polygon(a, b, poly) for a, b in zip(polyline, polyline[1:]))
