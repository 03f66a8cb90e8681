from fractions import Fraction

import pytest

from fractile.field import Point, scalar
from fractile.geometry import (
    GeometryError,
    INSIDE,
    ON,
    OUTSIDE,
    Polygon,
    boundary_intersection,
    contains_polygon,
    interiors_overlap,
    orientation,
    segment_intersection,
)


def P(x, y):
    return Point.of(Fraction(x), Fraction(y))


def square(x0=0, y0=0, side=1):
    return Polygon([P(x0, y0), P(x0 + side, y0), P(x0 + side, y0 + side), P(x0, y0 + side)])


def chair_polygon():
    return Polygon([P(0, 0), P(1, 0), P(1, Fraction(1, 2)), P(Fraction(1, 2), Fraction(1, 2)),
                    P(Fraction(1, 2), 1), P(0, 1)])


def test_orientation_basic():
    assert orientation(P(0, 0), P(1, 0), P(0, 1)) == 1
    assert orientation(P(0, 0), P(1, 1), P(2, 2)) == 0
    # (0,0),(1,0),(√2,−√2): determinant = −√2 < 0 → right
    r = Point(scalar(0, 1, 2), scalar(0, -1, 2))
    assert orientation(Point.of(0, 0), Point.of(1, 0), r) == -1


def test_orientation_antisymmetric_translation_invariant():
    import random

    rng = random.Random(3)
    for _ in range(200):
        pts = [P(rng.randint(-5, 5), rng.randint(-5, 5)) for _ in range(4)]
        p, q, r, t = pts
        assert orientation(p, q, r) == -orientation(p, r, q)
        assert orientation(p, q, r) == orientation(p + t, q + t, r + t)


def test_segment_intersection_types():
    hit = segment_intersection(P(0, 0), P(2, 2), P(0, 2), P(2, 0))
    assert hit.kind == "point" and hit.proper and hit.points[0] == P(1, 1)
    hit = segment_intersection(P(0, 0), P(1, 0), P(2, 0), P(3, 0))
    assert hit.kind == "none"
    hit = segment_intersection(P(0, 0), P(2, 0), P(1, 0), P(3, 0))
    assert hit.kind == "overlap" and set(hit.points) == {P(1, 0), P(2, 0)}
    hit = segment_intersection(P(0, 0), P(1, 0), P(1, 0), P(1, 5))
    assert hit.kind == "point" and not hit.proper


def test_polygon_validation():
    with pytest.raises(GeometryError):
        Polygon([P(0, 0), P(0, 1), P(1, 0)])  # clockwise
    with pytest.raises(GeometryError):
        Polygon([P(0, 0), P(2, 0), P(1, 1), P(1, -1)])  # self-crossing


def test_locate():
    sq = square()
    assert sq.locate(P(Fraction(1, 2), Fraction(1, 2))) == INSIDE
    assert sq.locate(P(0, Fraction(1, 2))) == ON
    assert sq.locate(P(2, 2)) == OUTSIDE
    ch = chair_polygon()
    assert ch.locate(P(Fraction(3, 4), Fraction(3, 4))) == OUTSIDE
    assert ch.locate(P(Fraction(1, 4), Fraction(3, 4))) == INSIDE


def test_interior_point():
    for poly in (square(), chair_polygon()):
        assert poly.locate(poly.interior_point()) == INSIDE


def test_unit_square_shifted_shares_edge_only():
    a, b = square(), square(1, 0)
    assert not interiors_overlap(a, b)
    segs, pts = boundary_intersection(a, b)
    assert len(segs) == 1 and not pts
    (u, v), = segs
    assert {u, v} == {P(1, 0), P(1, 1)}


def test_square_overlaps_itself():
    assert interiors_overlap(square(), square())


def test_diagonal_needle_through_corners():
    # passes through (0,0),(1,1); no vertex or full-edge midpoint inside
    needle = Polygon([P(-3, -3), P(Fraction(3, 2), Fraction(3, 2)), P(-3, Fraction(-29, 10))])
    assert interiors_overlap(square(), needle)


def test_corner_touch_no_overlap():
    assert not interiors_overlap(square(), square(1, 1))


def test_chair_subtiles_disjoint():
    # half-scale chair at origin vs half-scale chair at (1/2,1/2) per digit (1/2,1/2) scaled
    half = Fraction(1, 2)
    c1 = chair_polygon().scale(half)
    c2 = chair_polygon().scale(half).translate(P(Fraction(1, 4), Fraction(1, 4)))
    assert not interiors_overlap(c1, c2)
    assert interiors_overlap(c1, c1)


def test_containment():
    assert contains_polygon(square(0, 0, 4), square(1, 1))
    assert contains_polygon(square(), square())
    assert not contains_polygon(square(), square(0, 0, 2))
    inner_touch = Polygon([P(0, 0), P(1, 0), P(Fraction(1, 2), Fraction(1, 2))])
    assert contains_polygon(square(), inner_touch)
