"""Bundled substitution rules constructed in code.

The JSON rule files shipped with the package are generated from these
constructors (scripts/export_rules.py); tests use both routes.
"""

from __future__ import annotations

from fractions import Fraction

from fractile.field import FieldScalar, Point, scalar
from fractile.geometry import Polygon
from fractile.tiling import Prototile, SubstitutionRule

F = Fraction


def _pt(x, y) -> Point:
    return Point.of(F(x) if not isinstance(x, (FieldScalar,)) else x,
                    F(y) if not isinstance(y, (FieldScalar,)) else y)


def square_rule(lam: int = 3) -> SubstitutionRule:
    """One unit square subdivided into a lam x lam grid (periodic tiling)."""
    sq = Polygon([_pt(0, 0), _pt(1, 0), _pt(1, 1), _pt(0, 1)])
    digits = [[tuple(_pt(i, j) for i in range(lam) for j in range(lam))]]
    return SubstitutionRule([Prototile(0, "sq", sq)], scalar(lam), digits,
                            name=f"square{lam}")


def _s(i: int, j: int) -> int:
    """Parity of the binary digit sum."""
    return (i.bit_count() + j.bit_count()) % 2


def two_d_thue_morse_rule() -> SubstitutionRule:
    """Two unit squares; each inflates by 4 into the 16-cell parity pattern."""
    sq = Polygon([_pt(0, 0), _pt(1, 0), _pt(1, 1), _pt(0, 1)])
    protos = [Prototile(0, "alpha", sq), Prototile(1, "beta", sq)]
    cells = [(i, j) for j in range(4) for i in range(4)]
    d_even = tuple(_pt(i, j) for i, j in cells if _s(i, j) == 0)
    d_odd = tuple(_pt(i, j) for i, j in cells if _s(i, j) == 1)
    digits = [
        [d_even, d_odd],  # alpha: alpha-cells where parity even
        [d_odd, d_even],  # beta is the color complement
    ]
    return SubstitutionRule(protos, scalar(4), digits, name="two_d_thue_morse")


def _rot90cw(p: Point) -> Point:
    return Point(p.y, -p.x)


def midpoint_dual_graph(rule, kernel_points: list[Point] | None = None):
    """Dual graph: one interior vertex per prototile joined by straight
    spokes to the midpoint of every tiling edge."""
    from fractile.graphs import BOUNDARY, INTERIOR, EmbeddedGraph, GraphEdge, GraphVertex

    half = F(1, 2)
    vertices, edges = [], []
    for p in range(rule.m):
        if kernel_points is not None:
            center = kernel_points[p]
        else:
            vs = rule.support(p).vertices
            n = len(vs)
            sx = sy = scalar(0)
            for v in vs:
                sx, sy = sx + v.x, sy + v.y
            center = Point(sx / n, sy / n)
        vlist = [GraphVertex(center, INTERIOR)]
        elist = []
        for i, (a, b) in enumerate(rule.prototile_edges(p)):
            mid = Point((a.x + b.x) * half, (a.y + b.y) * half)
            vlist.append(GraphVertex(mid, BOUNDARY, i))
            elist.append(GraphEdge((mid, center)))
        vertices.append(vlist)
        edges.append(elist)
    return EmbeddedGraph(rule, vertices, edges)


def chair_kernel_points() -> list[Point]:
    q = F(1, 4)
    pts = [Point.of(q, q)]
    for _ in range(3):
        pts.append(_rot90cw(pts[-1]))
    return pts


# Subgraph selection of the bundled two-d Thue-Morse pair, reconstructed by
# scripts/find_2dtm_pair.py: the unique selection of the contracted dual graph
# whose derived edge-substitution matrix reproduces the reference matrix
# row-for-row (and whose face matrix and cohomology match as well).
TWO_D_THUE_MORSE_SELECTION = [
    "0|0,2|1.1", "0|0,2|1.3", "0|1,0|1.0", "0|1,0|1.1", "0|1,2|0.1",
    "0|1,2|0.3", "0|1,3|1.1", "0|1,3|1.2", "0|2,0|1.2", "0|2,0|1.3",
    "0|2,1|0.0", "0|2,1|0.2", "0|2,2|0.0", "0|2,2|0.1", "0|2,2|0.2",
    "0|2,2|0.3", "0|2,3|1.0", "0|2,3|1.3", "0|3,2|1.1", "0|3,2|1.3",
    "1|0,2|0.1", "1|0,2|0.3", "1|1,0|0.0", "1|1,0|0.1", "1|1,1|1.1",
    "1|1,1|1.2", "1|1,2|1.0", "1|1,2|1.3", "1|1,3|0.1", "1|1,3|0.2",
    "1|2,0|0.2", "1|2,0|0.3", "1|2,1|1.0", "1|2,1|1.1", "1|2,1|1.2",
    "1|2,1|1.3", "1|2,2|1.0", "1|2,2|1.2", "1|2,3|0.0", "1|2,3|0.3",
    "1|3,1|0.2", "1|3,1|0.3", "1|3,2|0.0", "1|3,2|0.1",
]


def two_d_thue_morse_pair():
    """The bundled recurrent pair for the two-d Thue-Morse rule."""
    from fractile.recurrent import RecurrentPair

    rule = two_d_thue_morse_rule()
    g = midpoint_dual_graph(rule)
    return RecurrentPair.build(rule, g, 1, TWO_D_THUE_MORSE_SELECTION)


def straight_cross_selection(rule) -> list[str]:
    """Copy ids of the axis-aligned cross through an interior cell, for
    square-grid rules (unit-square prototiles, integer expansion)."""
    lam = int(rule.lam.a)
    c = (lam - 1) // 2
    b, r, t, l = 0, 1, 2, 3  # edge indices around the unit square
    sel = []
    for p in range(rule.m):
        cell_type = {}
        for q in range(rule.m):
            for d in rule.digits[p][q]:
                cell_type[(int(d.x.a), int(d.y.a))] = q
        for j in range(lam):
            q = cell_type[(c, j)]
            sel.append(f"{p}|{c},{j}|{q}.{b}")
            sel.append(f"{p}|{c},{j}|{q}.{t}")
        for i in range(lam):
            q = cell_type[(i, c)]
            sel.append(f"{p}|{i},{c}|{q}.{l}")
            sel.append(f"{p}|{i},{c}|{q}.{r}")
    return sel


def chair_rule() -> SubstitutionRule:
    """The four rotations of the L-shaped chair tile, expansion 2."""
    base = [_pt(0, 0), _pt(1, 0), _pt(1, F(1, 2)), _pt(F(1, 2), F(1, 2)),
            _pt(F(1, 2), 1), _pt(0, 1)]
    protos = []
    verts = base
    for k in range(4):
        protos.append(Prototile(k, f"p{k + 1}", Polygon(verts)))
        verts = [_rot90cw(v) for v in verts]
    h = F(1, 2)
    raw = [
        [[(0, 0), (h, h)], [(0, 2)], [], [(2, 0)]],
        [[(0, -2)], [(0, 0), (h, -h)], [(2, 0)], []],
        [[], [(-2, 0)], [(0, 0), (-h, -h)], [(0, -2)]],
        [[(-2, 0)], [], [(0, 2)], [(0, 0), (-h, h)]],
    ]
    digits = [[tuple(_pt(x, y) for x, y in raw[p][q]) for q in range(4)]
              for p in range(4)]
    return SubstitutionRule(protos, scalar(2), digits, name="chair")


# -- Ammann-Beenker (octagonal) rhomb/triangle version, d = 2 ----------------

def _u(k: int) -> Point:
    """Unit vector at angle k*pi/4, exact over Q(sqrt 2)."""
    h = scalar(0, F(1, 2), 2)
    table = {
        0: Point(scalar(1), scalar(0)),
        1: Point(h, h),
        2: Point(scalar(0), scalar(1)),
        3: Point(-h, h),
        4: Point(scalar(-1), scalar(0)),
        5: Point(-h, -h),
        6: Point(scalar(0), scalar(-1)),
        7: Point(h, -h),
    }
    return table[k % 8]


def _rot_point(p: Point, k: int) -> Point:
    """Rotate by k*pi/4 about the origin (exact)."""
    c, s = _u(k).x, _u(k).y
    return Point(p.x * c - p.y * s, p.x * s + p.y * c)


def _mirror_x(p: Point) -> Point:
    return Point(p.x, -p.y)


def ammann_beenker_rule_from_pieces(tri_pieces, rh_pieces) -> SubstitutionRule:
    """Octagonal rhomb/triangle substitution from explicit base subdivisions.

    Prototiles: left triangles L0..L7 (ids 0..7), right triangles R0..R7
    (ids 8..15, same supports, mirrored subdivisions), rhombs rh0..rh3
    (ids 16..19).  `tri_pieces` subdivides the inflated left triangle with
    hyp on the x-axis; `rh_pieces` the inflated rhomb spanned by the first
    two octagon directions.  Each piece is (vertex list, hand flag).
    """
    lam = scalar(1, 1, 2)
    rt2 = scalar(0, 1, 2)

    tri = [Point(scalar(0), scalar(0)), Point(rt2, scalar(0)),
           Point(rt2 / 2, rt2 / 2)]  # hyp on the x-axis, apex up
    rhomb = [Point(scalar(0), scalar(0)), _u(0), _u(0) + _u(1), _u(1)]

    tri_supports = [[_rot_point(v, k) for v in tri] for k in range(8)]
    rhomb_supports = [[_rot_point(v, k) for v in rhomb] for k in range(4)]

    protos = []
    for k in range(8):
        protos.append(Prototile(k, f"L{k}", Polygon(tri_supports[k])))
    for k in range(8):
        protos.append(Prototile(8 + k, f"R{k}", Polygon(tri_supports[k])))
    for k in range(4):
        protos.append(Prototile(16 + k, f"rh{k}", Polygon(rhomb_supports[k])))

    def identify(points: list[Point], hand: int) -> tuple[int, Point]:
        """Match a congruent placed copy against the prototile table."""
        if len(points) == 3:
            table, base_id = tri_supports, (8 if hand else 0)
        else:
            table, base_id = rhomb_supports, 16
        cand = set(points)
        for k, ref in enumerate(table):
            for anchor in ref:
                t = points[0] - anchor
                if {v + t for v in ref} == cand:
                    return base_id + k, t
        raise ValueError(f"unidentified piece {points}")

    m = 20
    digits: list[list[list[Point]]] = [[[] for _ in range(m)] for _ in range(m)]

    def install(parent: int, pieces, transform, hand_flip: bool):
        for points, hand in pieces:
            placed = [transform(p) for p in points]
            use_hand = hand ^ 1 if (hand_flip and len(points) == 3) else hand
            pid, t = identify(placed, use_hand)
            digits[parent][pid].append(t)

    for k in range(8):
        install(k, tri_pieces, lambda p, k=k: _rot_point(p, k), False)
        # mirror across the perpendicular bisector of the inflated hypotenuse
        mirrored = lambda p, k=k: _rot_point(  # noqa: E731
            Point(scalar(2) + rt2 - p.x, p.y), k)
        install(8 + k, tri_pieces, mirrored, True)
    for k in range(4):
        install(16 + k, rh_pieces, lambda p, k=k: _rot_point(p, k), False)

    dig = [[tuple(digits[p][q]) for q in range(m)] for p in range(m)]
    return SubstitutionRule(protos, lam, dig, d=2, name="ammann_beenker")


def _ab_base_pieces(hands: tuple[int, int, int, int, int] = (1, 0, 1, 0, 1)):
    """Base subdivisions used before the full derivation replaced them."""
    rt2 = scalar(0, 1, 2)
    one = scalar(1)
    h = rt2 / 2
    lam = scalar(1, 1, 2)
    rhomb = [Point(scalar(0), scalar(0)), _u(0), _u(0) + _u(1), _u(1)]
    a, b, c, eg1, eg2 = hands
    tri_pieces = [
        ([Point(one, one), Point(scalar(0), scalar(0)), Point(one, scalar(0))], a),
        ([Point(one, scalar(0)), Point(one + rt2, scalar(0)), Point(one + h, h)], b),
        ([Point(scalar(2) + rt2, scalar(0)), Point(one + rt2, one),
          Point(one + rt2, scalar(0))], c),
        ([Point(one, scalar(0)), Point(one + h, h), Point(one + h, one + h),
          Point(one, one)], 0),
        ([Point(one + rt2, scalar(0)), Point(one + rt2, one),
          Point(one + h, one + h), Point(one + h, h)], 0),
    ]
    m2 = (_u(0) + _u(1)).scale(lam)
    rh_pieces = [
        (rhomb, 0),
        ([v + (m2 - _u(0) - _u(1)) for v in rhomb], 0),
        ([Point(one, scalar(0)), Point(one + rt2, scalar(0)), Point(one + h, h)], eg1),
        ([m2 - q for q in (Point(one, scalar(0)), Point(one + rt2, scalar(0)),
                           Point(one + h, h))], eg1),
        ([Point(one + rt2, scalar(0)), Point(scalar(2) + rt2, one),
          Point(one + rt2, one)], eg2),
        ([m2 - q for q in (Point(one + rt2, scalar(0)), Point(scalar(2) + rt2, one),
                           Point(one + rt2, one))], eg2),
        ([Point(one + rt2, scalar(0)), Point(one + rt2, one),
          Point(one + h, one + h), Point(one + h, h)], 0),
    ]
    return tri_pieces, rh_pieces


def ammann_beenker_rule(hands: tuple[int, int, int, int, int] = (1, 0, 1, 0, 1)
                        ) -> SubstitutionRule:
    tri_pieces, rh_pieces = _ab_base_pieces(hands)
    return ammann_beenker_rule_from_pieces(tri_pieces, rh_pieces)
