from fractions import Fraction

import pytest

from fractile.catalog import (
    chair_kernel_points,
    chair_rule,
    midpoint_dual_graph,
    square_rule,
    two_d_thue_morse_rule,
)
from fractile.field import Point
from fractile.graphs import (
    BOUNDARY,
    INTERIOR,
    EmbeddedGraph,
    GraphEdge,
    GraphError,
    GraphVertex,
    check_consistency,
    induced_tiling,
)

F = Fraction


@pytest.fixture(scope="module")
def tdtm():
    return two_d_thue_morse_rule()


@pytest.fixture(scope="module")
def tdtm_dual(tdtm):
    return midpoint_dual_graph(tdtm)


def test_dual_cross_skeleton(tdtm, tdtm_dual):
    skel = tdtm_dual.skeletons[0]
    interior = [v for v in skel.vertices if v.kind == INTERIOR]
    boundary = [v for v in skel.vertices if v.kind == BOUNDARY]
    assert len(interior) == 1 and len(boundary) == 4
    vid = skel.vertices.index(interior[0])
    assert skel.degree(vid) == 4
    order = skel.rotational_order(vid)
    assert len(order) == 4


def test_subdivided_path_collapses_to_single_edge(tdtm):
    # a path through 4 degree-2 interior vertices becomes one skeleton edge
    pts = [Point.of(F(k, 5), F(1, 2)) for k in range(6)]
    vertices = [[GraphVertex(pts[0], BOUNDARY, 3), GraphVertex(pts[-1], BOUNDARY, 1)]
                + [GraphVertex(q, INTERIOR) for q in pts[1:-1]], []]
    edges = [[GraphEdge((pts[k], pts[k + 1])) for k in range(5)], []]
    g = EmbeddedGraph(tdtm, vertices, edges)
    skel = g.skeletons[0]
    assert len(skel.edges) == 1
    assert len(skel.edges[0].pieces) == 5
    assert skel.edges[0].polyline == tuple(pts) or \
        skel.edges[0].polyline == tuple(reversed(pts))


def test_consistency_dual(tdtm, tdtm_dual):
    rep = check_consistency(tdtm_dual, tdtm)
    assert rep.t_consistent and rep.quasi_dual and rep.dual, rep.diagnostics


def test_two_boundary_vertices_on_an_edge_not_quasi_dual(tdtm):
    h, q3 = F(1, 2), F(3, 4)
    c = Point.of(h, h)
    vs = [GraphVertex(c, INTERIOR),
          GraphVertex(Point.of(F(1, 4), 0), BOUNDARY, 0),
          GraphVertex(Point.of(q3, 0), BOUNDARY, 0),
          GraphVertex(Point.of(1, h), BOUNDARY, 1),
          GraphVertex(Point.of(h, 1), BOUNDARY, 2),
          GraphVertex(Point.of(0, h), BOUNDARY, 3)]
    es = [GraphEdge((v.point, c)) for v in vs[1:]]
    g = EmbeddedGraph(tdtm, [vs, vs], [es, es])
    rep = check_consistency(g, tdtm)
    assert not rep.quasi_dual


def test_chair_octagon_dual_consistency():
    chair = chair_rule()
    g = midpoint_dual_graph(chair, chair_kernel_points())
    rep = check_consistency(g, chair)
    assert rep.t_consistent and rep.quasi_dual and rep.dual, rep.diagnostics
    # interior vertex has degree 8 (octagon)
    skel = g.skeletons[0]
    vid = next(i for i, v in enumerate(skel.vertices) if v.kind == INTERIOR)
    assert skel.degree(vid) == 8


def test_boundary_crossing_rejected(tdtm):
    c = Point.of(F(1, 2), F(1, 2))
    out = Point.of(F(3, 2), F(1, 2))
    vs = [GraphVertex(c, INTERIOR)]
    with pytest.raises(GraphError):
        EmbeddedGraph(tdtm, [vs + [GraphVertex(out, INTERIOR)], []],
                      [[GraphEdge((c, out))], []])


def test_induced_tiling_over_supertile(tdtm, tdtm_dual):
    patch = tdtm.supertile(0, 2)
    faces = induced_tiling(tdtm, tdtm_dual, patch)
    complete = [f for f in faces if f.complete]
    # interior faces correspond to interior vertices of the 16x16 grid patch
    assert len(complete) == 15 * 15
    labels = {f.label for f in complete}
    assert len(labels) == 8
    # faces are unit squares centred at interior grid vertices
    areas = set()
    for f in complete:
        from fractile.geometry import Polygon
        areas.add(str(Polygon(f.polygon_points, check=False).area()))
    assert areas == {"1"}


def test_single_tile_has_no_complete_face(tdtm, tdtm_dual):
    faces = induced_tiling(tdtm, tdtm_dual, tdtm.supertile(0, 0))
    assert not any(f.complete for f in faces)
