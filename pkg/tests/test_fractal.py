import math

import numpy as np
import pytest

from fractile.catalog import (
    midpoint_dual_graph,
    square_rule,
    straight_cross_selection,
    two_d_thue_morse_rule,
)
from fractile.fractal import (
    FractalError,
    a2_perron,
    build_edge_substitution,
    build_fractal_prototiles,
    cauchy_gap,
    dimension_from_matrix,
    hausdorff_dimension,
    iterate,
    spectral_radius_norm_growth,
    verify_self_similarity,
)
from fractile.recurrent import RecurrentPair


@pytest.fixture(scope="module")
def tdtm():
    return two_d_thue_morse_rule()


@pytest.fixture(scope="module")
def cross_pair(tdtm):
    g = midpoint_dual_graph(tdtm)
    return RecurrentPair.build(tdtm, g, 1, straight_cross_selection(tdtm))


@pytest.fixture(scope="module")
def cross_es(cross_pair):
    return build_edge_substitution(cross_pair)


@pytest.fixture(scope="module")
def square5_pair():
    rule = square_rule(5)
    g = midpoint_dual_graph(rule)
    return RecurrentPair.build(rule, g, 1, straight_cross_selection(rule))


def test_edge_matrix_row_sums(cross_es):
    m = cross_es.matrix()
    sums = sorted(sum(row) for row in m)
    assert sums == [3, 3, 3, 3, 5, 5, 5, 5]


def test_digit_sets_concatenate(cross_es):
    dsets = cross_es.digit_sets()
    m = cross_es.matrix()
    for (e, f), digits in dsets.items():
        assert len(digits) == m[e][f]


def test_spectral_radius_identity_and_zero():
    assert spectral_radius_norm_growth([[4, 0], [0, 4]]) == 4.0
    assert spectral_radius_norm_growth([[0, 0], [0, 0]]) == 0.0
    # reducible matrix: norm growth is insensitive to reducibility
    assert spectral_radius_norm_growth([[2, 1], [0, 2]]) == 2.0


def test_spectral_radius_vs_numpy(cross_es):
    m = cross_es.matrix()
    rho = max(abs(v) for v in np.linalg.eigvals(np.array(m, dtype=float)))
    assert abs(spectral_radius_norm_growth(m) - rho) < 1e-8


def test_dimension_trivial_values(cross_es, square5_pair):
    # straight systems give exactly 1.0; a lam^2 edge value gives exactly 2.0
    assert hausdorff_dimension(cross_es) == 1.0
    es5 = build_edge_substitution(square5_pair)
    assert hausdorff_dimension(es5) == 1.0
    assert dimension_from_matrix([[3 * 3]], 3.0) == 2.0
    assert dimension_from_matrix([[5]], 5.0) == 1.0


def test_dimension_refuses_without_injectivity(cross_es):
    with pytest.raises(FractalError):
        hausdorff_dimension(cross_es, injectivity_passed=False)
    val = hausdorff_dimension(cross_es, injectivity_passed=False, override=True)
    assert val == 1.0


def test_iterate_level0_and_cauchy(cross_es):
    level0 = iterate(cross_es, 0)
    base = cross_es.pair.g.skeletons[0].edges[0].polyline
    assert np.allclose(level0.polylines[0],
                       np.array([p.as_floats() for p in base]))
    diam = math.sqrt(2.0)
    lam = float(cross_es.scale)
    for n in range(0, 5):
        gap = cauchy_gap(cross_es, n)
        assert gap <= diam * lam ** (-n) + 1e-9, (n, gap)


def test_square5_polylines_fixed(square5_pair):
    # centred straight cross reproduces itself exactly at every level
    es = build_edge_substitution(square5_pair)
    l0 = iterate(es, 0)
    l3 = iterate(es, 3)
    for a, b in zip(l0.polylines, l3.polylines):
        assert np.allclose(a[[0, -1]], b[[0, -1]])
        assert abs(a[0][0] - a[-1][0]) < 1e-12 or abs(a[0][1] - a[-1][1]) < 1e-12


def test_fractal_prototiles_cross(tdtm, cross_pair):
    fps = build_fractal_prototiles(cross_pair)
    assert len(fps.stars) == 8
    assert all(sum(row) == 16 for row in fps.a2)
    assert abs(a2_perron(fps) - 16.0) < 1e-6
    rep = verify_self_similarity(fps)
    assert rep.passed, rep.mismatches


def test_square5_fractal_prototiles(square5_pair):
    fps = build_fractal_prototiles(square5_pair)
    assert len(fps.stars) == 1
    assert fps.a2 == [[25]]
    rep = verify_self_similarity(fps)
    assert rep.passed


def test_self_similarity_fault_injection(cross_pair):
    fps = build_fractal_prototiles(cross_pair)
    bad = [row[:] for row in fps.a2]
    bad[0][0] += 1
    rep = verify_self_similarity(fps, a2_override=bad)
    assert not rep.passed
