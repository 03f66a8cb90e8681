from fractions import Fraction

import numpy as np
import pytest

from fractile.catalog import chair_rule, square_rule, two_d_thue_morse_rule
from fractile.field import Point, scalar
from fractile.tiling import PlacedTile

F = Fraction


@pytest.fixture(scope="module")
def chair():
    return chair_rule()


@pytest.fixture(scope="module")
def tdtm():
    return two_d_thue_morse_rule()


@pytest.fixture(scope="module")
def square3():
    return square_rule(3)


def test_chair_validates_with_printed_matrix(chair):
    report = chair.validate(check_edges=False)
    assert report.valid, report.errors
    assert report.substitution_matrix == [
        [2, 1, 0, 1],
        [1, 2, 1, 0],
        [0, 1, 2, 1],
        [1, 0, 1, 2],
    ]
    assert chair.primitive


def test_chair_not_singly_edge_to_edge(chair):
    # the consistent vertex set turns each chair into an octagon
    assert all(len(vs) == 8 for vs in chair.vertex_sets)
    assert chair.singly_edge_to_edge is False


def test_tdtm_validates(tdtm):
    report = tdtm.validate()
    assert report.valid, report.errors
    assert all(sum(row) == 16 for row in report.substitution_matrix)
    assert tdtm.primitive
    assert tdtm.singly_edge_to_edge is True


def test_tdtm_vertex_sets_are_corners(tdtm):
    assert all(len(vs) == 4 for vs in tdtm.vertex_sets)


def test_square_rule(square3):
    report = square3.validate()
    assert report.valid
    assert square3.vertex_sets == [[Point.of(0, 0), Point.of(1, 0),
                                    Point.of(1, 1), Point.of(0, 1)]]
    assert len(square3.vertex_stars) == 1


def test_area_identity_exact():
    for rule in (chair_rule(), two_d_thue_morse_rule(), square_rule(3)):
        lam2 = rule.lam * rule.lam
        for p in range(rule.m):
            total = scalar(0)
            for q in range(rule.m):
                total = total + rule.area(q) * rule.M[p][q]
            assert total == rule.area(p) * lam2


def test_perron_eigenvalue_matches_lambda_squared():
    for rule in (chair_rule(), two_d_thue_morse_rule(), square_rule(3)):
        eigs = np.linalg.eigvals(np.array(rule.M, dtype=float))
        perron = max(eigs, key=abs)
        assert abs(perron.imag) < 1e-9
        assert abs(perron.real - float(rule.lam) ** 2) < 1e-9


def test_subtile_patch_counts_and_functoriality(tdtm):
    patch1 = tdtm.subtile_patch(0, 1)
    assert len(patch1) == 16
    patch2 = tdtm.subtile_patch(0, 2)
    assert len(patch2) == 256
    # functoriality: 2-subtiles arise from subdividing each 1-subtile once
    expected = set()
    inv = tdtm.lam ** -2
    for t in patch1:
        for q in range(tdtm.m):
            for d in tdtm.digits[t.prototile][q]:
                expected.add((q, t.translation + d.scale(inv)))
    assert expected == {(t.prototile, t.translation) for t in patch2}


def test_subtile_patch_n0(tdtm):
    assert tdtm.subtile_patch(1, 0) == (PlacedTile(1, Point.of(0, 0), 0),)


def test_supertile_is_scaled_subtile_patch(chair):
    lam2 = chair.lam ** 2
    sups = chair.supertile(0, 2)
    subs = chair.subtile_patch(0, 2)
    assert {(t.prototile, t.translation) for t in sups} == \
        {(t.prototile, t.translation.scale(lam2)) for t in subs}


def test_chair_subtile_patch_row1(chair):
    # four pieces: two chairs of type p1 plus one p2 and one p4 translate
    patch = chair.subtile_patch(0, 1)
    kinds = sorted(t.prototile for t in patch)
    assert kinds == [0, 0, 1, 3]
    halves = {t.translation for t in patch if t.prototile == 0}
    assert halves == {Point.of(0, 0), Point.of(F(1, 4), F(1, 4))}


def test_tdtm_256_subtiles_tile_the_square(tdtm):
    patch = tdtm.subtile_patch(0, 2)
    total = scalar(0)
    for t in patch:
        total = total + tdtm.tile_support(t).area()
    assert total == scalar(1)


def test_tdtm_vertex_stars_count(tdtm):
    assert len(tdtm.vertex_stars) == 8


def test_vertex_stars_substitution_closed(tdtm):
    stars = set(tdtm.vertex_stars)
    for star in stars:
        assert tdtm.substitute_star(star) <= stars


def test_chair_stars_match_brute_force(chair):
    closure = set(chair.vertex_stars)
    brute = set()
    for p in range(chair.m):
        patch = chair.supertile(p, 4)
        from fractile.tiling import _complete_stars
        brute.update(_complete_stars(chair, patch))
    assert brute <= closure
    # every closure star must substitute into legal stars
    for star in closure:
        assert chair.substitute_star(star) <= closure
