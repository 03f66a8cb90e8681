#!/usr/bin/env python3
"""Derive the octagonal (Ammann-Beenker) substitution from scratch.

The inflated triangle and rhomb are tiled exhaustively by unit triangles and
rhombs (exact arithmetic, vertex-anchored placements).  Candidate pairs of
subdivisions are screened in two stages: a cheap cut-alignment test (the
next-level subdivision points of any two pieces sharing an edge must
coincide), then the full consistent-vertex-closure test with a zero budget
plus primitivity and the singly edge-to-edge property.
"""

from __future__ import annotations

import itertools
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from fractile.catalog import _rot_point, _u, ammann_beenker_rule_from_pieces
from fractile.field import Point, scalar
from fractile.geometry import (
    Polygon,
    contains_polygon,
    interiors_overlap,
    point_on_segment,
    segment_intersection,
)
from fractile.tiling import RuleError, _dir_key

F = Fraction
rt2 = scalar(0, 1, 2)
one = scalar(1)
h = rt2 / 2
lam = scalar(1, 1, 2)

TRI = [Point(scalar(0), scalar(0)), Point(rt2, scalar(0)), Point(h, h)]
RHOMB = [Point(scalar(0), scalar(0)), _u(0), _u(0) + _u(1), _u(1)]

SUPPORTS = []
for k in range(8):
    SUPPORTS.append(("T", k, [_rot_point(v, k) for v in TRI]))
for k in range(4):
    SUPPORTS.append(("R", k, [_rot_point(v, k) for v in RHOMB]))


def sectors_at(v, polys):
    out = []
    for poly in polys:
        n = len(poly)
        for i in range(n):
            a, b = poly[i], poly[(i + 1) % n]
            if v == a:
                prev = poly[(i - 1) % n]
                out.append((_dir_key(b - v), _dir_key(prev - v)))
                break
            if v != b and point_on_segment(v, a, b):
                out.append((_dir_key(b - v), _dir_key(a - v)))
                break
    return out


def saturated(v, region: Polygon, placed) -> bool:
    sectors = sectors_at(v, [verts for _sid, verts in placed])
    loc = region.locate(v)
    if loc == -1:
        return True
    if loc == 0:
        poly = region.vertices
        n = len(poly)
        for i in range(n):
            a, b = poly[i], poly[(i + 1) % n]
            if v == a:
                prev = poly[(i - 1) % n]
                sectors.append((_dir_key(prev - v), _dir_key(b - v)))
                break
            if v != b and point_on_segment(v, a, b):
                sectors.append((_dir_key(a - v), _dir_key(b - v)))
                break
    if not sectors:
        return False
    starts = sorted(s for s, e in sectors)
    ends = sorted(e for s, e in sectors)
    return starts == ends


def _coord_candidates(lo: float, hi: float):
    out = []
    for i in range(-10, 11):
        for j in range(-8, 9):
            v = scalar(F(i, 2), F(j, 2), 2)
            fv = float(v)
            if lo - 1e-9 <= fv <= hi + 1e-9:
                out.append(v)
    return out


def _lattice_points(region: Polygon):
    """Points (i + j*sqrt2)/2 inside the region's bounding box."""
    x0, y0, x1, y1 = region.bbox
    xs = _coord_candidates(x0, x1)
    ys = _coord_candidates(y0, y1)
    return [Point(x, y) for x in xs for y in ys]


def _float_poly(poly: Polygon):
    return [(float(v.x), float(v.y)) for v in poly.vertices]


def _clearly_outside(fregion, x, y, eps=1e-7) -> bool:
    """Float winding: True when (x, y) is outside beyond eps."""
    n = len(fregion)
    inside = False
    for i in range(n):
        x1, y1 = fregion[i]
        x2, y2 = fregion[(i + 1) % n]
        # distance to segment below eps: not clearly outside
        dx, dy = x2 - x1, y2 - y1
        t = max(0.0, min(1.0, ((x - x1) * dx + (y - y1) * dy) / (dx * dx + dy * dy)))
        px, py = x1 + t * dx, y1 + t * dy
        if (px - x) ** 2 + (py - y) ** 2 < eps * eps:
            return False
        if (y1 > y) != (y2 > y):
            xin = x1 + (y - y1) * dx / dy
            if xin > x:
                inside = not inside
    return not inside


def candidate_placements(region: Polygon):
    """All (support id, translation) with the piece inside the region."""
    fregion = _float_poly(region)
    anchors = [p for p in _lattice_points(region)
               if not _clearly_outside(fregion, float(p.x), float(p.y))
               and region.locate(p) != -1]
    placements = []
    seen = set()
    for sid, (_kind, _k, verts0) in enumerate(SUPPORTS):
        v0 = verts0[0]
        for anchor in anchors:
            t = anchor - v0
            key = (sid, t.x.a, t.x.b, t.y.a, t.y.b)
            if key in seen:
                continue
            seen.add(key)
            verts = [q + t for q in verts0]
            if any(_clearly_outside(fregion, float(v.x), float(v.y))
                   for v in verts):
                continue
            poly = Polygon(verts, check=False)
            if contains_polygon(region, poly):
                placements.append((sid, verts, poly))
    return placements


def enumerate_tilings(region: Polygon, max_pieces: int = 8):
    target = region.area()
    places = candidate_placements(region)
    n = len(places)
    areas = [poly.area() for _sid, _v, poly in places]
    boxes = [poly.bbox for _sid, _v, poly in places]
    conflict_cache: dict = {}

    def conflicts(i: int, j: int) -> bool:
        key = (min(i, j), max(i, j))
        hit = conflict_cache.get(key)
        if hit is None:
            bi, bj = boxes[i], boxes[j]
            if bi[2] <= bj[0] + 1e-9 or bj[2] <= bi[0] + 1e-9 or \
               bi[3] <= bj[1] + 1e-9 or bj[3] <= bi[1] + 1e-9:
                hit = False
            else:
                hit = interiors_overlap(places[i][2], places[j][2])
            conflict_cache[key] = hit
        return hit

    covering_cache: dict = {}

    def covering(v) -> list[int]:
        got = covering_cache.get(v)
        if got is None:
            fx, fy = float(v.x), float(v.y)
            got = [i for i in range(n)
                   if boxes[i][0] - 1e-9 <= fx <= boxes[i][2] + 1e-9
                   and boxes[i][1] - 1e-9 <= fy <= boxes[i][3] + 1e-9
                   and places[i][2].locate(v) != -1]
            covering_cache[v] = got
        return got

    region_vs = set(region.vertices)
    out = []
    seen = set()

    def rec(chosen, area, banned):
        if area == target:
            key = frozenset(chosen)
            if key not in seen:
                seen.add(key)
                out.append([(places[i][0], places[i][1]) for i in chosen])
            return
        if len(chosen) >= max_pieces:
            return
        pool = set(region_vs)
        for i in chosen:
            pool.update(places[i][1])
        placed_pairs = [(0, places[i][1]) for i in chosen]
        probe = None
        for v in sorted(pool, key=lambda p: (p.x.a, p.x.b, p.y.a, p.y.b)):
            if not saturated(v, region, placed_pairs):
                probe = v
                break
        if probe is None:
            return
        for i in covering(probe):
            if i in banned or i in chosen or \
                    any(conflicts(i, j) for j in chosen):
                continue
            chosen.append(i)
            rec(chosen, area + areas[i], banned)
            chosen.pop()
            banned = banned | {i}

    rec([], scalar(0), frozenset())
    return out


# -- cut alignment prescreen ----------------------------------------------------

def edge_cuts(jig, base_verts):
    """Per base-support edge: interior subdivision parameters in (0,1)."""
    cuts = []
    n = len(base_verts)
    for j in range(n):
        a = base_verts[j].scale(lam)
        b = base_verts[(j + 1) % n].scale(lam)
        dirv = b - a
        den = dirv.dot(dirv)
        params = set()
        for _sid, verts in jig:
            for v in verts:
                if v != a and v != b and point_on_segment(v, a, b):
                    params.add((v - a).dot(dirv) / den)
        cuts.append(params)
    return cuts


def mirror_cuts(cuts_l):
    """Cut parameters of the mirrored triangle class."""
    return [
        {one - t for t in cuts_l[0]},
        {one - t for t in cuts_l[2]},
        {one - t for t in cuts_l[1]},
    ]


def internal_contacts(jig):
    """Full shared edges between pieces: ((i, edge), (j, edge)).

    Returns None when a partial (non edge-to-edge) contact exists."""
    contacts = []
    for (i1, (s1, v1)), (i2, (s2, v2)) in itertools.combinations(
            enumerate(jig), 2):
        n1, n2 = len(v1), len(v2)
        for e1 in range(n1):
            a, b = v1[e1], v1[(e1 + 1) % n1]
            for e2 in range(n2):
                c, d = v2[e2], v2[(e2 + 1) % n2]
                hit = segment_intersection(a, b, c, d)
                if hit.kind != "overlap":
                    continue
                if {hit.points[0], hit.points[1]} == {a, b} == {c, d}:
                    contacts.append(((i1, e1), (i2, e2)))
                else:
                    return None
    return contacts


def cut_points(verts, edge, params):
    n = len(verts)
    a, b = verts[edge], verts[(edge + 1) % n]
    return frozenset(
        (lambda p: (p.x.a, p.x.b, p.y.a, p.y.b))(
            Point(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t))
        for t in params)


def hands_alignment_ok(jig, hands_by_piece, contacts, cuts_l, cuts_r, cuts_rh):
    for (i1, e1), (i2, e2) in contacts:
        sides = []
        for i, e in ((i1, e1), (i2, e2)):
            sid, verts = jig[i]
            kind = SUPPORTS[sid][0]
            if kind == "R":
                cuts = cuts_rh[e]
            else:
                cuts = (cuts_r if hands_by_piece[i] else cuts_l)[e]
            sides.append(cut_points(verts, e, cuts))
        if sides[0] != sides[1]:
            return False
    return True


def pieces_with_hands(jig, hands):
    out = []
    hi = 0
    for sid, verts in jig:
        kind = SUPPORTS[sid][0]
        if kind == "T":
            out.append((verts, hands[hi]))
            hi += 1
        else:
            out.append((verts, 0))
    return out


def hands_vector(jig, hands):
    out = {}
    hi = 0
    for i, (sid, _verts) in enumerate(jig):
        if SUPPORTS[sid][0] == "T":
            out[i] = hands[hi]
            hi += 1
        else:
            out[i] = 0
    return out


def main():
    t0 = time.time()
    lam_tri = Polygon([v.scale(lam) for v in TRI], check=False)
    lam_rh = Polygon([v.scale(lam) for v in RHOMB], check=False)
    tri_tilings = enumerate_tilings(lam_tri)
    print(f"triangle subdivisions: {len(tri_tilings)}  ({time.time()-t0:.0f}s)")
    t0 = time.time()
    rh_tilings = enumerate_tilings(lam_rh)
    print(f"rhomb subdivisions: {len(rh_tilings)}  ({time.time()-t0:.0f}s)")

    tri_data = []
    for tjig in tri_tilings:
        contacts = internal_contacts(tjig)
        if contacts is None:
            continue
        cuts_l = edge_cuts(tjig, TRI)
        tri_data.append((tjig, contacts, cuts_l, mirror_cuts(cuts_l)))
    rh_data = []
    for rjig in rh_tilings:
        contacts = internal_contacts(rjig)
        if contacts is None:
            continue
        rh_data.append((rjig, contacts, edge_cuts(rjig, RHOMB)))
    print(f"edge-to-edge subdivisions: {len(tri_data)} x {len(rh_data)}")

    survivors = []
    for (tjig, tcons, cuts_l, cuts_r) in tri_data:
        n_t = sum(1 for sid, _ in tjig if SUPPORTS[sid][0] == "T")
        for (rjig, rcons, cuts_rh) in rh_data:
            n_r = sum(1 for sid, _ in rjig if SUPPORTS[sid][0] == "T")
            for hands_t in itertools.product((0, 1), repeat=n_t):
                hv_t = hands_vector(tjig, hands_t)
                if not hands_alignment_ok(tjig, hv_t, tcons,
                                          cuts_l, cuts_r, cuts_rh):
                    continue
                for hands_r in itertools.product((0, 1), repeat=n_r):
                    hv_r = hands_vector(rjig, hands_r)
                    if not hands_alignment_ok(rjig, hv_r, rcons,
                                              cuts_l, cuts_r, cuts_rh):
                        continue
                    survivors.append((tjig, rjig, hands_t, hands_r))
    print(f"cut-aligned candidates: {len(survivors)}")

    clean = []
    for idx, (tjig, rjig, hands_t, hands_r) in enumerate(survivors):
        try:
            rule = ammann_beenker_rule_from_pieces(
                pieces_with_hands(tjig, hands_t),
                pieces_with_hands(rjig, hands_r))
        except Exception as exc:
            continue
        if not rule.primitive:
            continue
        rule.max_closure_depth = 4
        rule.max_extra_vertices = 0
        t0 = time.time()
        try:
            rule.vertex_sets
        except RuleError:
            print(f"  candidate {idx}: closure dirty ({time.time()-t0:.0f}s)")
            continue
        see = rule.singly_edge_to_edge
        print(f"  candidate {idx}: CLEAN closure, singly e2e = {see} "
              f"({time.time()-t0:.0f}s)")
        if see:
            clean.append((tjig, rjig, hands_t, hands_r))
            payload = {
                "triangle": serialize(tjig, hands_t),
                "rhomb": serialize(rjig, hands_r),
            }
            Path(f"notes_ab_{len(clean)}.json").write_text(
                json.dumps(payload, indent=1))
    print(f"fully clean rules: {len(clean)}")


def serialize(jig, hands):
    out = []
    hi = 0
    for sid, verts in jig:
        kind = SUPPORTS[sid][0]
        hand = 0
        if kind == "T":
            hand = hands[hi]
            hi += 1
        out.append({
            "kind": kind,
            "hand": hand,
            "vertices": [[str(v.x), str(v.y)] for v in verts],
        })
    return out


if __name__ == "__main__":
    main()
