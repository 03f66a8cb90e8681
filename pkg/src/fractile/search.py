"""Automatic construction of recurrent pairs.

Given a validated rule and a dual graph, a quasi-dual subgraph of the
N-fold contraction is routed through subtile channels (one per prototile
edge) into an interior copy of the prototile; iterating the redraw inside
the same subtile patches terminates in an equivalent pair.  For rules with
convex prototiles the dual/dual construction routes along straight chords.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from fractile.field import FieldScalar, Point, scalar
from fractile.geometry import (
    Polygon,
    boundary_intersection,
    orientation,
    point_on_segment,
    polyline_meets_polygon,
    segment_intersection,
)
from fractile.graphs import BOUNDARY, INTERIOR, EmbeddedGraph, check_consistency
from fractile.recurrent import (
    ContractedGraph,
    EdgeCopy,
    PairError,
    RecurrentPair,
    check_injectivity,
    match_equivalence,
)
from fractile.tiling import SubstitutionRule


class SearchError(ValueError):
    pass


class DualTargetError(SearchError):
    pass


F = Fraction


def find_interior_copy(rule: SubstitutionRule, p: int,
                       max_depth: int = 6) -> tuple[int, tuple[Point, ...], Point]:
    """Least n and digit path with a type-p n-subtile interior to the
    subdivided prototile; returns (n, digit path, composed translation)."""
    support = rule.support(p)
    for n in range(1, max_depth + 1):
        best = None
        for path, t, q in rule.digit_compositions(p, n):
            if q != p:
                continue
            sub = rule.support(q).translate(t).scale(rule.lam ** (-n))
            segs, pts = boundary_intersection(sub, support)
            if segs or pts:
                continue
            key = tuple((float(d.x), float(d.y)) for d in path)
            if best is None or key < best[0]:
                best = (key, path, t)
        if best is not None:
            return n, best[1], best[2]
    raise SearchError(f"no interior copy of prototile {p} within depth {max_depth}")


# -- subtile geometry ---------------------------------------------------------

@dataclass
class Subtile:
    digits: tuple[Point, ...]
    t: Point              # composed translation
    prototile: int
    support: Polygon
    index: int


def _subtiles(rule: SubstitutionRule, p: int, n: int) -> list[Subtile]:
    cache = rule.__dict__.setdefault("_subtile_cache", {})
    if (p, n) in cache:
        return cache[(p, n)]
    inv = rule.lam ** (-n)
    out = []
    for i, (path, t, q) in enumerate(rule.digit_compositions(p, n)):
        out.append(Subtile(path, t, q, rule.support(q).translate(t).scale(inv), i))
    cache[(p, n)] = out
    return out


def _subtile_edges(rule: SubstitutionRule, sub: Subtile, n: int):
    """Tiling edges of the subtile as (edge index of its prototile, a, b)."""
    inv = rule.lam ** (-n)
    for i, (a, b) in enumerate(rule.prototile_edges(sub.prototile)):
        yield i, (a + sub.t).scale(inv), (b + sub.t).scale(inv)


def _adjacency_structure(rule: SubstitutionRule, p: int, n: int):
    """Subtiles plus the full-edge adjacency list between them.

    Returns (subtiles, neighbors) where neighbors[i] is a list of
    (j, edge index in i, edge index in j, midpoint)."""
    cache = rule.__dict__.setdefault("_subadj_cache", {})
    if (p, n) in cache:
        return cache[(p, n)]
    subs = _subtiles(rule, p, n)
    seg_at: dict = {}
    half = F(1, 2)
    for s in subs:
        for ei, a, b in _subtile_edges(rule, s, n):
            key = frozenset((a, b))
            seg_at.setdefault(key, []).append((s.index, ei, a, b))
    neighbors: dict[int, list] = {s.index: [] for s in subs}
    for key, owners in seg_at.items():
        if len(owners) == 2:
            (i, ei, a, b), (j, ej, _c, _d) = owners
            mid = Point((a.x + b.x) * half, (a.y + b.y) * half)
            neighbors[i].append((j, ei, ej, mid))
            neighbors[j].append((i, ej, ei, mid))
        elif len(owners) > 2:
            raise SearchError("three subtiles share an edge; invalid rule")
    cache[(p, n)] = (subs, neighbors)
    return subs, neighbors


def _boundary_exposure(rule: SubstitutionRule, p: int, subs, n: int):
    """For each subtile: list of (own edge index, prototile edge index, a, b)
    for subtile edges lying on the prototile boundary."""
    support = rule.support(p)
    out: dict[int, list] = {s.index: [] for s in subs}
    for s in subs:
        for ei, a, b in _subtile_edges(rule, s, n):
            if support.locate(a) == 0 and support.locate(b) == 0:
                mid = Point((a.x + b.x) * F(1, 2), (a.y + b.y) * F(1, 2))
                if support.locate(mid) == 0:
                    host = rule.edge_of_boundary_point(p, mid)
                    out[s.index].append((ei, host, a, b))
    return out


def _corner_subtiles(rule: SubstitutionRule, p: int, subs) -> set[int]:
    corners = set(rule.vertex_sets[p])
    out = set()
    for s in subs:
        for v in corners:
            if s.support.locate(v) != -1:
                out.add(s.index)
                break
    return out


# -- consistent boundary vertex choices ---------------------------------------

def _edge_gluing_components(rule: SubstitutionRule):
    """Connected components of prototile edges under full-edge gluing.

    Adjacent tiles traverse a shared edge oppositely, so each gluing relates
    the edge parameters by t <-> 1 - t.  Returns (components, sign, flagged):
    sign[e] is +1/-1 relative to the component root, and a flagged root means
    some cycle forces t == 1 - t."""
    half = F(1, 2)
    nodes = [(p, i) for p in range(rule.m)
             for i in range(len(rule.prototile_edges(p)))]
    rels: list[tuple] = []
    for adj in rule.adjacency_classes:
        for a, b in adj.segments:
            mid = Point((a.x + b.x) * half, (a.y + b.y) * half)
            i = rule.edge_of_boundary_point(adj.p1, mid)
            j = rule.edge_of_boundary_point(adj.p2, mid - adj.delta)
            ea, eb = rule.prototile_edges(adj.p1)[i]
            if {a, b} == {ea, eb}:  # full-edge gluing
                rels.append(((adj.p1, i), (adj.p2, j)))
    graph: dict = {e: [] for e in nodes}
    for e1, e2 in rels:
        graph[e1].append(e2)
        graph[e2].append(e1)
    comps: dict = {}
    sign: dict = {}
    flagged: set = set()
    seen: set = set()
    for root in nodes:
        if root in seen:
            continue
        comp = [root]
        sign[root] = 1
        seen.add(root)
        queue = [root]
        while queue:
            cur = queue.pop()
            for nb in graph[cur]:
                if nb not in seen:
                    seen.add(nb)
                    sign[nb] = -sign[cur]
                    comp.append(nb)
                    queue.append(nb)
                elif sign[nb] != -sign[cur]:
                    flagged.add(root)
        comps[root] = comp
    return comps, sign, flagged


def consistent_boundary_positions(rule: SubstitutionRule, n: int,
                                  prefer_central: bool = True):
    """Pick one parameter t in (0, 1) per edge-gluing component so every
    prototile edge gets a subedge-midpoint boundary position, closed under
    all identifications."""
    comps, sign, flagged = _edge_gluing_components(rule)
    # available positions: midpoints of the n-subedges along each edge
    positions = {}
    for p in range(rule.m):
        for i, (a, b) in enumerate(rule.prototile_edges(p)):
            params = _subedge_midpoint_params(rule, p, i, n)
            positions[(p, i)] = params
    chosen: dict[tuple[int, int], Fraction] = {}
    for root, members in comps.items():
        shared = None
        for e in members:
            params = {t if sign[e] == sign[root] else 1 - t
                      for t in positions[e]}
            shared = params if shared is None else (shared & params)
        if not shared:
            raise SearchError(f"no consistent boundary position for component {root}")
        if root in flagged:
            shared = {t for t in shared if t == 1 - t}
            if not shared:
                raise SearchError(
                    f"edge component {root} glues to itself reversed and the "
                    f"subdivision has no central subedge at depth {n}")
        pick = min(shared, key=lambda t: (abs(t - F(1, 2)), t))
        for e in members:
            chosen[e] = pick if sign[e] == sign[root] else 1 - pick
    return chosen


def _subedge_midpoint_params(rule: SubstitutionRule, p: int, i: int,
                             n: int) -> set[Fraction]:
    """Parameters along prototile edge i of p that are midpoints of
    n-subtile edges lying on it."""
    a, b = rule.prototile_edges(p)[i]
    dirv = b - a
    den = dirv.dot(dirv)
    out = set()
    for s in _subtiles(rule, p, n):
        for _ei, c, d in _subtile_edges(rule, s, n):
            if point_on_segment(c, a, b) and point_on_segment(d, a, b):
                mid = Point((c.x + d.x) * F(1, 2), (c.y + d.y) * F(1, 2))
                t = (mid - a).dot(dirv) / den
                if isinstance(t.a, Fraction) and t.b == 0:
                    out.add(t.a)
    return out


def _edge_point(rule: SubstitutionRule, p: int, i: int, t: Fraction) -> Point:
    a, b = rule.prototile_edges(p)[i]
    return Point(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t)


# -- channel routing -----------------------------------------------------------

def _route(neighbors, allowed, start, goals, order_key):
    """Deterministic BFS path through allowed subtiles from start to any goal."""
    from collections import deque

    prev = {start: None}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        if cur in goals:
            path = [cur]
            while prev[path[-1]] is not None:
                path.append(prev[path[-1]])
            return list(reversed(path))
        for nb in sorted((x[0] for x in neighbors[cur]), key=order_key):
            if nb in allowed and nb not in prev:
                prev[nb] = cur
                queue.append(nb)
    return None


def _path_copies(rule: SubstitutionRule, p: int, subs, neighbors,
                 path: list[int], entry: tuple[int, Point],
                 final: tuple[int, Point] | None):
    """Edge copies realizing a dual path through消 subtiles.

    entry = (prototile-edge-of-first-subtile index, entry point);
    final = same for the last subtile, or None when the path ends at the
    last subtile's centre."""
    copies = []

    def copy_of(sub: Subtile, edge_idx: int) -> EdgeCopy:
        return EdgeCopy(p, sub.digits, sub.prototile, edge_idx, sub.t)

    cur_edge = entry[0]
    for k, si in enumerate(path):
        sub = subs[si]
        if k + 1 < len(path):
            nxt = path[k + 1]
            link = next(x for x in neighbors[si] if x[0] == nxt)
            copies.append(copy_of(sub, cur_edge))
            copies.append(copy_of(sub, link[1]))
            cur_edge = link[2]
        else:
            copies.append(copy_of(sub, cur_edge))
            if final is not None:
                copies.append(copy_of(sub, final[0]))
    return copies


# -- quasi-dual / dual construction --------------------------------------------

@dataclass
class SearchResult:
    pair: RecurrentPair
    n: int
    iterations: int
    report: object


def build_quasi_dual(rule: SubstitutionRule, g0: EmbeddedGraph,
                     target: str = "quasi-dual", seed: int = 0,
                     max_n: int = 6, n_test_range=range(1, 3),
                     allow_non_singly: bool = False) -> SearchResult:
    rep = check_consistency(g0, rule)
    if not rep.dual:
        raise SearchError("the starting graph must be a consistent dual graph")
    if not rule.primitive:
        raise SearchError("rule must be primitive")
    if not rule.singly_edge_to_edge and not allow_non_singly:
        if target == "dual":
            _diagnose_dual_obstruction(rule)
        raise SearchError(
            "rule is not singly edge-to-edge; the construction's guarantee "
            "does not apply (pass allow_non_singly=True to try anyway)")
    if target == "dual":
        return convex_dual_pair(rule, seed=seed, max_n=max_n,
                                n_test_range=n_test_range)
    rng = random.Random(seed)
    n0 = max(find_interior_copy(rule, p)[0] for p in range(rule.m))
    last_error = None
    for n in range(n0, max_n + 1):
        try:
            selection = _route_channels(rule, g0, n, rng)
        except SearchError as exc:
            last_error = exc
            continue
        pair = RecurrentPair.build(rule, g0, n, selection)
        for n_test in [n] + [x for x in n_test_range if x != n]:
            rep = check_injectivity(pair, n_test)
            if rep.all_passed:
                return SearchResult(pair, n, 0, rep)
        last_error = SearchError(f"injectivity failed at contraction depth {n}")
    raise SearchError(f"quasi-dual search exhausted depth {max_n}: {last_error}")


def _interior_structure(rule: SubstitutionRule, p: int, n: int):
    """(subtiles, neighbors, interior ids, interior type-p copies by centrality)."""
    subs, neighbors = _adjacency_structure(rule, p, n)
    support_p = rule.support(p)
    parent_vs = support_p.vertices
    interior_ids = set()
    for s in subs:
        if any(support_p.locate(v) == 0 for v in s.support.vertices):
            continue
        if any(s.support.locate(pv) != -1 for pv in parent_vs):
            continue
        interior_ids.add(s.index)
    cx = sum(float(v.x) for v in parent_vs) / len(parent_vs)
    cy = sum(float(v.y) for v in parent_vs) / len(parent_vs)
    copies = [s for s in subs if s.prototile == p and s.index in interior_ids]

    def centrality(s: Subtile):
        bb = s.support.bbox
        mx, my = (bb[0] + bb[2]) / 2, (bb[1] + bb[3]) / 2
        return ((mx - cx) ** 2 + (my - cy) ** 2,
                tuple((float(d.x), float(d.y)) for d in s.digits))

    copies.sort(key=centrality)
    return subs, neighbors, interior_ids, copies


def _channels_for_tile(rule, p, n, subs, neighbors, interior_ids, corner,
                       exposure, chosen, p0: Subtile):
    """Route one channel per prototile edge into the interior copy p0."""
    support_p = rule.support(p)
    selection: list[EdgeCopy] = []
    used: set[int] = set()
    for i in range(len(rule.prototile_edges(p))):
        t = chosen[(p, i)]
        v = _edge_point(rule, p, i, t)
        start = None
        for s in subs:
            for _ei, host, a, b in exposure[s.index]:
                if host == i and point_on_segment(v, a, b) and v != a and v != b:
                    start = (s.index, _ei)
        if start is None:
            raise SearchError(f"boundary position on edge ({p},{i}) not found")
        if start[0] in corner:
            raise SearchError(f"boundary position on edge ({p},{i}) is in a corner")
        goals = ({x[0] for x in neighbors[p0.index]} & interior_ids) - corner - used
        allowed = ((interior_ids | {start[0]}) - corner - used) - {p0.index}
        path = _route(neighbors, allowed, start[0], goals, order_key=lambda x: x)
        if path is None:
            raise SearchError(f"channel routing blocked for prototile {p}, edge {i}")
        used |= set(path)
        link = next(x for x in neighbors[path[-1]] if x[0] == p0.index)
        copies = _path_copies(rule, p, subs, neighbors, path,
                              entry=(start[1], v), final=(link[1], None))
        copies.append(EdgeCopy(p, p0.digits, p0.prototile, link[2], p0.t))
        selection.extend(copies)
    return selection


def _route_channels(rule: SubstitutionRule, g0: EmbeddedGraph, n: int, rng,
                    max_p0_tries: int = 4):
    chosen = consistent_boundary_positions(rule, n)
    selection: list[EdgeCopy] = []
    for p in range(rule.m):
        subs, neighbors, interior_ids, copies = _interior_structure(rule, p, n)
        if not copies:
            raise SearchError(f"no interior copy of {p} at depth {n}")
        exposure = _boundary_exposure(rule, p, subs, n)
        corner = _corner_subtiles(rule, p, subs)
        last = None
        for p0 in copies[:max_p0_tries]:
            try:
                selection.extend(
                    _channels_for_tile(rule, p, n, subs, neighbors, interior_ids,
                                       corner, exposure, chosen, p0))
                break
            except SearchError as exc:
                last = exc
        else:
            raise SearchError(f"prototile {p}: all interior copies failed: {last}")
    return _dedup(selection)


def _dedup(copies):
    seen = set()
    out = []
    for c in copies:
        if c.id() not in seen:
            seen.add(c.id())
            out.append(c)
    return out


def _diagnose_dual_obstruction(rule: SubstitutionRule) -> None:
    """For non-singly-edge-to-edge rules, a dual subgraph selection is
    impossible: every candidate interior vertex has two spokes forced
    through a doubly-adjacent subtile, closing a cycle."""
    p = 0
    n = 2
    subs, neighbors = _adjacency_structure(rule, p, n)
    support_p = rule.support(p)
    degree = len(rule.prototile_edges(p))
    witnesses = []
    for s in subs:
        segs, pts = boundary_intersection(s.support, support_p)
        if segs or pts:
            continue
        counts: dict[int, int] = {}
        for (j, _ei, _ej, _mid) in neighbors[s.index]:
            counts[j] = counts.get(j, 0) + 1
        doubled = [j for j, c in counts.items() if c >= 2]
        if doubled:
            witnesses.append((s.index, doubled[0]))
        else:
            return  # some candidate is unobstructed; no structural diagnosis
    raise DualTargetError(
        f"dual selection impossible: every candidate interior vertex of "
        f"degree {degree} has two edges entering one doubly-adjacent subtile "
        f"and closing a cycle (witnesses: {witnesses[:3]} ...)")


def convex_dual_pair(rule: SubstitutionRule, seed: int = 0, max_n: int = 6,
                     n_test_range=range(1, 3)) -> SearchResult:
    """Dual/dual pair for convex, singly edge-to-edge, primitive rules."""
    for p in range(rule.m):
        poly = rule.support(p)
        vs = poly.vertices
        k = len(vs)
        for i in range(k):
            if orientation(vs[(i - 1) % k], vs[i], vs[(i + 1) % k]) <= 0:
                raise SearchError(f"prototile {p} is not convex")
    if not rule.primitive:
        raise SearchError("rule must be primitive")
    if not rule.singly_edge_to_edge:
        raise SearchError("rule must be singly edge-to-edge")
    from fractile.catalog import midpoint_dual_graph
    g0 = midpoint_dual_graph(rule)
    n0 = max(find_interior_copy(rule, p)[0] for p in range(rule.m))
    last = None
    for n in range(n0, max_n + 1):
        try:
            selection = _route_chords(rule, g0, n)
            pair = RecurrentPair.build(rule, g0, n, selection)
        except (SearchError, PairError) as exc:
            last = exc
            continue
        for n_test in [n] + [x for x in n_test_range if x != n]:
            rep = check_injectivity(pair, n_test)
            if rep.all_passed:
                return SearchResult(pair, n, 0, rep)
        last = SearchError(f"injectivity failed at depth {n}")
    raise SearchError(f"convex dual search exhausted depth {max_n}: {last}")


def _route_chords(rule: SubstitutionRule, g0: EmbeddedGraph, n: int,
                  max_p0_tries: int = 4):
    chosen = consistent_boundary_positions(rule, n)
    inv = rule.lam ** (-n)
    selection: list[EdgeCopy] = []
    for p in range(rule.m):
        subs, neighbors, interior_ids, copies0 = _interior_structure(rule, p, n)
        if not copies0:
            raise SearchError(f"no interior copy of {p} at depth {n}")
        exposure = _boundary_exposure(rule, p, subs, n)
        corner = _corner_subtiles(rule, p, subs)
        last = None
        for p0 in copies0[:max_p0_tries]:
            try:
                part: list[EdgeCopy] = []
                used: set[int] = set()
                for i in range(len(rule.prototile_edges(p))):
                    t = chosen[(p, i)]
                    v = _edge_point(rule, p, i, t)
                    # counterpart: the scaled boundary vertex of the copy
                    target_bv = None
                    for bv in g0.boundary_vertices(p):
                        if g0.host_edge(p, bv) == i:
                            target_bv = (bv.point + p0.t).scale(inv)
                    chord = (v, target_bv)
                    in_chord = {s.index for s in subs
                                if polyline_meets_polygon(chord, s.support)}
                    start = None
                    for s in subs:
                        for _ei, host, a, b in exposure[s.index]:
                            if host == i and point_on_segment(v, a, b) \
                                    and v != a and v != b:
                                start = (s.index, _ei)
                    if start is None:
                        raise SearchError(f"no boundary position on edge ({p},{i})")
                    if start[0] in corner:
                        raise SearchError(
                            f"boundary position on edge ({p},{i}) is in a corner")
                    goals = ({x[0] for x in neighbors[p0.index]} & in_chord
                             & interior_ids) - corner - used
                    allowed = (((in_chord & interior_ids) - corner - used)
                               | {start[0]}) - {p0.index}
                    path = _route(neighbors, allowed, start[0], goals,
                                  order_key=lambda x: x)
                    if path is None:
                        raise SearchError(f"chord routing blocked for ({p},{i})")
                    used |= set(path)
                    link = next(x for x in neighbors[path[-1]]
                                if x[0] == p0.index)
                    copies = _path_copies(rule, p, subs, neighbors, path,
                                          entry=(start[1], v),
                                          final=(link[1], None))
                    copies.append(EdgeCopy(p, p0.digits, p0.prototile,
                                           link[2], p0.t))
                    part.extend(copies)
                selection.extend(part)
                break
            except SearchError as exc:
                last = exc
        else:
            raise SearchError(f"prototile {p}: chord routing failed: {last}")
    return _dedup(selection)


# -- the redraw iteration (unique quasi-dual through the same patches) ---------

def iterate_pair(rule: SubstitutionRule, g: EmbeddedGraph, g_prime: EmbeddedGraph,
                 n: int) -> EmbeddedGraph:
    """The unique quasi-dual H inside the contraction of g_prime running
    through the same subtile patches as g_prime."""
    contracted = ContractedGraph(rule, g_prime, n)
    selection: list[EdgeCopy] = []
    for p in range(rule.m):
        subs, _neighbors = _adjacency_structure(rule, p, n)
        sub_by_digits = {s.digits: s for s in subs}
        # the patch: subtiles meeting g_prime's edges
        patch: set[tuple] = set()
        for e in g_prime.edges[p]:
            for s in subs:
                if polyline_meets_polygon(e.polyline, s.support):
                    patch.add(s.digits)
        # candidate copies: drawn in patch subtiles
        cands = [c for c in contracted.copies[p] if c.digits in patch]
        # designated boundary stubs: n-subedges of the boundary that g_prime meets
        support_p = rule.support(p)
        keep: dict[str, EdgeCopy] = {c.id(): c for c in cands}
        # iteratively strip dangling ends not on the prototile boundary
        while True:
            incident: dict[Point, list[str]] = {}
            for cid, c in keep.items():
                poly = contracted.polyline(c)
                for end in (poly[0], poly[-1]):
                    incident.setdefault(end, []).append(cid)
            removed = False
            for pt, cids in incident.items():
                if len(cids) == 1 and support_p.locate(pt) != 0:
                    del keep[cids[0]]
                    removed = True
            if not removed:
                break
        if not keep:
            raise SearchError(f"prototile {p}: nothing left after pruning")
        # uniqueness: the result must be a forest-free tree (no cycles)
        ids = list(keep)
        verts = {}
        for cid in ids:
            poly = contracted.polyline(keep[cid])
            verts.setdefault(poly[0], len(verts))
            verts.setdefault(poly[-1], len(verts))
        parent = list(range(len(verts)))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for cid in ids:
            poly = contracted.polyline(keep[cid])
            a, b = find(verts[poly[0]]), find(verts[poly[-1]])
            if a == b:
                raise SearchError(
                    f"prototile {p}: redraw through the patch is not unique "
                    f"(a cycle remains)")
            parent[a] = b
        selection.extend(keep.values())
    return contracted.select(selection)


def search_pair_sequence(rule: SubstitutionRule, g0: EmbeddedGraph,
                         seed: int = 0, max_iter: int = 8,
                         **kw) -> SearchResult:
    """Full search: channels first, then redraw until consecutive graphs
    are equivalent; the final two graphs form the returned pair."""
    first = build_quasi_dual(rule, g0, seed=seed, **kw)
    g_cur = first.pair.g
    s_cur = first.pair.s
    n = first.pair.n
    try:
        match_equivalence(g_cur, s_cur, rule)
        return SearchResult(first.pair, n, 0, first.report)
    except PairError:
        pass
    prev_interior = [len(s_cur.interior_vertices(p)) for p in range(rule.m)]
    for it in range(1, max_iter + 1):
        h = iterate_pair(rule, g_cur, s_cur, n)
        cur_interior = [len(h.interior_vertices(p)) for p in range(rule.m)]
        if any(c < p_ for c, p_ in zip(cur_interior, prev_interior)):
            raise SearchError("interior vertex count decreased; invariant broken")
        try:
            match_equivalence(s_cur, h, rule)
        except PairError:
            g_cur, s_cur = s_cur, h
            prev_interior = cur_interior
            continue
        pair = RecurrentPair.build(
            rule, s_cur, n, [c.id() for p in range(rule.m)
                             for c in h.provenance[p]])
        for n_test in kw.get("n_test_range", range(1, 5)):
            rep = check_injectivity(pair, n_test)
            if rep.all_passed:
                return SearchResult(pair, n, it, rep)
        raise SearchError("iterated pair failed the injectivity conditions")
    raise SearchError(f"no equivalent pair within {max_iter} redraw iterations")
