"""Deterministic SVG 1.1 output for prototiles, graphs and boundary curves."""

from __future__ import annotations

from io import StringIO

import numpy as np

from fractile.field import Point

PALETTE = [
    "#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860",
    "#da8bc3", "#8c8c8c", "#ccb974", "#64b5cd", "#4c4c4c", "#b0724c",
]


def color(i: int) -> str:
    return PALETTE[i % len(PALETTE)]


class SvgCanvas:
    def __init__(self, margin: float = 0.05):
        self.elements: list[str] = []
        self.margin = margin
        self._bounds = [float("inf"), float("inf"), -float("inf"), -float("inf")]

    def _grow(self, xs, ys):
        b = self._bounds
        b[0] = min(b[0], min(xs))
        b[1] = min(b[1], min(ys))
        b[2] = max(b[2], max(xs))
        b[3] = max(b[3], max(ys))

    def polygon(self, pts, fill="none", stroke="#000", width=0.01, opacity=1.0):
        xs, ys = zip(*pts)
        self._grow(xs, ys)
        coords = " ".join(f"{x:.6f},{-y:.6f}" for x, y in pts)
        self.elements.append(
            f'<polygon points="{coords}" fill="{fill}" fill-opacity="{opacity}" '
            f'stroke="{stroke}" stroke-width="{width}"/>')

    def polyline(self, pts, stroke="#000", width=0.01):
        xs, ys = zip(*pts)
        self._grow(xs, ys)
        coords = " ".join(f"{x:.6f},{-y:.6f}" for x, y in pts)
        self.elements.append(
            f'<polyline points="{coords}" fill="none" stroke="{stroke}" '
            f'stroke-width="{width}" stroke-linejoin="round" '
            f'stroke-linecap="round"/>')

    def group(self, gid: str):
        self.elements.append(f'<g id="{gid}">')

    def endgroup(self):
        self.elements.append("</g>")

    def render(self) -> str:
        x0, y0, x1, y1 = self._bounds
        if x0 > x1:
            x0 = y0 = 0.0
            x1 = y1 = 1.0
        pad = self.margin * max(x1 - x0, y1 - y0, 1e-9)
        out = StringIO()
        out.write('<?xml version="1.0" encoding="UTF-8"?>\n')
        out.write(
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'viewBox="{x0 - pad:.6f} {-(y1 + pad):.6f} '
            f'{x1 - x0 + 2 * pad:.6f} {y1 - y0 + 2 * pad:.6f}">\n')
        for el in self.elements:
            out.write(el)
            out.write("\n")
        out.write("</svg>\n")
        return out.getvalue()


def _pts(points) -> list[tuple[float, float]]:
    out = []
    for p in points:
        if isinstance(p, Point):
            out.append(p.as_floats())
        elif isinstance(p, np.ndarray):
            out.append((float(p[0]), float(p[1])))
        else:
            out.append((float(p[0]), float(p[1])))
    return out


def render_rule_overlay(rule, graph=None, level_polylines=None, patch=None,
                        es=None, width=0.01) -> str:
    """Prototile outlines with the graph and/or boundary-curve overlay."""
    canvas = SvgCanvas()
    patch = patch if patch is not None else [
        __import__("fractile.tiling", fromlist=["PlacedTile"]).PlacedTile(p, _origin())
        for p in range(rule.m)
    ]
    spacing = _layout_offsets(rule, patch)
    canvas.group("tiles")
    for tile, off in zip(patch, spacing):
        sup = rule.tile_support(tile)
        pts = [(x + off[0], y + off[1]) for x, y in _pts(sup.vertices)]
        canvas.polygon(pts, fill=color(tile.prototile), opacity=0.25,
                       stroke="#333", width=width)
    canvas.endgroup()
    if graph is not None:
        canvas.group("graph")
        for tile, off in zip(patch, spacing):
            for e in graph.edges[tile.prototile]:
                pts = [(x + off[0], y + off[1])
                       for x, y in _pts(q + tile.translation for q in e.polyline)]
                canvas.polyline(pts, stroke="#a00", width=width)
        canvas.endgroup()
    if level_polylines is not None and es is not None:
        canvas.group("curves")
        for (p, _i), poly in zip(es.edges, level_polylines):
            for tile, off in zip(patch, spacing):
                if tile.prototile != p:
                    continue
                t = tile.translation.as_floats()
                pts = [(x + t[0] + off[0], y + t[1] + off[1]) for x, y in poly]
                canvas.polyline(pts, stroke="#006", width=width)
        canvas.endgroup()
    return canvas.render()


def _origin():
    from fractile.field import ORIGIN

    return ORIGIN


def _layout_offsets(rule, patch):
    """Spread single-prototile showcase patches; keep real patches in place."""
    translations = {t.translation for t in patch}
    if len(translations) > 1 or len(patch) <= 1:
        return [(0.0, 0.0)] * len(patch)
    # one tile of each prototile at the origin: lay them out in a row
    offs = []
    dx = 0.0
    for tile in patch:
        sup = rule.tile_support(tile)
        bb = sup.bbox
        offs.append((dx - bb[0], 0.0))
        dx += (bb[2] - bb[0]) * 1.2
    return offs


def render_fractal_prototiles(fps, es, level: int = 5) -> str:
    """One group per fractal prototile, class-coloured boundary curves."""
    from fractile.fractal import iterate

    approx = iterate(es, level)
    index = {pe: k for k, pe in enumerate(es.edges)}
    raw_maps = {}
    pair = fps.pair
    canvas = SvgCanvas()
    dx = 0.0
    for ci, word in enumerate(fps.words):
        canvas.group(f"prototile-{ci}")
        xs = []
        pieces = []
        for p, x, e, fwd in word:
            skel = pair.g.skeletons[p]
            if p not in raw_maps:
                raw_maps[p] = {}
                for si, se in enumerate(skel.edges):
                    if len(se.pieces) == 1:
                        raw_maps[p][se.pieces[0][0]] = si
            k = index[(p, raw_maps[p][e])]
            poly = approx.polylines[k]
            t = x.as_floats()
            pts = poly + np.array(t)
            pieces.append(pts)
            xs.extend(pts[:, 0])
        shift = dx - (min(xs) if xs else 0.0)
        for pts in pieces:
            canvas.polyline([(px + shift, py) for px, py in pts],
                            stroke=color(ci), width=0.02)
        dx = dx + (max(xs) - min(xs)) * 1.25 if xs else dx + 1.0
        canvas.endgroup()
    return canvas.render()
