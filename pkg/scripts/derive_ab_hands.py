#!/usr/bin/env python3
"""Determine the handedness assignment for the octagonal rule's sub-triangles.

The support subdivision is forced by the geometry; what remains free is which
of the five triangle pieces in the base subdivisions carry the mirrored
label.  The correct assignment is the one whose tiling is cleanly
edge-to-edge: the consistent vertex closure adds no vertices beyond the
polygon corners, the rule stays primitive, and tiles meet singly
edge-to-edge.
"""

from __future__ import annotations

import itertools
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from fractile.catalog import ammann_beenker_rule
from fractile.tiling import RuleError


def main():
    good = []
    for hands in itertools.product((0, 1), repeat=5):
        rule = ammann_beenker_rule(hands)
        if not rule.primitive:
            print(f"{hands}: not primitive")
            continue
        rule.max_closure_depth = 4
        rule.max_extra_vertices = 0
        t0 = time.time()
        try:
            vs = rule.vertex_sets
        except RuleError as exc:
            print(f"{hands}: {str(exc)[:60]}  ({time.time()-t0:.0f}s)")
            continue
        see = rule.singly_edge_to_edge
        print(f"{hands}: CLEAN, singly e2e = {see}, "
              f"depth = {rule.vertex_closure_depth}  ({time.time()-t0:.0f}s)")
        if see:
            good.append(hands)
    print("clean assignments:", good)


if __name__ == "__main__":
    main()
