#!/usr/bin/env python3
"""Emit the bundled rule files from the catalog constructors."""

from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from fractile import catalog
from fractile.ruleio import RuleDocument, parse_rule, print_rule

OUT = Path(__file__).resolve().parents[1] / "src" / "fractile" / "rules"


def emit(name: str, doc: RuleDocument) -> None:
    text = print_rule(doc)
    parse_rule(text)  # round-trip sanity
    (OUT / f"{name}.rule").write_text(text + "\n")
    print(f"wrote {name}.rule")


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)

    chair = catalog.chair_rule()
    doc = RuleDocument(chair)
    doc.graph_blocks["G"] = catalog.midpoint_dual_graph(
        chair, catalog.chair_kernel_points())
    emit("chair", doc)

    tdtm = catalog.two_d_thue_morse_rule()
    doc = RuleDocument(tdtm)
    doc.graph_blocks["G"] = catalog.midpoint_dual_graph(tdtm)
    doc.pair_block = {"n": 1, "selection": catalog.TWO_D_THUE_MORSE_SELECTION}
    emit("two_d_thue_morse", doc)

    for lam in (3, 5):
        rule = catalog.square_rule(lam)
        doc = RuleDocument(rule)
        doc.graph_blocks["G"] = catalog.midpoint_dual_graph(rule)
        doc.pair_block = {"n": 1,
                          "selection": catalog.straight_cross_selection(rule)}
        emit(f"square{lam}", doc)

    ab = catalog.ammann_beenker_rule()
    doc = RuleDocument(ab)
    doc.graph_blocks["G"] = catalog.midpoint_dual_graph(ab)
    emit("ammann_beenker", doc)


if __name__ == "__main__":
    main()
