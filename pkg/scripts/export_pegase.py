#!/usr/bin/env python3
"""Export the Case 1354pegase branch table from pandapower.

Writes one "u v r x" line per branch (lines, then two-winding transformers)
with impedances in ohms as computed by pandapower's topology helper.  The
table keeps all parallel branches; the loader collapses them (keep-first)
down to the 1710 distinct node pairs of this case.

Requires: pip install pandapower
"""

import argparse
import hashlib
from pathlib import Path

import pandapower.networks as pn
import pandapower.topology as top

DEFAULT_OUT = (
    Path(__file__).resolve().parent.parent
    / "src"
    / "qubopart"
    / "data"
    / "pegase1354_branches.txt"
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=DEFAULT_OUT)
    args = ap.parse_args()

    net = pn.case1354pegase()
    graph = top.create_nxgraph(net, multi=True, calc_branch_impedances=True)
    branches = []
    for u, v, key, data in graph.edges(keys=True, data=True):
        kind, idx = key
        branches.append(
            (kind, int(idx), int(u), int(v), float(data["r_ohm"]), float(data["x_ohm"]))
        )
    # deterministic order: lines first, then trafos, by table index
    branches.sort(key=lambda b: (b[0], b[1]))

    lines = [
        "# Case 1354pegase branch table (u v r x, impedances in ohms).",
        "# Exported from pandapower.networks.case1354pegase via",
        "# pandapower.topology.create_nxgraph(calc_branch_impedances=True).",
        "# 1354 buses; all branches kept, parallels collapse on load (keep-first).",
    ]
    for kind, idx, u, v, r, x in branches:
        lines.append(f"{u} {v} {r!r} {x!r}")
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    digest = hashlib.sha256(args.out.read_bytes()).hexdigest()
    print(f"{args.out.name}: {len(branches)} branches, sha256={digest}")


if __name__ == "__main__":
    main()
