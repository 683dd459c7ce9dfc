#!/usr/bin/env python3
"""Regenerate the bundled classic-graph fixtures as edge-list text.

Karate Club and Les Miserables come from networkx's built-in generators
(weighted).  The American Football and Dolphin graphs are not shipped by
networkx; pass GML files obtained from their public sources (Girvan-Newman
football data; Network Data Repository soc-dolphins) via --football-gml /
--dolphins-gml to convert them.

Usage:
    python scripts/export_fixtures.py [--football-gml F] [--dolphins-gml D] [--out DIR]
"""

import argparse
import hashlib
from pathlib import Path

import networkx as nx

DEFAULT_OUT = Path(__file__).resolve().parent.parent / "src" / "qubopart" / "data"


def write_edge_list(path: Path, g, header: str, weighted: bool) -> None:
    lines = [f"# {line}" for line in header.strip().splitlines()]
    for u, v, data in g.edges(data=True):
        if weighted:
            w = data.get("weight", 1)
            lines.append(f"{u} {v} {w:g}")
        else:
            lines.append(f"{u} {v}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    digest = hashlib.sha256(path.read_bytes()).hexdigest()
    print(f"{path.name}: {g.number_of_nodes()} nodes, {g.number_of_edges()} edges, sha256={digest}")


def two_triangles() -> nx.Graph:
    g = nx.Graph()
    g.add_edges_from([(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)])
    return g


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=DEFAULT_OUT)
    ap.add_argument("--football-gml", type=Path, default=None)
    ap.add_argument("--dolphins-gml", type=Path, default=None)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    kc = nx.karate_club_graph()
    write_edge_list(
        args.out / "karate.txt",
        kc,
        "Zachary karate club (networkx karate_club_graph, weighted).\n"
        "Columns: u v w. Load unweighted to drop the weight column.",
        weighted=True,
    )

    lm = nx.les_miserables_graph()
    write_edge_list(
        args.out / "lesmis.txt",
        lm,
        "Les Miserables character co-appearances (networkx les_miserables_graph,\n"
        "weighted; Knuth's Stanford GraphBase). Columns: u v w.",
        weighted=True,
    )

    write_edge_list(
        args.out / "two_triangles.txt",
        two_triangles(),
        "Two disjoint triangles; brute-force oracle fixture. Columns: u v.",
        weighted=False,
    )

    if args.football_gml:
        fb = nx.read_gml(args.football_gml)
        write_edge_list(
            args.out / "football.txt",
            fb,
            "American college football, division IA games in Fall 2000\n"
            "(Girvan & Newman). Converted from GML; unweighted.",
            weighted=False,
        )

    if args.dolphins_gml:
        d = nx.read_gml(args.dolphins_gml)
        write_edge_list(
            args.out / "dolphin.txt",
            d,
            "Bottlenose dolphin social network, Doubtful Sound (Lusseau et al.),\n"
            "via Network Data Repository soc-dolphins. Converted from GML; unweighted.",
            weighted=False,
        )


if __name__ == "__main__":
    main()
