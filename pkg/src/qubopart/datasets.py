"""Registry of bundled benchmark fixtures.

Fixtures live as edge-list / branch-table text under the package's ``data``
directory; the ``QUBOPART_DATA`` environment variable can point somewhere
else (user-supplied fixtures with the same names take precedence there).
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import DomainError
from .graph import Graph, load_branch_table, load_edge_list

__all__ = ["DatasetEntry", "REGISTRY", "load_dataset", "dataset_path", "verify_dataset"]

ENV_DATA_DIR = "QUBOPART_DATA"


@dataclass(frozen=True)
class DatasetEntry:
    name: str
    filename: str
    kind: str  # "edge_list" | "branch_table"
    weighted_available: bool
    nodes: int
    edges: int
    provenance: str


REGISTRY: dict[str, DatasetEntry] = {
    e.name: e
    for e in [
        DatasetEntry(
            "karate", "karate.txt", "edge_list", True, 34, 78,
            "Zachary karate club, weighted (networkx karate_club_graph)",
        ),
        DatasetEntry(
            "lesmis", "lesmis.txt", "edge_list", True, 77, 254,
            "Les Miserables co-appearances, weighted (networkx les_miserables_graph)",
        ),
        DatasetEntry(
            "football", "football.txt", "edge_list", False, 115, 613,
            "American college football, Fall 2000 (Girvan-Newman), from GML",
        ),
        DatasetEntry(
            "dolphin", "dolphin.txt", "edge_list", False, 62, 159,
            "Doubtful Sound bottlenose dolphins (Lusseau), Network Data Repository",
        ),
        DatasetEntry(
            "two_triangles", "two_triangles.txt", "edge_list", False, 6, 6,
            "Two disjoint triangles; brute-force oracle fixture",
        ),
        DatasetEntry(
            "pegase1354", "pegase1354_branches.txt", "branch_table", True, 1354, 1710,
            "Case 1354pegase branch table (pandapower export; parallels collapse on load)",
        ),
    ]
}


def dataset_path(name: str) -> Path:
    entry = REGISTRY.get(name)
    if entry is None:
        raise DomainError(
            f"unknown dataset {name!r}; available: {', '.join(sorted(REGISTRY))}"
        )
    override = os.environ.get(ENV_DATA_DIR)
    if override:
        candidate = Path(override) / entry.filename
        if candidate.exists():
            return candidate
    return Path(resources.files("qubopart").joinpath("data", entry.filename))


def load_dataset(name: str, weighted: bool = False) -> Graph:
    """Load a registered fixture; branch tables are inherently weighted."""
    entry = REGISTRY.get(name)
    if entry is None:
        raise DomainError(
            f"unknown dataset {name!r}; available: {', '.join(sorted(REGISTRY))}"
        )
    path = dataset_path(name)
    if entry.kind == "branch_table":
        return load_branch_table(path)
    if weighted and not entry.weighted_available:
        raise DomainError(f"dataset {name!r} has no weighted variant")
    return load_edge_list(path, weighted=weighted)


def verify_dataset(name: str) -> tuple[bool, str]:
    """Recount fixture nodes/edges against the registry record."""
    entry = REGISTRY[name]
    try:
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            g = load_dataset(name, weighted=False if entry.kind == "edge_list" else True)
    except Exception as exc:  # noqa: BLE001 - verification surface
        return False, f"load failed: {exc}"
    ok = g.node_count == entry.nodes and g.edge_count == entry.edges
    detail = f"loaded {g.node_count}/{g.edge_count}, expected {entry.nodes}/{entry.edges}"
    return ok, detail
