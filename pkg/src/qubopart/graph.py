"""Weighted undirected graphs: text ingestion, degree bookkeeping, modularity.

Graphs are immutable after construction and safe for concurrent readers.
Node labels from text sources are mapped to dense indices 0..n-1 in
first-appearance order, so a fixture file fully determines the index space.
"""

from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DomainError, ParseError

__all__ = [
    "Graph",
    "CommunityAssignment",
    "ModularityParams",
    "load_edge_list",
    "load_branch_table",
    "modularity",
    "degree_vector",
]


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph with strictly positive edge weights.

    ``edges`` holds each edge once as (u, v) index pairs; ``indptr`` /
    ``neighbors`` / ``neighbor_weights`` form a CSR view of both directions
    for O(degree) neighborhood scans.
    """

    node_count: int
    edges: np.ndarray            # (E, 2) int64
    weights: np.ndarray          # (E,) float64, all > 0
    node_labels: list[str] | None = None
    indptr: np.ndarray = field(repr=False, default=None)
    neighbors: np.ndarray = field(repr=False, default=None)
    neighbor_weights: np.ndarray = field(repr=False, default=None)
    degrees: np.ndarray = field(repr=False, default=None)
    total_edge_weight: float = 0.0

    @classmethod
    def from_edges(
        cls,
        node_count: int,
        edges: Sequence[tuple[int, int, float]],
        node_labels: list[str] | None = None,
    ) -> "Graph":
        """Build a validated graph from (u, v, w) triples, each edge once."""
        e = len(edges)
        pairs = np.zeros((e, 2), dtype=np.int64)
        w = np.zeros(e, dtype=np.float64)
        seen: set[tuple[int, int]] = set()
        for row, (u, v, wt) in enumerate(edges):
            if not (0 <= u < node_count and 0 <= v < node_count):
                raise DomainError(f"edge ({u},{v}) outside dense index range 0..{node_count - 1}")
            if u == v:
                raise DomainError(f"self-loop on node {u} is not allowed")
            if not (math.isfinite(wt) and wt > 0):
                raise DomainError(f"edge ({u},{v}) has non-positive or non-finite weight {wt}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise DomainError(f"parallel edge ({u},{v})")
            seen.add(key)
            pairs[row] = (u, v)
            w[row] = wt

        # CSR over both directions; degrees and m derive from one summation
        # pass so that sum(degrees) == 2*m holds exactly.
        counts = np.zeros(node_count, dtype=np.int64)
        if e:
            np.add.at(counts, pairs[:, 0], 1)
            np.add.at(counts, pairs[:, 1], 1)
        indptr = np.zeros(node_count + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        nbr = np.zeros(2 * e, dtype=np.int64)
        nbw = np.zeros(2 * e, dtype=np.float64)
        cursor = indptr[:-1].copy()
        for (u, v), wt in zip(pairs, w):
            nbr[cursor[u]] = v
            nbw[cursor[u]] = wt
            cursor[u] += 1
            nbr[cursor[v]] = u
            nbw[cursor[v]] = wt
            cursor[v] += 1
        degrees = np.bincount(pairs[:, 0], weights=w, minlength=node_count) + np.bincount(
            pairs[:, 1], weights=w, minlength=node_count
        )
        m = float(degrees.sum()) / 2.0
        return cls(
            node_count=node_count,
            edges=pairs,
            weights=w,
            node_labels=node_labels,
            indptr=indptr,
            neighbors=nbr,
            neighbor_weights=nbw,
            degrees=degrees,
            total_edge_weight=m,
        )

    @property
    def edge_count(self) -> int:
        return len(self.weights)

    def neighborhood(self, node: int) -> tuple[np.ndarray, np.ndarray]:
        """Neighbor indices and weights of ``node`` as array views."""
        lo, hi = self.indptr[node], self.indptr[node + 1]
        return self.neighbors[lo:hi], self.neighbor_weights[lo:hi]


@dataclass(frozen=True)
class CommunityAssignment:
    """Group label per node; labels lie in [0, group_count)."""

    labels: np.ndarray
    group_count: int

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "labels", labels)
        if self.group_count < 1:
            raise DomainError("group_count must be >= 1")
        if labels.size and (labels.min() < 0 or labels.max() >= self.group_count):
            raise DomainError("assignment labels outside [0, group_count)")

    def group_sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.group_count)


@dataclass(frozen=True)
class ModularityParams:
    """Resolution parameter for the modularity null model (default 1)."""

    gamma: float = 1.0

    def __post_init__(self):
        if not (self.gamma > 0):
            raise DomainError("gamma must be positive")


def _iter_lines(source) -> Iterator[tuple[int, str]]:
    """Yield (line_number, stripped_content) skipping blanks and # comments."""
    if isinstance(source, (str, Path)):
        handle: Iterable[str] = open(source, "r", encoding="utf-8")
    else:
        handle = source
    for lineno, raw in enumerate(handle, start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line
    if isinstance(source, (str, Path)):
        handle.close()


def load_edge_list(source, weighted: bool = False) -> Graph:
    """Load a graph from "u v" / "u v w" text.

    ``source`` is a filesystem path or any iterable of lines.  String labels
    are mapped to dense indices in first-appearance order.  With
    ``weighted=False`` any weight column is ignored and all weights are 1;
    with ``weighted=True`` the third column is required.  Duplicate edges in
    either orientation are rejected.
    """
    index: dict[str, int] = {}
    labels: list[str] = []
    triples: list[tuple[int, int, float]] = []
    seen: set[tuple[int, int]] = set()

    def node_id(token: str) -> int:
        if token not in index:
            index[token] = len(labels)
            labels.append(token)
        return index[token]

    for lineno, line in _iter_lines(source):
        cols = line.split()
        if len(cols) not in (2, 3):
            raise ParseError(f"line {lineno}: expected 2 or 3 columns, got {len(cols)}")
        if weighted:
            if len(cols) != 3:
                raise ParseError(f"line {lineno}: weighted load requires a weight column")
            try:
                w = float(cols[2])
            except ValueError:
                raise ParseError(f"line {lineno}: bad weight {cols[2]!r}") from None
        else:
            w = 1.0
        u, v = node_id(cols[0]), node_id(cols[1])
        if u == v:
            raise DomainError(f"line {lineno}: self-loop on {cols[0]!r}")
        if not (math.isfinite(w) and w > 0):
            raise DomainError(f"line {lineno}: weight must be strictly positive, got {w}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise DomainError(f"line {lineno}: duplicate edge {cols[0]!r} {cols[1]!r}")
        seen.add(key)
        triples.append((u, v, w))

    return Graph.from_edges(len(labels), triples, node_labels=labels)


def load_branch_table(source) -> Graph:
    """Load a power-grid branch table "u v r x" as a weighted graph.

    Each branch becomes an edge weighted by the inverse impedance magnitude
    1/sqrt(r^2 + x^2).  Duplicate branches between the same node pair are
    collapsed keeping the first occurrence (one summary warning is emitted);
    a branch with r = x = 0 is rejected.
    """
    index: dict[str, int] = {}
    labels: list[str] = []
    triples: list[tuple[int, int, float]] = []
    seen: set[tuple[int, int]] = set()
    dropped = 0
    first_dropped = None

    def node_id(token: str) -> int:
        if token not in index:
            index[token] = len(labels)
            labels.append(token)
        return index[token]

    for lineno, line in _iter_lines(source):
        cols = line.split()
        if len(cols) != 4:
            raise ParseError(f"line {lineno}: expected 4 columns 'u v r x', got {len(cols)}")
        try:
            r, x = float(cols[2]), float(cols[3])
        except ValueError:
            raise ParseError(f"line {lineno}: bad impedance columns {cols[2]!r} {cols[3]!r}") from None
        z = math.hypot(r, x)
        if not (math.isfinite(z) and z > 0):
            raise DomainError(f"line {lineno}: zero or non-finite impedance |r+jx|")
        u, v = node_id(cols[0]), node_id(cols[1])
        if u == v:
            raise DomainError(f"line {lineno}: self-loop branch on {cols[0]!r}")
        key = (min(u, v), max(u, v))
        if key in seen:
            dropped += 1
            if first_dropped is None:
                first_dropped = lineno
            continue
        seen.add(key)
        triples.append((u, v, 1.0 / z))

    if dropped:
        warnings.warn(
            f"collapsed {dropped} parallel branch(es), keeping first occurrence "
            f"(first duplicate at line {first_dropped})",
            stacklevel=2,
        )
    return Graph.from_edges(len(labels), triples, node_labels=labels)


def degree_vector(g: Graph) -> np.ndarray:
    """Weighted degree k_i = sum of incident edge weights, per node."""
    return g.degrees.copy()


def modularity(
    g: Graph,
    assignment: CommunityAssignment,
    params: ModularityParams = ModularityParams(),
) -> float:
    """Modularity of a community assignment.

    Uses the per-community form Q = sum_c [ W_c/m - gamma*(D_c/2m)^2 ] with
    W_c the intra-community edge weight and D_c the community degree sum,
    which is algebraically identical to the pairwise double sum over
    (A_ij - gamma*k_i*k_j/2m)/2m.
    """
    labels = np.asarray(assignment.labels, dtype=np.int64)
    if labels.shape[0] != g.node_count:
        raise DomainError(
            f"assignment length {labels.shape[0]} != node count {g.node_count}"
        )
    m = g.total_edge_weight
    if m <= 0:
        raise DomainError("modularity undefined for a graph with no edge weight")
    k = assignment.group_count
    lu = labels[g.edges[:, 0]]
    lv = labels[g.edges[:, 1]]
    same = lu == lv
    intra = np.bincount(lu[same], weights=g.weights[same], minlength=k)
    group_degree = np.bincount(labels, weights=g.degrees, minlength=k)
    return float(intra.sum() / m - params.gamma * np.square(group_degree / (2.0 * m)).sum())


def move_gain(
    g: Graph,
    labels: np.ndarray,
    group_degree: np.ndarray,
    node: int,
    target: int,
    gamma: float = 1.0,
) -> float:
    """Modularity change from moving ``node`` to group ``target``.

    ``group_degree`` must hold the current per-group degree sums.  O(degree)
    per call; the caller maintains ``labels`` and ``group_degree``.
    """
    src = labels[node]
    if src == target:
        return 0.0
    nbr, nbw = g.neighborhood(node)
    lab = labels[nbr]
    w_src = float(nbw[lab == src].sum())
    w_tgt = float(nbw[lab == target].sum())
    m = g.total_edge_weight
    ki = float(g.degrees[node])
    d_src = float(group_degree[src])
    d_tgt = float(group_degree[target])
    return (w_tgt - w_src) / m - gamma * ki * (d_tgt - d_src + ki) / (2.0 * m * m)
