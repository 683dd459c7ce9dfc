"""Build the partition Hamiltonian: modularity objective plus penalties.

Three assembled-model forms share one energy/flip-delta interface:

* ``QuboMatrix`` -- fully explicit (slack mode, small instances),
* ``HybridModel`` -- explicit quadratic part plus an incremental
  empty-group penalty (inequality mode, small instances),
* ``PartitionModel`` -- fully factored (adjacency kept sparse, the rank-one
  degree term and all constraint sums tracked as counters); used when the
  dense per-group blocks would exceed the term budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .errors import DomainError, FeasibilityError
from .graph import CommunityAssignment, Graph, ModularityParams
from .qubo import MODE_INEQUALITY, MODE_SLACK, PenaltyWeights, QuboMatrix, VariableLayout

__all__ = [
    "build_modularity_objective",
    "build_assignment_constraint",
    "build_nonempty_constraint",
    "assemble",
    "decode",
    "encode_assignment",
    "default_penalty_weight",
    "InequalityPenalty",
    "HybridModel",
    "PartitionModel",
    "DecodeResult",
]

DENSE_TERM_LIMIT = 200_000


def modularity_couplings(g: Graph, gamma: float) -> tuple[np.ndarray, float]:
    """Diagonal of B and the scale factors for B_ij = (A_ij - g*k_i*k_j/2m)/2m."""
    m = g.total_edge_weight
    if m <= 0:
        raise DomainError("objective undefined for a graph with no edge weight")
    diag = -gamma * np.square(g.degrees) / (4.0 * m * m)
    return diag, m


def build_modularity_objective(
    g: Graph,
    group_count: int,
    params: ModularityParams,
    layout: VariableLayout,
    dense_term_limit: int = DENSE_TERM_LIMIT,
):
    """Quadratic form whose energy on one-hot bits equals minus the modularity.

    Returns an explicit ``QuboMatrix`` while the per-group dense blocks fit in
    ``dense_term_limit`` terms, otherwise a factored ``PartitionModel`` with
    zero penalty weights (same energy interface, no materialized matrix).
    """
    if group_count < 1:
        raise DomainError("group_count must be >= 1")
    if layout.n != g.node_count or layout.group_count != group_count:
        raise DomainError("layout does not match graph/group_count")
    n, k = g.node_count, group_count
    if k * n * (n + 1) // 2 > dense_term_limit:
        return PartitionModel(g, k, params.gamma, layout, 0.0, 0.0)

    diag, m = modularity_couplings(g, params.gamma)
    gamma = params.gamma
    model = QuboMatrix(layout.dimension)
    inv2m = 1.0 / (2.0 * m)
    deg = g.degrees
    # adjacency part of -2*B_ij, collected per edge
    adj = {}
    for (u, v), w in zip(g.edges, g.weights):
        adj[(min(u, v), max(u, v))] = w
    for c in range(k):
        for i in range(n):
            model.add_term(layout.index(i, c), layout.index(i, c), -diag[i])
        for i in range(n):
            for j in range(i + 1, n):
                b_ij = (adj.get((i, j), 0.0) - gamma * deg[i] * deg[j] * inv2m) * inv2m
                if b_ij != 0.0:
                    model.add_term(layout.index(i, c), layout.index(j, c), -2.0 * b_ij)
    model.prune_zeros()
    return model


def build_assignment_constraint(layout: VariableLayout) -> QuboMatrix:
    """Penalty sum_i ((sum_k x_ik) - 1)^2: zero exactly on one-hot rows."""
    model = QuboMatrix(layout.dimension, constant=float(layout.n))
    for i in range(layout.n):
        for a in range(layout.group_count):
            model.add_term(layout.index(i, a), layout.index(i, a), -1.0)
            for b in range(a + 1, layout.group_count):
                model.add_term(layout.index(i, a), layout.index(i, b), 2.0)
    return model


@dataclass(frozen=True)
class InequalityPenalty:
    """Empty-group penalty sum_k max(0, 1 - sum_i x_ik)^2 over node bits only.

    Group occupancies are integers, so each empty group contributes exactly 1.
    Kept out of the quadratic form; engines track per-group occupancy counters
    for O(1) flip deltas.
    """

    layout: VariableLayout

    def occupancy(self, bits) -> np.ndarray:
        x = np.asarray(bits)[: self.layout.node_block_size]
        return x.reshape(self.layout.n, self.layout.group_count).sum(axis=0)

    def energy(self, bits) -> float:
        return float((self.occupancy(bits) == 0).sum())


def build_nonempty_constraint(layout: VariableLayout):
    """Non-empty-group constraint in the form selected by the layout mode.

    Inequality mode returns an :class:`InequalityPenalty` evaluator.  Slack
    mode returns the quadratic penalty
    ``sum_k (sum_i x_ik - sum_d d*y_kd - 1)^2 + sum_k (sum_d y_kd - 1)^2``
    over node plus slack one-hot bits: zero iff every group is non-empty and
    its slack block one-hot-encodes (group size - 1).
    """
    if layout.mode == MODE_INEQUALITY:
        return InequalityPenalty(layout)

    n, k = layout.n, layout.group_count
    model = QuboMatrix(layout.dimension, constant=2.0 * k)
    for c in range(k):
        for i in range(n):
            model.add_term(layout.index(i, c), layout.index(i, c), -1.0)
            for j in range(i + 1, n):
                model.add_term(layout.index(i, c), layout.index(j, c), 2.0)
        for d in range(n):
            yd = layout.slack_index(c, d)
            model.add_term(yd, yd, float(d * d + 2 * d - 1))
            for d2 in range(d + 1, n):
                model.add_term(yd, layout.slack_index(c, d2), float(2 * d * d2 + 2))
        for i in range(n):
            for d in range(1, n):
                model.add_term(
                    layout.index(i, c), layout.slack_index(c, d), -2.0 * d
                )
    model.prune_zeros()
    return model


@dataclass(frozen=True)
class HybridModel:
    """Quadratic part plus weighted empty-group penalty (inequality mode)."""

    quadratic: QuboMatrix
    penalty: InequalityPenalty
    weights: PenaltyWeights

    @property
    def dimension(self) -> int:
        return self.quadratic.dimension

    @property
    def layout(self) -> VariableLayout:
        return self.penalty.layout

    def energy(self, bits) -> float:
        return self.quadratic.energy(bits) + self.weights.lambda2 * self.penalty.energy(bits)

    def make_engine(self, bits: np.ndarray):
        from .engines import HybridEngine

        return HybridEngine(self, bits)


@dataclass(frozen=True)
class PartitionModel:
    """Factored partition Hamiltonian over the (node, group) bit layout.

    Energy equals objective + lambda1*C1 + lambda2*C2 where the objective is
    minus the modularity quadratic form.  The adjacency part stays sparse and
    the degree product term is evaluated through per-group degree sums, so the
    model scales to instances where the dense blocks are unaffordable.
    """

    graph: Graph
    group_count: int
    gamma: float
    layout: VariableLayout
    lambda1: float
    lambda2: float

    @property
    def dimension(self) -> int:
        return self.layout.dimension

    def with_weights(self, weights: PenaltyWeights) -> "PartitionModel":
        return replace(self, lambda1=weights.lambda1, lambda2=weights.lambda2)

    def energy(self, bits) -> float:
        g, k = self.graph, self.group_count
        m = g.total_edge_weight
        x = np.asarray(bits, dtype=np.float64)
        node = x[: self.layout.node_block_size].reshape(g.node_count, k)
        intra = np.zeros(k)
        eu, ev = g.edges[:, 0], g.edges[:, 1]
        for c in range(k):
            intra[c] = float((g.weights * node[eu, c] * node[ev, c]).sum())
        t = g.degrees @ node
        objective = -float(intra.sum() / m - self.gamma * np.square(t / (2.0 * m)).sum())

        rows = node.sum(axis=1)
        c1 = float(np.square(rows - 1.0).sum())

        occ = node.sum(axis=0)
        if self.layout.mode == MODE_SLACK:
            slack = x[self.layout.node_block_size :].reshape(k, g.node_count)
            levels = np.arange(g.node_count, dtype=np.float64)
            sval = slack @ levels
            ucount = slack.sum(axis=1)
            c2 = float(np.square(occ - sval - 1.0).sum() + np.square(ucount - 1.0).sum())
        else:
            c2 = float((occ == 0).sum())
        return objective + self.lambda1 * c1 + self.lambda2 * c2

    def make_engine(self, bits: np.ndarray):
        from .engines import PartitionEngine

        return PartitionEngine(self, bits)


def assemble(objective, c1, c2, weights: PenaltyWeights):
    """Weighted sum H = objective + lambda1*C1 + lambda2*C2.

    Explicit inputs give an explicit result: a ``QuboMatrix`` when ``c2`` is
    quadratic (slack mode), a ``HybridModel`` when ``c2`` is the inequality
    evaluator.  A factored objective carries its own constraint bookkeeping,
    so ``c1``/``c2`` may be ``None`` and the result is a ``PartitionModel``
    with the requested weights.
    """
    if isinstance(objective, PartitionModel):
        for part in (c1, c2):
            if isinstance(part, QuboMatrix) and part.dimension != objective.dimension:
                raise DomainError("constraint dimension does not match objective")
        return objective.with_weights(weights)

    if isinstance(c2, InequalityPenalty):
        if c2.layout.node_block_size != objective.dimension:
            raise DomainError("penalty layout does not match objective dimension")
        quad = QuboMatrix(objective.dimension)
        quad.add_scaled(objective)
        quad.add_scaled(c1, weights.lambda1)
        quad.prune_zeros()
        return HybridModel(quad, c2, weights)

    merged = QuboMatrix(objective.dimension)
    merged.add_scaled(objective)
    merged.add_scaled(c1, weights.lambda1)
    merged.add_scaled(c2, weights.lambda2)
    merged.prune_zeros()
    return merged


class DecodeResult(NamedTuple):
    assignment: CommunityAssignment
    repaired_rows: int


def decode(bits, layout: VariableLayout, repair: bool = False) -> DecodeResult:
    """Read a community assignment out of the node-variable block.

    Strict mode raises on any row that is not exactly one-hot.  Repair mode
    assigns each violating row to its argmax entry (ties to the lowest group
    index) and counts the rows it touched.
    """
    x = np.asarray(bits)[: layout.node_block_size].reshape(layout.n, layout.group_count)
    row_sums = x.sum(axis=1)
    bad = np.flatnonzero(row_sums != 1)
    if bad.size and not repair:
        raise FeasibilityError(
            f"node {bad[0]} has {int(row_sums[bad[0]])} set group bits (expected 1)"
        )
    labels = np.argmax(x, axis=1).astype(np.int64)
    return DecodeResult(
        CommunityAssignment(labels, layout.group_count), int(bad.size)
    )


def encode_assignment(assignment: CommunityAssignment, layout: VariableLayout) -> np.ndarray:
    """One-hot bit vector for an assignment (inverse of strict decode).

    In slack mode the slack block of each group one-hot-encodes
    (group size - 1); empty groups fall back to level 0, which leaves the
    non-empty-group penalty visibly positive.
    """
    if assignment.labels.shape[0] != layout.n:
        raise DomainError("assignment length does not match layout")
    if assignment.group_count != layout.group_count:
        raise DomainError("assignment group count does not match layout")
    bits = np.zeros(layout.dimension, dtype=np.int8)
    for i, c in enumerate(assignment.labels):
        bits[layout.index(i, int(c))] = 1
    if layout.mode == MODE_SLACK:
        sizes = assignment.group_sizes()
        for c in range(layout.group_count):
            level = int(sizes[c]) - 1 if sizes[c] > 0 else 0
            bits[layout.slack_index(c, level)] = 1
    return bits


def default_penalty_weight(g: Graph, params: ModularityParams = ModularityParams()) -> float:
    """Auto penalty weight 2 * n * max|B_ij|.

    The off-diagonal non-edge and diagonal magnitudes are bounded through the
    two largest degrees, which can only overestimate; a violated constraint
    then always costs more than any modularity gain it could buy.
    """
    m = g.total_edge_weight
    if m <= 0:
        raise DomainError("penalty weight undefined for a graph with no edge weight")
    gamma = params.gamma
    inv2m = 1.0 / (2.0 * m)
    deg = g.degrees
    du = deg[g.edges[:, 0]]
    dv = deg[g.edges[:, 1]]
    edge_part = (
        float(np.abs(g.weights * inv2m - gamma * du * dv * inv2m * inv2m).max())
        if len(g.weights)
        else 0.0
    )
    top = np.sort(deg)[-2:] if g.node_count >= 2 else np.array([deg[0], deg[0]])
    pair_bound = gamma * float(top[0] * top[1]) * inv2m * inv2m
    diag_bound = gamma * float(top[-1] ** 2) * inv2m * inv2m
    return 2.0 * g.node_count * max(edge_part, pair_bound, diag_bound)
