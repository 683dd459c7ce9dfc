"""Pipeline orchestration: graph -> model -> anneal -> decode -> validate.

The reported modularity is always recomputed from the final assignment with
the graph-level evaluator; the solver's energy is treated as internal (a
penalty residue could contaminate it).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .annealer import SolverConfig, anneal
from .encode import (
    PartitionModel,
    assemble,
    build_assignment_constraint,
    build_modularity_objective,
    build_nonempty_constraint,
    decode,
    default_penalty_weight,
)
from .errors import DomainError
from .graph import CommunityAssignment, Graph, ModularityParams, modularity, move_gain
from .qubo import MODE_INEQUALITY, PenaltyWeights, VariableLayout

__all__ = [
    "PartitionConfig",
    "PartitionResult",
    "SweepReport",
    "SweepRow",
    "partition",
    "sweep_k",
    "time_study",
    "brute_force_best",
    "repair",
    "oracle_suite",
]

BRUTE_FORCE_GUARD = 10**7


@dataclass(frozen=True)
class PartitionConfig:
    """Model-building and solver knobs for one partitioning run."""

    mode: str = MODE_INEQUALITY
    lambda1: float | str = "auto"
    lambda2: float | str = "auto"
    gamma: float = 1.0
    dense_term_limit: int = 200_000
    solver: SolverConfig = field(default_factory=SolverConfig)


@dataclass(frozen=True)
class PartitionResult:
    """Final assignment with honest feasibility and solver statistics."""

    assignment: CommunityAssignment
    modularity: float
    feasible: bool
    repaired_rows: int
    empty_groups: int
    solve_time: float
    time_limit_sec: float
    best_energy: float
    lambda_used: PenaltyWeights
    seed: int
    sweeps: int
    accepted_flips: int
    mode: str


@dataclass(frozen=True)
class SweepRow:
    k: int
    q: float | None
    feasible: bool
    solve_time: float
    seed: int
    error: str | None = None


@dataclass(frozen=True)
class SweepReport:
    rows: list[SweepRow]
    graph_name: str
    config_snapshot: dict


def resolve_weights(g: Graph, config: PartitionConfig) -> PenaltyWeights:
    params = ModularityParams(config.gamma)
    auto = default_penalty_weight(g, params)
    lam1 = auto if config.lambda1 == "auto" else float(config.lambda1)
    lam2 = auto if config.lambda2 == "auto" else float(config.lambda2)
    return PenaltyWeights(lam1, lam2)


def build_model(g: Graph, group_count: int, config: PartitionConfig):
    """Assemble the Hamiltonian for a graph at the configured size/mode."""
    layout = VariableLayout(g.node_count, group_count, config.mode)
    params = ModularityParams(config.gamma)
    weights = resolve_weights(g, config)
    objective = build_modularity_objective(
        g, group_count, params, layout, config.dense_term_limit
    )
    if isinstance(objective, PartitionModel):
        return assemble(objective, None, None, weights), layout, weights
    c1 = build_assignment_constraint(layout)
    c2 = build_nonempty_constraint(layout)
    return assemble(objective, c1, c2, weights), layout, weights


def partition(g: Graph, group_count: int, config: PartitionConfig | None = None) -> PartitionResult:
    """Partition ``g`` into ``group_count`` communities maximizing modularity."""
    config = config or PartitionConfig()
    if not (1 <= group_count <= g.node_count):
        raise DomainError(
            f"group_count {group_count} outside [1, {g.node_count}] "
            "(cannot have that many non-empty groups)"
        )
    model, layout, weights = build_model(g, group_count, config)
    outcome = anneal(model, config.solver)
    decoded = decode(outcome.best_bits, layout, repair=True)
    assignment = decoded.assignment
    empty = int((assignment.group_sizes() == 0).sum())
    if empty:
        assignment = repair(g, assignment, group_count, gamma=config.gamma)
    params = ModularityParams(config.gamma)
    q = modularity(g, assignment, params)
    feasible = bool((assignment.group_sizes() > 0).all())
    return PartitionResult(
        assignment=assignment,
        modularity=q,
        feasible=feasible,
        repaired_rows=decoded.repaired_rows,
        empty_groups=empty,
        solve_time=outcome.solve_time,
        time_limit_sec=config.solver.time_limit_sec,
        best_energy=outcome.best_energy,
        lambda_used=weights,
        seed=config.solver.seed,
        sweeps=outcome.sweeps,
        accepted_flips=outcome.accepted_flips,
        mode=config.mode,
    )


def sweep_k(
    g: Graph,
    k_range: Iterable[int],
    config: PartitionConfig | None = None,
    graph_name: str = "",
) -> SweepReport:
    """One partition per K with seed derived as base seed + K.

    Per-K failures land in the row's ``error`` field without aborting the
    sweep.
    """
    config = config or PartitionConfig()
    base_seed = config.solver.seed
    rows = []
    for k in sorted(set(int(k) for k in k_range)):
        seed = base_seed + k
        cfg = replace(config, solver=replace(config.solver, seed=seed))
        try:
            res = partition(g, k, cfg)
            rows.append(
                SweepRow(k, res.modularity, res.feasible, res.solve_time, seed)
            )
        except Exception as exc:  # noqa: BLE001 - row-level error reporting
            rows.append(SweepRow(k, None, False, 0.0, seed, error=str(exc)))
    snapshot = asdict(replace(config, solver=replace(config.solver, initial_bits=None)))
    return SweepReport(rows=rows, graph_name=graph_name, config_snapshot=snapshot)


def time_study(
    g: Graph,
    group_count: int,
    budgets: Sequence[float],
    config: PartitionConfig | None = None,
) -> list[tuple[float, float, float]]:
    """Independent runs per time budget; every run reuses the base seed.

    Returns (time_limit_sec, solve_time, modularity) per budget.
    """
    config = config or PartitionConfig()
    if not budgets:
        raise DomainError("budgets must be non-empty")
    if any(b <= 0 for b in budgets):
        raise DomainError("budgets must be positive")
    out = []
    for budget in budgets:
        cfg = replace(config, solver=replace(config.solver, time_limit_sec=float(budget)))
        res = partition(g, group_count, cfg)
        out.append((float(budget), res.solve_time, res.modularity))
    return out


def _canonical_assignments(n: int, k: int):
    """Yield restricted-growth strings over n items with exactly k labels.

    Lexicographic order; each set partition appears once in its canonical
    labeling (labels numbered by first appearance).
    """
    labels = np.zeros(n, dtype=np.int64)

    def rec(pos: int, used: int):
        if pos == n:
            if used == k:
                yield labels.copy()
            return
        # pruning: remaining positions must reach k labels
        if used + (n - pos) < k:
            return
        for c in range(min(used + 1, k)):
            labels[pos] = c
            yield from rec(pos + 1, max(used, c + 1))

    yield from rec(1, 1)  # node 0 is always label 0


def brute_force_best(
    g: Graph, group_count: int, params: ModularityParams = ModularityParams()
) -> tuple[CommunityAssignment, float]:
    """Exact maximum-modularity assignment over surjective labelings.

    Ties break to the lexicographically smallest canonical labeling.  Refuses
    instances where K^n exceeds the enumeration guard.
    """
    n = g.node_count
    if not (1 <= group_count <= n):
        raise DomainError(f"group_count {group_count} outside [1, {n}]")
    if group_count == 1:
        a = CommunityAssignment(np.zeros(n, dtype=np.int64), 1)
        return a, modularity(g, a, params)
    size = group_count**n
    if size > BRUTE_FORCE_GUARD:
        raise DomainError(
            f"enumeration of {group_count}^{n} = {size} assignments exceeds guard "
            f"{BRUTE_FORCE_GUARD}"
        )
    best_q = -math.inf
    best = None
    for labels in _canonical_assignments(n, group_count):
        a = CommunityAssignment(labels, group_count)
        q = modularity(g, a, params)
        if q > best_q + 1e-15:
            best_q = q
            best = a
    return best, best_q


def repair(
    g: Graph, assignment: CommunityAssignment, group_count: int, gamma: float = 1.0
) -> CommunityAssignment:
    """Fill empty groups greedily: per empty group, move the node whose
    relocation maximizes modularity, never emptying a singleton group."""
    n = g.node_count
    if group_count > n:
        raise DomainError(f"cannot make {group_count} non-empty groups from {n} nodes")
    if assignment.group_count != group_count:
        assignment = CommunityAssignment(assignment.labels, group_count)
    labels = assignment.labels.copy()
    sizes = np.bincount(labels, minlength=group_count)
    group_degree = np.bincount(labels, weights=g.degrees, minlength=group_count)
    while True:
        empties = np.flatnonzero(sizes == 0)
        if empties.size == 0:
            break
        target = int(empties[0])
        best_gain = -math.inf
        best_node = -1
        for node in range(n):
            if sizes[labels[node]] < 2:
                continue
            gain = move_gain(g, labels, group_degree, node, target, gamma)
            if gain > best_gain + 1e-15:
                best_gain = gain
                best_node = node
        if best_node < 0:
            raise DomainError("repair found no movable node (all groups singleton)")
        src = labels[best_node]
        labels[best_node] = target
        sizes[src] -= 1
        sizes[target] += 1
        group_degree[src] -= g.degrees[best_node]
        group_degree[target] += g.degrees[best_node]
    return CommunityAssignment(labels, group_count)


def random_connected_graph(n: int, edge_prob: float, rng: np.random.Generator) -> Graph:
    """Erdos-Renyi graph, resampled until connected (unit weights)."""
    while True:
        triples = [
            (i, j, 1.0)
            for i in range(n)
            for j in range(i + 1, n)
            if rng.random() < edge_prob
        ]
        if not triples:
            continue
        g = Graph.from_edges(n, triples)
        # BFS connectivity
        seen = np.zeros(n, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            u = stack.pop()
            nbr, _ = g.neighborhood(u)
            for v in nbr:
                if not seen[v]:
                    seen[v] = True
                    stack.append(int(v))
        if seen.all():
            return g


def oracle_suite(
    cases: int = 20,
    seed: int = 0,
    time_limit_sec: float = 2.0,
    mode: str = MODE_INEQUALITY,
) -> list[dict]:
    """Solver-vs-brute-force equivalence suite on small random graphs.

    Each case draws a connected graph with n in [5, 8], edge probability 0.5
    and K in {2, 3}; the solver's modularity must match the exact surjective
    maximum.
    """
    rng = np.random.Generator(np.random.Philox(key=seed))
    results = []
    for case in range(cases):
        n = int(rng.integers(5, 9))
        k = int(rng.integers(2, 4))
        g = random_connected_graph(n, 0.5, rng)
        _, q_exact = brute_force_best(g, k)
        cfg = PartitionConfig(
            mode=mode,
            solver=SolverConfig(time_limit_sec=time_limit_sec, seed=seed + case),
        )
        res = partition(g, k, cfg)
        results.append(
            {
                "case": case,
                "n": n,
                "k": k,
                "q_solver": res.modularity,
                "q_exact": q_exact,
                "match": bool(abs(res.modularity - q_exact) <= 1e-10),
            }
        )
    return results
