"""Sparse quadratic forms over binary variables and the Ising conversion.

A ``QuboMatrix`` stores an upper-triangular coefficient map plus a constant
offset; energy(x) = sum_{a<=b} terms[a,b] * x_a * x_b + constant over
x in {0,1}^N.  Diagonal entries (a, a) act as linear coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import IO, Iterable, Mapping

import numpy as np

from .errors import DomainError, ParseError

__all__ = ["QuboMatrix", "VariableLayout", "PenaltyWeights", "ising_to_qubo"]

MODE_INEQUALITY = "inequality"
MODE_SLACK = "slack"


@dataclass(frozen=True)
class VariableLayout:
    """Index bijection between (node, group) pairs and flat bit positions.

    Node variable (i, k) sits at i*K + k.  In slack mode, the one-hot bits
    of the per-group slack integer occupy n*K + k*n + d for level d.
    """

    n: int
    group_count: int
    mode: str = MODE_INEQUALITY

    def __post_init__(self):
        if self.n < 1 or self.group_count < 1:
            raise DomainError("layout requires n >= 1 and group_count >= 1")
        if self.mode not in (MODE_INEQUALITY, MODE_SLACK):
            raise DomainError(f"unknown layout mode {self.mode!r}")

    def index(self, node: int, group: int) -> int:
        return node * self.group_count + group

    def slack_index(self, group: int, level: int) -> int:
        if self.mode != MODE_SLACK:
            raise DomainError("slack variables exist only in slack mode")
        return self.node_block_size + group * self.n + level

    @property
    def node_block_size(self) -> int:
        return self.n * self.group_count

    @property
    def dimension(self) -> int:
        if self.mode == MODE_SLACK:
            return self.node_block_size + self.group_count * self.n
        return self.node_block_size


@dataclass(frozen=True)
class PenaltyWeights:
    """Multipliers for the one-group-per-node and non-empty-group penalties."""

    lambda1: float
    lambda2: float

    def __post_init__(self):
        for name, value in (("lambda1", self.lambda1), ("lambda2", self.lambda2)):
            if not (math.isfinite(value) and value >= 0):
                raise DomainError(f"{name} must be finite and >= 0, got {value}")


class QuboMatrix:
    """Sparse symmetric quadratic form stored upper-triangular."""

    def __init__(
        self,
        dimension: int,
        terms: Mapping[tuple[int, int], float] | None = None,
        constant: float = 0.0,
    ):
        if dimension < 0:
            raise DomainError("dimension must be non-negative")
        self.dimension = int(dimension)
        self.constant = float(constant)
        self.terms: dict[tuple[int, int], float] = {}
        if terms:
            for (a, b), coeff in terms.items():
                self.add_term(a, b, coeff)
        self._adjacency = None

    def add_term(self, a: int, b: int, coeff: float) -> None:
        """Accumulate a coefficient onto the (min(a,b), max(a,b)) pair."""
        if not (0 <= a < self.dimension and 0 <= b < self.dimension):
            raise DomainError(f"term ({a},{b}) outside dimension {self.dimension}")
        if a > b:
            a, b = b, a
        key = (a, b)
        self.terms[key] = self.terms.get(key, 0.0) + float(coeff)
        self._adjacency = None

    def add_scaled(self, other: "QuboMatrix", scale: float = 1.0) -> None:
        if other.dimension != self.dimension:
            raise DomainError(
                f"dimension mismatch: {self.dimension} vs {other.dimension}"
            )
        for (a, b), coeff in other.terms.items():
            self.add_term(a, b, scale * coeff)
        self.constant += scale * other.constant

    def prune_zeros(self) -> None:
        """Drop explicitly stored zero coefficients."""
        self.terms = {k: v for k, v in self.terms.items() if v != 0.0}
        self._adjacency = None

    def energy(self, bits) -> float:
        """Full recomputation; the ground-truth oracle for incremental deltas."""
        x = np.asarray(bits)
        if x.shape[0] != self.dimension:
            raise DomainError(
                f"bit vector length {x.shape[0]} != dimension {self.dimension}"
            )
        total = self.constant
        for (a, b), coeff in self.terms.items():
            if x[a] and x[b]:
                total += coeff
        return float(total)

    def to_dense(self) -> np.ndarray:
        """Upper-triangular dense array; energy = x @ W @ x + constant."""
        w = np.zeros((self.dimension, self.dimension))
        for (a, b), coeff in self.terms.items():
            w[a, b] = coeff
        return w

    def adjacency(self):
        """CSR neighbor structure (indptr, neighbor index, coeff) plus diagonal.

        Used for O(degree) local-field updates after a flip; cached until the
        term map changes.
        """
        if self._adjacency is None:
            n = self.dimension
            diag = np.zeros(n)
            counts = np.zeros(n, dtype=np.int64)
            for (a, b), coeff in self.terms.items():
                if a == b:
                    diag[a] = coeff
                else:
                    counts[a] += 1
                    counts[b] += 1
            indptr = np.zeros(n + 1, dtype=np.int64)
            np.cumsum(counts, out=indptr[1:])
            nbr = np.zeros(indptr[-1], dtype=np.int64)
            nbw = np.zeros(indptr[-1])
            cursor = indptr[:-1].copy()
            for (a, b), coeff in self.terms.items():
                if a == b:
                    continue
                nbr[cursor[a]] = b
                nbw[cursor[a]] = coeff
                cursor[a] += 1
                nbr[cursor[b]] = a
                nbw[cursor[b]] = coeff
                cursor[b] += 1
            self._adjacency = (indptr, nbr, nbw, diag)
        return self._adjacency

    def make_engine(self, bits: np.ndarray):
        from .engines import QuboEngine

        return QuboEngine(self, bits)

    def export_text(self, fh: IO[str]) -> None:
        """Write "N constant" header then one "a b coeff" line per term."""
        fh.write(f"{self.dimension} {self.constant!r}\n")
        for (a, b) in sorted(self.terms):
            fh.write(f"{a} {b} {self.terms[(a, b)]!r}\n")

    @classmethod
    def parse_text(cls, fh: IO[str]) -> "QuboMatrix":
        header = fh.readline().split()
        if len(header) != 2:
            raise ParseError("expected header 'N constant'")
        model = cls(int(header[0]), constant=float(header[1]))
        for lineno, line in enumerate(fh, start=2):
            cols = line.split()
            if not cols:
                continue
            if len(cols) != 3:
                raise ParseError(f"line {lineno}: expected 'a b coeff'")
            model.add_term(int(cols[0]), int(cols[1]), float(cols[2]))
        return model

    def __repr__(self):
        return (
            f"QuboMatrix(dimension={self.dimension}, terms={len(self.terms)}, "
            f"constant={self.constant:g})"
        )


def ising_to_qubo(
    couplings: Mapping[tuple[int, int], float],
    fields: Iterable[float],
) -> QuboMatrix:
    """Convert spin interactions E(s) = -sum J_ij s_i s_j - sum h_i s_i to QUBO.

    Each unordered pair appears once in ``couplings``; the diagonal is
    forbidden.  Under b = (s+1)/2 the returned model satisfies
    energy(b) == E(s) for every spin configuration.
    """
    h = np.asarray(list(fields), dtype=np.float64)
    n = h.shape[0]
    model = QuboMatrix(n)
    constant = 0.0
    seen: set[tuple[int, int]] = set()
    for (i, j), coupling in couplings.items():
        if i == j:
            raise DomainError(f"coupling ({i},{j}) on the diagonal is not allowed")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise DomainError(f"coupling ({i},{j}) specified twice")
        seen.add(key)
        # -J*s_i*s_j = -4J*b_i*b_j + 2J*b_i + 2J*b_j - J
        model.add_term(key[0], key[1], -4.0 * coupling)
        model.add_term(key[0], key[0], 2.0 * coupling)
        model.add_term(key[1], key[1], 2.0 * coupling)
        constant -= coupling
    for i in range(n):
        # -h*s_i = -2h*b_i + h
        if h[i]:
            model.add_term(i, i, -2.0 * h[i])
        constant += h[i]
    model.constant = constant
    model.prune_zeros()
    return model
