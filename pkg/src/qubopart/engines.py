"""Incremental flip-delta engines backing the annealer.

Every engine owns the live bit vector and caches whatever lets it produce the
energy change of any single-bit flip in O(1) (scalar) or all N of them in one
vectorized pass.  ``refresh()`` rebuilds the caches from the bits and is the
hook for bookkeeping audits.
"""

from __future__ import annotations

import numpy as np

from .qubo import MODE_SLACK

__all__ = ["QuboEngine", "HybridEngine", "PartitionEngine"]


class QuboEngine:
    """Local-field engine for an explicit ``QuboMatrix``.

    fields[a] = W_aa + sum_{b != a} W_ab x_b, so the flip delta of variable a
    is (1 - 2 x_a) * fields[a]; a flip updates the fields of its term
    neighbors only.
    """

    def __init__(self, model, bits: np.ndarray):
        self.model = model
        self.bits = bits
        self.indptr, self.nbr, self.nbw, self.diag = model.adjacency()
        self.fields = np.zeros(model.dimension)
        self.sign = np.zeros(model.dimension)
        self.refresh()

    def refresh(self) -> None:
        self.fields[:] = self.diag
        for b in np.flatnonzero(self.bits):
            lo, hi = self.indptr[b], self.indptr[b + 1]
            self.fields[self.nbr[lo:hi]] += self.nbw[lo:hi]
        np.subtract(1.0, 2.0 * self.bits, out=self.sign)

    def deltas(self, out: np.ndarray) -> np.ndarray:
        np.multiply(self.sign, self.fields, out=out)
        return out

    def delta(self, a: int) -> float:
        return float(self.sign[a] * self.fields[a])

    def apply(self, a: int) -> None:
        s = self.sign[a]
        lo, hi = self.indptr[a], self.indptr[a + 1]
        self.fields[self.nbr[lo:hi]] += s * self.nbw[lo:hi]
        self.bits[a] ^= 1
        self.sign[a] = -s


class HybridEngine:
    """Quadratic local fields plus group-occupancy counters (inequality mode)."""

    def __init__(self, model, bits: np.ndarray):
        self.model = model
        self.layout = model.layout
        self.lambda2 = model.weights.lambda2
        self.quad = QuboEngine(model.quadratic, bits)
        self.bits = bits
        self.occupancy = np.zeros(self.layout.group_count, dtype=np.int64)
        self._node_view = bits[: self.layout.node_block_size].reshape(
            self.layout.n, self.layout.group_count
        )
        self.refresh()

    def refresh(self) -> None:
        self.quad.refresh()
        self.occupancy[:] = self._node_view.sum(axis=0)

    def _penalty_deltas(self) -> np.ndarray:
        empty = self.occupancy == 0
        single = self.occupancy == 1
        off = self._node_view == 0
        # turning a bit on fills an empty group (delta -1); turning the last
        # bit of a group off re-empties it (delta +1)
        pen = np.where(off, -(empty[None, :]).astype(float), single[None, :].astype(float))
        return pen.reshape(-1)

    def deltas(self, out: np.ndarray) -> np.ndarray:
        self.quad.deltas(out)
        out += self.lambda2 * self._penalty_deltas()
        return out

    def delta(self, a: int) -> float:
        k = a % self.layout.group_count
        if self.bits[a]:
            pen = 1.0 if self.occupancy[k] == 1 else 0.0
        else:
            pen = -1.0 if self.occupancy[k] == 0 else 0.0
        return self.quad.delta(a) + self.lambda2 * pen

    def apply(self, a: int) -> None:
        k = a % self.layout.group_count
        self.occupancy[k] += 1 if not self.bits[a] else -1
        self.quad.apply(a)


class PartitionEngine:
    """Aggregate-counter engine for the factored ``PartitionModel``.

    Caches, per node variable (i, k): alpha[i,k] = sum_j A_ij x_jk.  Per
    group: the degree sum t_k, occupancy o_k and (slack mode) the slack value
    and slack count.  Per node: the row sum r_i.  All flip deltas follow from
    these in closed form.
    """

    def __init__(self, model, bits: np.ndarray):
        self.model = model
        g = model.graph
        self.graph = g
        self.layout = model.layout
        self.k = model.group_count
        self.n = g.node_count
        self.gamma = model.gamma
        self.lambda1 = model.lambda1
        self.lambda2 = model.lambda2
        self.m = g.total_edge_weight
        self.bits = bits
        self.node_view = bits[: self.layout.node_block_size].reshape(self.n, self.k)
        self.slack_view = (
            bits[self.layout.node_block_size :].reshape(self.k, self.n)
            if self.layout.mode == MODE_SLACK
            else None
        )
        self.alpha = np.zeros((self.n, self.k))
        self.t = np.zeros(self.k)
        self.r = np.zeros(self.n)
        self.occupancy = np.zeros(self.k, dtype=np.int64)
        self.slack_value = np.zeros(self.k)
        self.slack_count = np.zeros(self.k, dtype=np.int64)
        self.levels = np.arange(self.n, dtype=np.float64)
        self._deg_col = g.degrees[:, None]
        self._diag = self.gamma * np.square(g.degrees) / (4.0 * self.m * self.m)
        self.refresh()

    def refresh(self) -> None:
        g, node = self.graph, self.node_view
        self.alpha[:] = 0.0
        x = node.astype(np.float64)
        for (u, v), w in zip(g.edges, g.weights):
            self.alpha[u] += w * x[v]
            self.alpha[v] += w * x[u]
        self.t[:] = g.degrees @ x
        self.r[:] = node.sum(axis=1)
        self.occupancy[:] = node.sum(axis=0)
        if self.slack_view is not None:
            y = self.slack_view.astype(np.float64)
            self.slack_value[:] = y @ self.levels
            self.slack_count[:] = self.slack_view.sum(axis=1)

    def _node_deltas(self) -> np.ndarray:
        b = self.node_view
        sign = 1.0 - 2.0 * b
        gm = self.gamma / (2.0 * self.m * self.m)
        field = (
            self._diag[:, None]
            - self.alpha / self.m
            + gm * self._deg_col * (self.t[None, :] - self._deg_col * b)
        )
        d = sign * field
        d += self.lambda1 * (1.0 + 2.0 * sign * (self.r[:, None] - 1.0))
        if self.layout.mode == MODE_SLACK:
            z = (self.occupancy - self.slack_value - 1.0)[None, :]
            d += self.lambda2 * (1.0 + 2.0 * sign * z)
        else:
            empty = self.occupancy == 0
            single = self.occupancy == 1
            d += self.lambda2 * np.where(
                b == 0, -(empty[None, :]).astype(float), single[None, :].astype(float)
            )
        return d.reshape(-1)

    def _slack_deltas(self) -> np.ndarray:
        y = self.slack_view
        eps = 1.0 - 2.0 * y
        z = (self.occupancy - self.slack_value - 1.0)[:, None]
        lv = self.levels[None, :]
        d = lv * lv - 2.0 * eps * lv * z + 1.0 + 2.0 * eps * (self.slack_count - 1.0)[:, None]
        return (self.lambda2 * d).reshape(-1)

    def deltas(self, out: np.ndarray) -> np.ndarray:
        nb = self.layout.node_block_size
        out[:nb] = self._node_deltas()
        if self.slack_view is not None:
            out[nb:] = self._slack_deltas()
        return out

    def delta(self, a: int) -> float:
        nb = self.layout.node_block_size
        if a < nb:
            i, k = divmod(a, self.k)
            b = float(self.bits[a])
            sign = 1.0 - 2.0 * b
            ki = float(self.graph.degrees[i])
            gm = self.gamma / (2.0 * self.m * self.m)
            field = (
                self._diag[i]
                - self.alpha[i, k] / self.m
                + gm * ki * (self.t[k] - ki * b)
            )
            d = sign * field + self.lambda1 * (1.0 + 2.0 * sign * (self.r[i] - 1.0))
            if self.layout.mode == MODE_SLACK:
                z = self.occupancy[k] - self.slack_value[k] - 1.0
                d += self.lambda2 * (1.0 + 2.0 * sign * z)
            else:
                if b == 0.0:
                    pen = -1.0 if self.occupancy[k] == 0 else 0.0
                else:
                    pen = 1.0 if self.occupancy[k] == 1 else 0.0
                d += self.lambda2 * pen
            return float(d)
        k, lvl = divmod(a - nb, self.n)
        eps = 1.0 - 2.0 * float(self.bits[a])
        z = self.occupancy[k] - self.slack_value[k] - 1.0
        d = lvl * lvl - 2.0 * eps * lvl * z + 1.0 + 2.0 * eps * (self.slack_count[k] - 1.0)
        return float(self.lambda2 * d)

    def apply(self, a: int) -> None:
        nb = self.layout.node_block_size
        if a < nb:
            i, k = divmod(a, self.k)
            s = 1.0 if not self.bits[a] else -1.0
            nbr, nbw = self.graph.neighborhood(i)
            self.alpha[nbr, k] += s * nbw
            self.t[k] += s * self.graph.degrees[i]
            self.r[i] += s
            self.occupancy[k] += int(s)
        else:
            k, lvl = divmod(a - nb, self.n)
            s = 1.0 if not self.bits[a] else -1.0
            self.slack_value[k] += s * lvl
            self.slack_count[k] += int(s)
        self.bits[a] ^= 1
