"""Modularity evaluation and incremental node-move bookkeeping."""

from __future__ import annotations

import numpy as np

from .graph import Graph, Partition
from .nullmodels import NGModel, NullModel


def _labels_of(part) -> np.ndarray:
    return part.labels if isinstance(part, Partition) else np.asarray(part, dtype=np.int64)


def modularity(g: Graph, model: NullModel, part) -> float:
    """``Q = (1/2m) sum_ij (A_ij - P_ij) delta(l_i, l_j)`` over all ordered pairs.

    ``part`` may be a :class:`Partition` or a plain label sequence.
    """
    labels = _labels_of(part)
    if labels.shape != (g.n,):
        raise ValueError(f"expected {g.n} labels, got shape {labels.shape}")
    _, labels = np.unique(labels, return_inverse=True)
    A = g.adjacency.tocoo()
    same = labels[A.row] == labels[A.col]
    observed = float(A.data[same].sum())
    c = int(labels.max()) + 1
    expected = float(np.trace(model.block_sums(labels, c)))
    return (observed - expected) / g.two_m


class CommunityAggregates:
    """Expected weight from every node into every community.

    ``pbar(i, ls)`` returns ``sum_{j != i, l_j = l} P_ij`` for the labels
    ``ls``. Three storage strategies:

    * ``"strength"`` (NG model): community strength sums, O(1) per entry;
    * ``"dense"``: an explicit ``(labels, n)`` table updated in O(n) per move;
    * ``"lazy"``: recomputed from the model row on each query.
    """

    def __init__(self, g: Graph, model: NullModel, part: Partition):
        if model.n != g.n:
            raise ValueError("model and graph disagree on node count")
        self.graph = g
        self.model = model
        self.part = part
        self.diag = model.diagonal()
        if isinstance(model, NGModel):
            self.mode = "strength"
            self._table = None
        elif model.is_dense:
            self.mode = "dense"
            self._table = self._fresh_table()
        else:
            self.mode = "lazy"
            self._table = None

    def _fresh_table(self) -> np.ndarray:
        labels = self.part.labels
        table = np.zeros((self.graph.n, self.graph.n))
        np.add.at(table, labels, self.model.matrix())
        return table

    def pbar(self, i: int, ls: np.ndarray) -> np.ndarray:
        ls = np.asarray(ls)
        own = ls == self.part.labels[i]
        if self.mode == "strength":
            k = self.model.k
            totals = self.part.strength[ls]
            return k[i] * (totals - k[i] * own) / self.model.two_m
        if self.mode == "dense":
            totals = self._table[ls, i]
        else:
            row = self.model.row(i)
            totals = np.bincount(self.part.labels, weights=row, minlength=self.graph.n)[ls]
        return totals - self.diag[i] * own

    def move(self, i: int, old: int, new: int) -> None:
        if self.mode == "dense":
            row = self.model.row(i)
            self._table[old] -= row
            self._table[new] += row

    def merge(self, keep: int, drop: int) -> None:
        if self.mode == "dense":
            self._table[keep] += self._table[drop]
            self._table[drop] = 0.0

    def block_sums(self) -> np.ndarray:
        """``(n, n)`` label-indexed block sums of ``P`` (diagonal blocks included)."""
        labels = self.part.labels
        if self.mode == "dense":
            out = np.zeros((self.graph.n, self.graph.n))
            np.add.at(out.T, labels, self._table.T)
            return out
        return self.model.block_sums(labels, self.graph.n)

    def check(self, atol: float = 1e-9) -> bool:
        """Compare against a from-scratch recomputation."""
        if self.mode != "dense":
            return self.part.check_aggregates(atol)
        return np.allclose(self._table, self._fresh_table(), atol=atol, rtol=0) and \
            self.part.check_aggregates(atol)


def move_gain(g: Graph, part: Partition, aggs: CommunityAggregates, i: int, new_label: int) -> float:
    """Change in ``2m * Q`` if node ``i`` is moved to ``new_label``."""
    old = int(part.labels[i])
    if new_label == old:
        return 0.0
    a = part.community_weight_to(i)
    p_old, p_new = aggs.pbar(i, np.array([old, new_label]))
    return 2.0 * ((a.get(new_label, 0.0) - p_new) - (a.get(old, 0.0) - p_old))


def best_move(g: Graph, model: NullModel, part: Partition, aggs: CommunityAggregates, i: int) -> tuple[int, float]:
    """Best label for ``i`` among its own and its neighbours' labels.

    Returns ``(label, gain)`` with ``gain`` the increase of ``2m * Q``.
    Ties keep the current label, otherwise the smallest label wins.
    """
    label, gain, _ = _best_move(g, part, aggs, i)
    return label, gain


def _best_move(g, part, aggs, i):
    cur = int(part.labels[i])
    weight_to = part.community_weight_to(i)
    if not weight_to:
        return cur, 0.0, None
    weight_to.setdefault(cur, 0.0)
    labs = sorted(weight_to)
    crit = np.fromiter((weight_to[l] for l in labs), float, len(labs)) - aggs.pbar(i, labs)
    here = crit[labs.index(cur)]
    best = crit.max()
    tol = 1e-12 * (1.0 + g.strengths[i])
    if best <= here + tol:
        return cur, 0.0, None
    j = int(np.flatnonzero(crit >= best - tol)[0])
    return labs[j], 2.0 * float(crit[j] - here), weight_to


def apply_move(part: Partition, aggs: CommunityAggregates, i: int, new_label: int, weight_to=None) -> None:
    """Move node ``i`` to ``new_label`` and update all aggregates."""
    old = int(part.labels[i])
    if new_label == old:
        return
    if not 0 <= new_label < part.graph.n:
        raise ValueError(f"label {new_label} out of range")
    aggs.move(i, old, new_label)
    part.move(i, new_label, weight_to)


def merge_communities(part: Partition, aggs: CommunityAggregates, keep: int, drop: int) -> None:
    aggs.merge(keep, drop)
    part.merge(keep, drop)
