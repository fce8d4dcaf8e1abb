"""Weighted undirected graphs and node partitions."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

logger = logging.getLogger(__name__)


class GraphError(ValueError):
    """Raised for malformed graph input."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable weighted undirected graph.

    The adjacency matrix is stored in "matrix form": a self-loop of weight
    ``w`` at node ``i`` is stored as ``A[i, i] = 2 w`` so that the strength
    ``k_i = sum_j A_ij`` counts it twice and ``sum_i k_i = 2m``.

    Attributes
    ----------
    adjacency : scipy.sparse.csr_matrix
        Symmetric ``(n, n)`` matrix, nonnegative.
    node_ids : numpy.ndarray
        Original node id for every dense index ``0..n-1``.
    """

    adjacency: sp.csr_matrix
    node_ids: np.ndarray
    strengths: np.ndarray = field(init=False)
    total_weight: float = field(init=False)
    loops: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        A = self.adjacency
        k = np.asarray(A.sum(axis=1)).ravel().astype(float)
        object.__setattr__(self, "strengths", k)
        object.__setattr__(self, "total_weight", float(k.sum()))
        object.__setattr__(self, "loops", A.diagonal().astype(float))

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def two_m(self) -> float:
        return self.total_weight

    @property
    def edges(self) -> list[tuple[int, int, float]]:
        """Undirected edges ``(u, v, w)`` with ``u <= v`` in dense ids."""
        upper = sp.triu(self.adjacency, format="coo")
        out = []
        for u, v, w in zip(upper.row, upper.col, upper.data):
            out.append((int(u), int(v), float(w / 2.0 if u == v else w)))
        out.sort()
        return out

    def neighbors(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Neighbor indices and weights of ``i`` (self-loop excluded)."""
        A = self.adjacency
        lo, hi = A.indptr[i], A.indptr[i + 1]
        idx = A.indices[lo:hi]
        w = A.data[lo:hi]
        keep = idx != i
        return idx[keep], w[keep]

    @property
    def neighbor_lists(self) -> list[tuple[list[int], list[float]]]:
        """Per-node ``(indices, weights)`` as Python lists, self-loops excluded."""
        cached = self.__dict__.get("_neighbor_lists")
        if cached is None:
            cached = []
            for i in range(self.n):
                idx, w = self.neighbors(i)
                cached.append((idx.tolist(), w.tolist()))
            object.__setattr__(self, "_neighbor_lists", cached)
        return cached

    def self_loop(self, i: int) -> float:
        """Matrix-form diagonal entry ``A_ii`` (twice the loop weight)."""
        return float(self.loops[i])

    def dense(self) -> np.ndarray:
        return self.adjacency.toarray()

    @classmethod
    def from_matrix(cls, A, node_ids: Sequence | None = None) -> "Graph":
        """Build from a matrix-form symmetric adjacency matrix."""
        A = sp.csr_matrix(A, dtype=float)
        if A.shape[0] != A.shape[1]:
            raise GraphError(f"adjacency must be square, got {A.shape}")
        if A.shape[0] < 1:
            raise GraphError("graph must have at least one node")
        if A.nnz and A.data.min() < 0:
            raise GraphError("negative edge weight")
        if A.nnz and not np.all(np.isfinite(A.data)):
            raise GraphError("non-finite edge weight")
        if abs(A - A.T).sum() > 1e-12 * max(1.0, abs(A).sum()):
            raise GraphError("adjacency must be symmetric")
        A.eliminate_zeros()
        A.sort_indices()
        if node_ids is None:
            node_ids = np.arange(A.shape[0])
        node_ids = np.asarray(node_ids)
        if len(node_ids) != A.shape[0]:
            raise GraphError("node_ids length does not match adjacency")
        return cls(A, node_ids)


def load_graph(
    edge_list: Iterable[Sequence], n_nodes: int | None = None
) -> Graph:
    """Build a graph from ``(u, v[, w])`` triples.

    Entries in either direction are summed into one undirected edge. With
    ``n_nodes`` the ids must lie in ``0..n_nodes-1`` and are kept as is;
    otherwise the distinct ids are densified in sorted order.
    """
    us, vs, ws = [], [], []
    for rec in edge_list:
        if len(rec) == 2:
            u, v = rec
            w = 1.0
        elif len(rec) == 3:
            u, v, w = rec
        else:
            raise GraphError(f"edge must be (u, v) or (u, v, w), got {rec!r}")
        u, v, w = int(u), int(v), float(w)
        if u < 0 or v < 0:
            raise GraphError(f"node ids must be nonnegative, got ({u}, {v})")
        if not math.isfinite(w):
            raise GraphError(f"non-finite weight on edge ({u}, {v})")
        if w < 0:
            raise GraphError(f"negative weight {w} on edge ({u}, {v})")
        us.append(u)
        vs.append(v)
        ws.append(w)

    if n_nodes is None:
        if not us:
            raise GraphError("empty edge list and no node count given")
        node_ids = np.unique(np.concatenate([us, vs]))
        rows = np.searchsorted(node_ids, us)
        cols = np.searchsorted(node_ids, vs)
        n = len(node_ids)
    else:
        n = int(n_nodes)
        if n < 1:
            raise GraphError("graph must have at least one node")
        if us and max(max(us), max(vs)) >= n:
            raise GraphError(f"node id out of range for n_nodes={n}")
        node_ids = np.arange(n)
        rows = np.asarray(us, dtype=int)
        cols = np.asarray(vs, dtype=int)

    w = np.asarray(ws, dtype=float)
    # u->v contributes w to both A_uv and A_vu; a loop contributes 2w to A_uu.
    A = sp.coo_matrix((w, (rows, cols)), shape=(n, n))
    A = (A + A.T).tocsr()
    A.sum_duplicates()
    A.eliminate_zeros()
    A.sort_indices()
    return Graph(A, node_ids)


def read_edge_list(path: str | Path, n_nodes: int | None = None) -> Graph:
    """Read whitespace/tab separated ``u v [w]`` lines; ``#`` starts a comment."""
    edges = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.replace(",", " ").split()
            if len(parts) not in (2, 3):
                raise GraphError(f"{path}:{lineno}: expected 'u v [w]'")
            try:
                u, v = int(parts[0]), int(parts[1])
                w = float(parts[2]) if len(parts) == 3 else 1.0
            except ValueError as exc:
                raise GraphError(f"{path}:{lineno}: {exc}") from None
            edges.append((u, v, w))
    return load_graph(edges, n_nodes=n_nodes)


def write_edge_list(g: Graph, path: str | Path) -> None:
    with open(path, "w") as fh:
        fh.write("# u v w\n")
        for u, v, w in g.edges:
            fh.write(f"{g.node_ids[u]} {g.node_ids[v]} {w!r}\n")
        # zero-weight loops keep isolated nodes in the id set on reread
        for u in np.flatnonzero(g.strengths == 0):
            fh.write(f"{g.node_ids[u]} {g.node_ids[u]} 0.0\n")


class Partition:
    """Node-to-community labeling with per-community bookkeeping.

    Label ids live in ``0..n-1`` so aggregates can be dense arrays indexed
    by label; ``compact`` renumbers them ``0..c-1``.
    """

    def __init__(self, g: Graph, labels: Sequence[int]):
        labels = np.asarray(labels, dtype=np.int64).copy()
        if labels.shape != (g.n,):
            raise ValueError(f"expected {g.n} labels, got shape {labels.shape}")
        if g.n and (labels.min() < 0 or labels.max() >= g.n):
            labels = np.unique(labels, return_inverse=True)[1].astype(np.int64)
        self.graph = g
        self.labels = labels
        self._recompute()

    def _recompute(self) -> None:
        g = self.graph
        self.strength = np.bincount(self.labels, weights=g.strengths, minlength=g.n).astype(float)
        self.size = np.bincount(self.labels, minlength=g.n)
        A = g.adjacency.tocoo()
        same = self.labels[A.row] == self.labels[A.col]
        self.internal = np.bincount(
            self.labels[A.row[same]], weights=A.data[same], minlength=g.n
        ).astype(float)  # bincount of empty weights is integer

    @property
    def n_communities(self) -> int:
        return int(np.count_nonzero(self.size))

    def community_weight_to(self, i: int) -> dict[int, float]:
        """Sum of ``A_ij`` (``j != i``) grouped by the label of ``j``."""
        idx, w = self.graph.neighbor_lists[i]
        labels = self.labels
        out: dict[int, float] = {}
        for j, wt in zip(idx, w):
            lab = int(labels[j])
            out[lab] = out.get(lab, 0.0) + wt
        return out

    def move(self, i: int, new_label: int, weight_to: dict[int, float] | None = None) -> None:
        old = int(self.labels[i])
        if new_label == old:
            return
        if weight_to is None:
            weight_to = self.community_weight_to(i)
        g = self.graph
        loop = g.self_loop(i)
        k = g.strengths[i]
        self.internal[old] -= 2.0 * weight_to.get(old, 0.0) + loop
        self.internal[new_label] += 2.0 * weight_to.get(new_label, 0.0) + loop
        self.strength[old] -= k
        self.strength[new_label] += k
        self.size[old] -= 1
        self.size[new_label] += 1
        self.labels[i] = new_label

    def merge(self, keep: int, drop: int) -> None:
        """Relabel community ``drop`` as ``keep``."""
        if keep == drop:
            return
        A = self.graph.adjacency
        members_keep = self.labels == keep
        members_drop = self.labels == drop
        between = A[members_keep][:, members_drop].sum()
        self.internal[keep] += self.internal[drop] + 2.0 * between
        self.internal[drop] = 0.0
        self.strength[keep] += self.strength[drop]
        self.strength[drop] = 0.0
        self.size[keep] += self.size[drop]
        self.size[drop] = 0
        self.labels[members_drop] = keep

    def free_label(self) -> int:
        empty = np.flatnonzero(self.size == 0)
        if not len(empty):
            raise ValueError("no free label: every node is a singleton")
        return int(empty[0])

    def compact(self) -> np.ndarray:
        """Labels renumbered ``0..c-1`` in order of first appearance."""
        _, first, inv = np.unique(self.labels, return_index=True, return_inverse=True)
        order = np.argsort(np.argsort(first))
        return order[inv].astype(np.int64)

    def check_aggregates(self, atol: float = 1e-9) -> bool:
        fresh = Partition(self.graph, self.labels)
        return (
            np.array_equal(fresh.size, self.size)
            and np.allclose(fresh.strength, self.strength, atol=atol)
            and np.allclose(fresh.internal, self.internal, atol=atol)
        )

    def copy(self) -> "Partition":
        other = Partition.__new__(Partition)
        other.graph = self.graph
        other.labels = self.labels.copy()
        other.strength = self.strength.copy()
        other.size = self.size.copy()
        other.internal = self.internal.copy()
        return other

    def __repr__(self) -> str:
        return f"Partition(n={self.graph.n}, c={self.n_communities})"


def singleton_partition(g: Graph) -> Partition:
    return Partition(g, np.arange(g.n))


def read_partition(path: str | Path, g: Graph | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Read a ``node,community`` CSV; returns ``(node_ids, labels)``.

    With ``g`` the labels are reordered to the graph's dense node order.
    """
    ids, labs = [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.replace("\t", ",").split(",")]
            if lineno == 1 and not parts[0].lstrip("-").isdigit():
                continue
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'node,community'")
            ids.append(int(parts[0]))
            labs.append(int(parts[1]))
    ids_arr = np.asarray(ids)
    labs_arr = np.asarray(labs)
    if g is not None:
        lookup = {int(v): k for k, v in enumerate(ids_arr)}
        try:
            order = [lookup[int(v)] for v in g.node_ids]
        except KeyError as exc:
            raise ValueError(f"{path}: node {exc.args[0]} missing from partition") from None
        return g.node_ids.copy(), labs_arr[order]
    return ids_arr, labs_arr


def write_partition(path: str | Path, node_ids: Sequence, labels: Sequence[int]) -> None:
    with open(path, "w") as fh:
        fh.write("node,community\n")
        for v, lab in zip(node_ids, labels):
            fh.write(f"{v},{int(lab)}\n")
