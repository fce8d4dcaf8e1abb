"""Modularity maximisation: LPAm+, Louvain, and exhaustive enumeration."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .graph import Graph, Partition, singleton_partition
from .engine import (
    CommunityAggregates,
    _best_move,
    apply_move,
    merge_communities,
    modularity,
)
from .nullmodels import BlockModel, NGModel, NullModel, NullModelError, indicator

logger = logging.getLogger(__name__)

ALGORITHMS = ("lpam-plus", "louvain")
ALGORITHM_ALIASES = {"lpamplus": "lpam-plus", "lpam+": "lpam-plus"}


@dataclass(frozen=True)
class OptimizerConfig:
    algorithm: str = "lpam-plus"
    seed: int = 0
    max_sweeps: int = 100
    min_gain: float = 1e-10

    def __post_init__(self) -> None:
        algo = ALGORITHM_ALIASES.get(self.algorithm, self.algorithm)
        if algo not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        object.__setattr__(self, "algorithm", algo)
        if int(self.max_sweeps) < 1:
            raise ValueError("max_sweeps must be >= 1")
        if not self.min_gain > 0:
            raise ValueError("min_gain must be > 0")


@dataclass
class OptimizeResult:
    partition: Partition
    labels: np.ndarray
    q: float
    sweeps: int


def _propagate(g, part, aggs, rng, cfg, trace=None) -> tuple[int, float]:
    """Sequential best-move sweeps until a sweep gains less than ``min_gain``."""
    sweeps = 0
    total = 0.0
    n = g.n
    for _ in range(cfg.max_sweeps):
        sweeps += 1
        gained = 0.0
        for i in rng.permutation(n):
            label, gain, weight_to = _best_move(g, part, aggs, int(i))
            if gain > 0.0:
                apply_move(part, aggs, int(i), label, weight_to)
                gained += gain
                if trace is not None:
                    trace.append(gain / g.two_m)
        total += gained
        if gained / g.two_m < cfg.min_gain:
            break
    return sweeps, total


def _best_merge(g: Graph, part: Partition, aggs: CommunityAggregates, min_gain: float):
    """Best positive merge among pairs of communities joined by an edge."""
    labels = part.labels
    active = np.flatnonzero(part.size > 0)
    if len(active) < 2:
        return None
    S = indicator(labels, g.n)[:, active]
    EA = (S.T @ g.adjacency @ S).toarray()
    EP = aggs.block_sums()[np.ix_(active, active)]
    gain = 2.0 * (EA - EP)
    connected = EA > 0
    np.fill_diagonal(connected, False)
    if not connected.any():
        return None
    gain = np.where(connected, gain, -np.inf)
    a, b = np.unravel_index(np.argmax(gain), gain.shape)
    if gain[a, b] / g.two_m <= min_gain:
        return None
    keep, drop = sorted((int(active[a]), int(active[b])))
    return keep, drop, float(gain[a, b])


def lpam_plus(g: Graph, model: NullModel, cfg: OptimizerConfig, trace=None) -> OptimizeResult:
    """Label propagation on the modularity gain, alternated with greedy merges.

    Starting from singletons, nodes adopt the best neighbouring label until
    a sweep stalls; then the best positive merge of two connected
    communities is applied and propagation resumes. Stops when no merge
    improves ``Q``.
    """
    rng = np.random.default_rng(cfg.seed)
    part = singleton_partition(g)
    aggs = CommunityAggregates(g, model, part)
    sweeps, _ = _propagate(g, part, aggs, rng, cfg, trace)
    while True:
        merge = _best_merge(g, part, aggs, cfg.min_gain)
        if merge is None:
            break
        keep, drop, gain = merge
        merge_communities(part, aggs, keep, drop)
        if trace is not None:
            trace.append(gain / g.two_m)
        s, _ = _propagate(g, part, aggs, rng, cfg, trace)
        sweeps += s
    labels = part.compact()
    return OptimizeResult(part, labels, modularity(g, model, labels), sweeps)


def aggregate(g: Graph, model: NullModel, labels: np.ndarray) -> tuple[Graph, NullModel]:
    """Coarse graph with one node per community and block-summed null model."""
    c = int(labels.max()) + 1
    S = indicator(labels, c)
    coarse = Graph.from_matrix(sp.csr_matrix(S.T @ g.adjacency @ S))
    if isinstance(model, NGModel):
        return coarse, NGModel(coarse)
    return coarse, BlockModel(coarse, model.block_sums(labels, c), kind=model.kind)


def louvain(g: Graph, model: NullModel, cfg: OptimizerConfig, trace=None) -> OptimizeResult:
    """Greedy local moves followed by community aggregation, repeated."""
    rng = np.random.default_rng(cfg.seed)
    membership = np.arange(g.n)
    level_g, level_model = g, model
    sweeps = 0
    while True:
        part = singleton_partition(level_g)
        aggs = CommunityAggregates(level_g, level_model, part)
        s, gained = _propagate(level_g, part, aggs, rng, cfg, trace)
        sweeps += s
        labels = part.compact()
        c = int(labels.max()) + 1
        if gained <= 0.0 or c == level_g.n:
            break
        membership = labels[membership]
        if c == 1:
            break
        level_g, level_model = aggregate(level_g, level_model, labels)
    flat = Partition(g, membership)
    labels = flat.compact()
    return OptimizeResult(Partition(g, labels), labels, modularity(g, model, labels), sweeps)


def optimize(g: Graph, model: NullModel, cfg: OptimizerConfig | None = None, trace=None) -> OptimizeResult:
    """Maximise ``Q`` under ``model`` with the configured heuristic.

    ``trace``, if given, receives every accepted Q increment in order.
    """
    cfg = cfg or OptimizerConfig()
    if not g.two_m > 0:
        raise NullModelError("graph has no edges (2m = 0)")
    if model.n != g.n:
        raise ValueError("model and graph disagree on node count")
    if cfg.algorithm == "louvain":
        return louvain(g, model, cfg, trace)
    return lpam_plus(g, model, cfg, trace)


def exhaustive_best_partition(g: Graph, model: NullModel) -> tuple[Partition, float]:
    """Q-maximal partition by enumerating every set partition (``n <= 12``).

    Ties go to fewer communities, then to the lexicographically smaller
    restricted-growth label sequence.
    """
    n = g.n
    if n > 12:
        raise ValueError(f"exhaustive search supports n <= 12, got {n}")
    B = g.dense() - model.matrix()
    two_m = g.two_m
    tol = 1e-12 * max(1.0, two_m)
    labels = [0] * n
    best = {"score": -np.inf, "labels": None, "c": n + 1}
    # sums[c][t]: sum of B[t, j] over already-placed j in community c
    Bl = B.tolist()
    diag = [Bl[t][t] for t in range(n)]

    def rec(t, c, score, comm_rows):
        if t == n:
            if score > best["score"] + tol or (
                abs(score - best["score"]) <= tol and c < best["c"]
            ):
                best.update(score=score, labels=labels.copy(), c=c)
            return
        row = Bl[t]
        for lab in range(c + 1):
            if lab < c:
                members = comm_rows[lab]
                add = diag[t] + 2.0 * sum(row[j] for j in members)
                members.append(t)
                labels[t] = lab
                rec(t + 1, c, score + add, comm_rows)
                members.pop()
            else:
                comm_rows.append([t])
                labels[t] = lab
                rec(t + 1, c + 1, score + diag[t], comm_rows)
                comm_rows.pop()

    rec(0, 0, 0.0, [])
    part = Partition(g, best["labels"])
    return part, best["score"] / two_m
