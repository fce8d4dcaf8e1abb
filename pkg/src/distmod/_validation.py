"""Input validation shared by the estimators and the CLI."""

from __future__ import annotations

import numbers

import numpy as np
import scipy.sparse as sp
from sklearn.utils import check_array

from .attributes import AttributeTable, DistanceSpec, PairwiseDistances
from .graph import Graph


def check_graph(X) -> Graph:
    """Coerce ``X`` (Graph, dense or sparse adjacency) to a :class:`Graph`."""
    if isinstance(X, Graph):
        return X
    A = check_array(X, accept_sparse=("csr", "csc", "coo"), dtype=float, ensure_min_samples=1)
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"adjacency matrix must be square, got shape {A.shape}")
    return Graph.from_matrix(sp.csr_matrix(A))


def check_distances(g: Graph, attributes=None, distances=None, distance: str = "euclidean") -> PairwiseDistances:
    """Pairwise distances from either a precomputed matrix or node attributes."""
    if distances is not None:
        if isinstance(distances, PairwiseDistances):
            out = distances
        else:
            out = PairwiseDistances.from_matrix(check_array(distances, dtype=float))
    elif attributes is None:
        raise ValueError("this null model needs node attributes or a distance matrix")
    else:
        if isinstance(attributes, AttributeTable):
            table = attributes
        else:
            arr = np.asarray(attributes)
            if distance != "discrete":
                arr = check_array(arr.reshape(len(arr), -1), dtype=float)
            table = AttributeTable.from_array(arr)
        out = PairwiseDistances(DistanceSpec(distance, tuple(table.names())), table)
    if out.n != g.n:
        raise ValueError(f"distances cover {out.n} nodes but the graph has {g.n}")
    return out


def check_seed(random_state) -> int:
    if random_state is None:
        return int(np.random.SeedSequence().generate_state(1)[0])
    if isinstance(random_state, numbers.Integral):
        return int(random_state)
    if isinstance(random_state, np.random.RandomState):
        return int(random_state.randint(0, 2**31 - 1))
    raise ValueError(f"random_state must be an int or None, got {random_state!r}")
