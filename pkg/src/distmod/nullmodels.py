"""Expected link weights under the NG, Spa and Dist null models.

Every model exposes the ``(n, n)`` matrix of expected weights ``P_ij`` over
ordered pairs, diagonal included, and sums to ``2m``. Below the dense cap
the matrix is materialised once; above it rows are evaluated on demand.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .attributes import DENSE_CAP, KernelSpec, PairwiseDistances, kernel_eval
from .graph import Graph


class NullModelError(ValueError):
    """Raised when a null model cannot be built for the given inputs."""


def _require_edges(g: Graph) -> None:
    if not g.two_m > 0:
        raise NullModelError("graph has no edges (2m = 0); null models are undefined")


def indicator(labels: np.ndarray, c: int | None = None) -> sp.csr_matrix:
    labels = np.asarray(labels)
    n = len(labels)
    c = int(labels.max()) + 1 if c is None else c
    return sp.csr_matrix((np.ones(n), (np.arange(n), labels)), shape=(n, c))


class NullModel:
    kind = "base"

    def __init__(self, g: Graph, dense_cap: int = DENSE_CAP):
        self.graph = g
        self.n = g.n
        self.dense_cap = dense_cap
        self._P: np.ndarray | None = None

    @property
    def is_dense(self) -> bool:
        return self._P is not None

    def _dense(self) -> np.ndarray:
        raise NotImplementedError

    def _row(self, i: int) -> np.ndarray:
        raise NotImplementedError

    def _materialise(self) -> None:
        if self.n <= self.dense_cap:
            self._P = self._dense()

    def row(self, i: int) -> np.ndarray:
        if self._P is not None:
            return self._P[i]
        return self._row(i)

    def matrix(self) -> np.ndarray:
        if self._P is not None:
            return self._P
        return self._dense()

    def expected(self, i: int, j: int) -> float:
        return float(self.row(i)[j])

    def diagonal(self) -> np.ndarray:
        if self._P is not None:
            return np.diag(self._P).copy()
        return np.array([self._row(i)[i] for i in range(self.n)])

    def total(self) -> float:
        if self._P is not None:
            return float(self._P.sum())
        return float(sum(self._row(i).sum() for i in range(self.n)))

    def block_sums(self, labels: np.ndarray, c: int | None = None) -> np.ndarray:
        """``(c, c)`` sums of ``P_ij`` over community blocks."""
        S = indicator(labels, c)
        if self._P is not None:
            return np.asarray((S.T @ (S.T @ self._P).T).T)
        out = np.zeros((S.shape[1], S.shape[1]))
        for i in range(self.n):
            out[labels[i]] += np.bincount(labels, weights=self._row(i), minlength=S.shape[1])
        return out

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n}, dense={self.is_dense})"


class NGModel(NullModel):
    """Configuration model ``P_ij = k_i k_j / 2m``."""

    kind = "ng"

    def __init__(self, g: Graph, dense_cap: int = DENSE_CAP):
        _require_edges(g)
        super().__init__(g, dense_cap)
        self.k = g.strengths
        self.two_m = g.two_m
        # rows are cheap; no dense matrix unless asked for
        self._P = None

    def _row(self, i):
        return self.k[i] * self.k / self.two_m

    def _dense(self):
        return np.outer(self.k, self.k) / self.two_m

    def diagonal(self):
        return self.k**2 / self.two_m

    def total(self):
        return float(self.k.sum() ** 2 / self.two_m)

    def block_sums(self, labels, c=None):
        K = np.bincount(labels, weights=self.k, minlength=c or 0)
        return np.outer(K, K) / self.two_m


class BlockModel(NullModel):
    """Explicit expected-weight matrix (used for coarse graphs)."""

    kind = "block"

    def __init__(self, g: Graph, P: np.ndarray, kind: str = "block"):
        super().__init__(g, dense_cap=max(g.n, 1))
        self._P = np.asarray(P, dtype=float)
        self.kind = kind


def ng_expected(g: Graph, i: int, j: int) -> float:
    _require_edges(g)
    return float(g.strengths[i] * g.strengths[j] / g.two_m)


def build_ng_model(g: Graph) -> NGModel:
    return NGModel(g)


def bin_index(d, tau: float) -> np.ndarray:
    """Equal-width bin ``[k tau, (k+1) tau)`` containing each distance."""
    return np.floor(np.asarray(d, dtype=float) / tau).astype(np.int64)


class SpaModel(NullModel):
    """Gravity-style model ``P_ij = h_i h_j p(bin(d_ij))``.

    ``p`` is estimated per distance bin as observed link weight over the
    summed importance products of the pairs in that bin.
    """

    kind = "spa"

    def __init__(self, g, distances: PairwiseDistances, h, tau: float, dense_cap: int = DENSE_CAP):
        _require_edges(g)
        if not tau > 0:
            raise NullModelError(f"bin size tau must be > 0, got {tau!r}")
        h = np.asarray(h, dtype=float)
        if h.shape != (g.n,):
            raise NullModelError("importance vector must have one value per node")
        if np.any(h < 0) or not np.all(np.isfinite(h)):
            raise NullModelError("importance values must be finite and nonnegative")
        if not np.any(h > 0):
            raise NullModelError("all importance values are zero")
        if distances.n != g.n:
            raise NullModelError("distances and graph disagree on node count")
        super().__init__(g, dense_cap)
        self.distances = distances
        self.h = h
        self.tau = float(tau)

        A = g.adjacency
        n_bins = int(bin_index(distances.max(), tau)) + 1
        if distances.is_dense:
            B = bin_index(distances.matrix(), tau)
            den = np.bincount(B.ravel(), weights=np.outer(h, h).ravel(), minlength=n_bins)
            Ac = A.tocoo()
            num = np.bincount(B[Ac.row, Ac.col], weights=Ac.data, minlength=n_bins)
        else:
            den = np.zeros(n_bins)
            num = np.zeros(n_bins)
            for i, drow in distances.rows():
                b = bin_index(drow, tau)
                den += np.bincount(b, weights=h[i] * h, minlength=n_bins)
                lo, hi = A.indptr[i], A.indptr[i + 1]
                num += np.bincount(b[A.indices[lo:hi]], weights=A.data[lo:hi], minlength=n_bins)
        bad = (den == 0) & (num > 0)
        if np.any(bad):
            raise NullModelError(
                f"distance bin {int(np.flatnonzero(bad)[0])} carries link weight "
                "but zero importance mass"
            )
        self.bin_numerator = num
        self.bin_denominator = den
        with np.errstate(invalid="ignore", divide="ignore"):
            self.p = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
        self._materialise()

    def _row(self, i):
        return self.h[i] * self.h * self.p[bin_index(self.distances.row(i), self.tau)]

    def _dense(self):
        B = bin_index(self.distances.matrix(), self.tau)
        return np.outer(self.h, self.h) * self.p[B]


def build_spa_model(g: Graph, distances: PairwiseDistances, h=None, tau: float = 1.0) -> SpaModel:
    """Spa null model; ``h`` defaults to node strengths."""
    if h is None:
        h = g.strengths
    return SpaModel(g, distances, h, tau)


class DistModel(NullModel):
    """Kernel null model.

    ``P~_ij = k_i k_j f(d_ij) / D_i`` with ``D_i = sum_t k_t f(d_ti)`` and
    ``P_ij = (P~_ij + P~_ji) / 2 = k_i k_j f(d_ij) (1/D_i + 1/D_j) / 2``.
    """

    kind = "dist"

    def __init__(self, g, distances: PairwiseDistances, kernel: KernelSpec, dense_cap: int = DENSE_CAP):
        _require_edges(g)
        if distances.n != g.n:
            raise NullModelError("distances and graph disagree on node count")
        super().__init__(g, dense_cap)
        self.distances = distances
        self.kernel = kernel
        k = g.strengths
        self.k = k
        dense = distances.is_dense and g.n <= dense_cap
        if dense:
            F = kernel_eval(kernel, distances.matrix())
            denom = F @ k
        else:
            F = None
            denom = np.array([kernel_eval(kernel, r) @ k for _, r in distances.rows()])
        dead = np.flatnonzero((denom <= 0) & (k > 0))
        if len(dead):
            i = int(dead[0])
            raise NullModelError(
                f"kernel {kernel.kind}(sigma={kernel.sigma}) leaves node "
                f"{g.node_ids[i]} with no potential partners (D_i = 0); "
                "try a larger sigma"
            )
        self.denominators = denom
        self._inv = np.where(denom > 0, 1.0 / np.where(denom > 0, denom, 1.0), 0.0)
        if dense:
            self._P = self._from_kernel(F)

    def _from_kernel(self, F):
        kk = np.outer(self.k, self.k)
        s = self._inv[:, None] + self._inv[None, :]
        return 0.5 * (F * kk) * s

    def _row(self, i):
        f = kernel_eval(self.kernel, self.distances.row(i))
        return 0.5 * (f * (self.k[i] * self.k)) * (self._inv[i] + self._inv)

    def _dense(self):
        return self._from_kernel(kernel_eval(self.kernel, self.distances.matrix()))

    def asymmetric(self) -> np.ndarray:
        """The directed expectation ``P~`` before symmetrisation."""
        F = kernel_eval(self.kernel, self.distances.matrix())
        return (self.k * self._inv)[:, None] * self.k[None, :] * F

    def degree(self, i: int) -> float:
        return dist_model_degree(self, i)


def build_dist_model(g: Graph, distances: PairwiseDistances, kernel: KernelSpec) -> DistModel:
    return DistModel(g, distances, kernel)


def dist_model_degree(model: DistModel, i: int) -> float:
    """Expected strength ``sum_j P_ij`` of node ``i`` under the Dist model."""
    f = kernel_eval(model.kernel, model.distances.row(i))
    k = model.k
    return float(0.5 * k[i] * (1.0 + np.sum(k * f * model._inv)))
