"""Kernel-parameter sweeps and consensus partition selection."""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .attributes import SCALED_KERNELS, KernelSpec, PairwiseDistances, canonical_kernel
from .graph import Graph, Partition
from .nullmodels import DistModel, NullModelError
from .optimizers import OptimizerConfig, optimize

logger = logging.getLogger(__name__)


class SweepError(RuntimeError):
    """Raised when no grid point of a sweep could be evaluated."""


def _as_labels(p) -> np.ndarray:
    return p.labels if isinstance(p, Partition) else np.asarray(p)


def nmi(p1, p2) -> float:
    """Normalised mutual information between two partitions of the same nodes.

    Uses ``I = -2 sum N_ab ln(N_ab n / (N_a N_b)) / (sum N_a ln(N_a/n) + sum N_b ln(N_b/n))``
    on the contingency table ``N``. Two single-community partitions score 1.
    """
    a = _as_labels(p1)
    b = _as_labels(p2)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"partitions cover different node sets ({a.shape} vs {b.shape})")
    n = len(a)
    if n == 0:
        raise ValueError("empty partitions")
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    ca, cb = ai.max() + 1, bi.max() + 1
    N = np.bincount(ai * cb + bi, minlength=ca * cb).reshape(ca, cb).astype(float)
    Na = N.sum(axis=1)
    Nb = N.sum(axis=0)
    den = float(np.sum(Na * np.log(Na / n)) + np.sum(Nb * np.log(Nb / n)))
    if den == 0.0:
        return 1.0
    nz = N > 0
    num = -2.0 * float(np.sum(N[nz] * np.log(N[nz] * n / np.outer(Na, Nb)[nz])))
    return min(max(num / den, 0.0), 1.0)


def default_sigma_grid(kind: str, dbar: float | None = None) -> np.ndarray:
    """Probe grid: ``0.1 dbar .. 2.0 dbar`` for scaled kernels, ``0 .. 0.25`` for the step kernel."""
    kind = canonical_kernel(kind)
    if kind in SCALED_KERNELS:
        if dbar is None or not dbar > 0:
            raise ValueError(
                "mean pairwise distance is 0: all selected attributes are identical, "
                "so there is no effect to take out"
            )
        return np.round(np.arange(1, 21) * 0.1, 10) * dbar
    if kind == "two-level-step":
        return np.round(np.arange(6) * 0.05, 10)
    raise ValueError(f"kernel {kind!r} has no tunable parameter to sweep")


@dataclass
class SweepResult:
    sigmas: np.ndarray
    labels: list[np.ndarray]
    q: np.ndarray
    n_communities: np.ndarray
    sweeps: np.ndarray
    nmi_matrix: np.ndarray
    avg_nmi: np.ndarray
    consensus_index: int
    failed: list[tuple[float, str]] = field(default_factory=list)

    @property
    def consensus_sigma(self) -> float:
        return float(self.sigmas[self.consensus_index])

    @property
    def consensus_labels(self) -> np.ndarray:
        return self.labels[self.consensus_index]

    def table(self) -> list[tuple[float, float, float, int]]:
        """Rows ``(sigma, avg_nmi, q, c)``."""
        return [
            (float(s), float(a), float(q), int(c))
            for s, a, q, c in zip(self.sigmas, self.avg_nmi, self.q, self.n_communities)
        ]


def nmi_matrix(partitions: Sequence) -> np.ndarray:
    s = len(partitions)
    M = np.eye(s)
    for i in range(s):
        for j in range(i + 1, s):
            M[i, j] = M[j, i] = nmi(partitions[i], partitions[j])
    return M


def consensus(partitions: Sequence, keys: Sequence[float] | None = None) -> tuple[int, np.ndarray, np.ndarray]:
    """Index of the partition with the largest summed NMI to all others.

    Ties (within 1e-12) go to the smallest key, by default the position.
    Returns ``(index, avg_nmi, nmi_matrix)``.
    """
    M = nmi_matrix(partitions)
    avg = M.sum(axis=1) - np.diag(M)
    keys = np.arange(len(partitions)) if keys is None else np.asarray(keys, dtype=float)
    best = avg.max()
    tied = np.flatnonzero(avg >= best - 1e-12)
    return int(tied[np.argmin(keys[tied])]), avg, M


def _run_point(g, distances, kind, sigma, cfg):
    try:
        model = DistModel(g, distances, KernelSpec(kind, float(sigma)))
    except NullModelError as exc:
        return None, str(exc)
    return optimize(g, model, cfg), None


def run_sweep(
    g: Graph,
    distances: PairwiseDistances,
    kernel: str,
    sigmas: Sequence[float],
    cfg: OptimizerConfig | None = None,
    threads: int = 1,
) -> SweepResult:
    """Optimise Dist-Modularity at every ``sigma`` and pick the consensus.

    Grid points whose model cannot be built are dropped with a warning.
    """
    cfg = cfg or OptimizerConfig()
    sigmas = [float(s) for s in sigmas]
    if not sigmas:
        raise ValueError("empty sigma grid")
    if distances.is_dense:
        distances.matrix()
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(lambda s: _run_point(g, distances, kernel, s, cfg), sigmas))
    else:
        results = [_run_point(g, distances, kernel, s, cfg) for s in sigmas]

    kept, failed = [], []
    for s, (res, err) in zip(sigmas, results):
        if res is None:
            failed.append((s, err))
            warnings.warn(f"sigma={s}: {err}", RuntimeWarning, stacklevel=2)
        else:
            kept.append((s, res))
    if not kept:
        raise SweepError("every grid point failed: " + "; ".join(e for _, e in failed))

    labels = [r.labels for _, r in kept]
    ks = [s for s, _ in kept]
    idx, avg, M = consensus(labels, ks)
    return SweepResult(
        sigmas=np.array(ks),
        labels=labels,
        q=np.array([r.q for _, r in kept]),
        n_communities=np.array([int(r.labels.max()) + 1 for _, r in kept]),
        sweeps=np.array([r.sweeps for _, r in kept]),
        nmi_matrix=M,
        avg_nmi=avg,
        consensus_index=idx,
        failed=failed,
    )


def parse_grid(text: str, dbar: float | None = None) -> np.ndarray:
    """Parse ``lo:hi:step`` (inclusive) or a comma list; a ``dbar`` suffix scales by ``dbar``."""
    text = text.strip()
    scale = 1.0
    if text.endswith("dbar"):
        if dbar is None:
            raise ValueError("grid uses 'dbar' but no mean distance is available")
        scale = dbar
        text = text[: -len("dbar")]
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
            raise ValueError(f"bad grid {text!r}; expected lo:hi:step with step > 0")
        lo, hi, step = parts
        count = int(math.floor((hi - lo) / step + 1e-9)) + 1
        values = np.round(lo + step * np.arange(count), 12)
    else:
        values = np.array([float(p) for p in text.split(",") if p.strip()])
    return values * scale


def parse_scalar(text: str, dbar: float | None = None) -> float:
    text = str(text).strip()
    if text.endswith("dbar"):
        if dbar is None:
            raise ValueError("value uses 'dbar' but no mean distance is available")
        return float(text[: -len("dbar")] or 1.0) * dbar
    return float(text)
