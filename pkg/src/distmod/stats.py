"""Diagnostics: link weight versus distance, and chi-squared independence."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .attributes import PairwiseDistances
from .graph import Graph
from .nullmodels import NullModel, bin_index


@dataclass
class EffectCurve:
    edges: np.ndarray
    observed: np.ndarray
    expected: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    def rows(self) -> list[list[float]]:
        names = list(self.expected)
        out = []
        for b in range(len(self.observed)):
            out.append(
                [float(self.edges[b]), float(self.edges[b + 1]), float(self.observed[b])]
                + [float(self.expected[k][b]) for k in names]
            )
        return out


def default_bin_edges(distances: PairwiseDistances, n_bins: int = 20, discrete: bool = False) -> np.ndarray:
    """Equal-width bins over ``[0, max d]``, or one bin per distinct value."""
    if discrete:
        vals = distances.unique_values()
        if len(vals) == 1:
            return np.array([vals[0], vals[0] + 1.0])
        mids = 0.5 * (vals[:-1] + vals[1:])
        return np.concatenate([[vals[0]], mids, [vals[-1] + (vals[-1] - mids[-1])]])
    top = distances.max()
    if top == 0.0:
        top = 1.0
    return np.linspace(0.0, top, n_bins + 1)


def _assign(d: np.ndarray, edges: np.ndarray) -> np.ndarray:
    b = np.searchsorted(edges, d, side="right") - 1
    # the last bin is closed on the right
    b[d == edges[-1]] = len(edges) - 2
    return b


def effect_curve(
    g: Graph,
    distances: PairwiseDistances,
    edges: Sequence[float] | None = None,
    models: Mapping[str, NullModel] | None = None,
    tau: float | None = None,
) -> EffectCurve:
    """Observed and expected link weight per distance bin, over ordered pairs.

    Bins are either explicit ``edges`` (last bin closed) or equal-width
    bins of size ``tau`` from 0, the same binning the Spa model uses.
    """
    top = distances.max()
    if tau is not None:
        if not tau > 0:
            raise ValueError("tau must be > 0")
        nb = int(bin_index(top, tau)) + 1
        edges = tau * np.arange(nb + 1)
        assign = lambda d: bin_index(d, tau)  # noqa: E731
    else:
        if edges is None:
            raise ValueError("give bin edges or tau")
        edges = np.asarray(edges, dtype=float)
        if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
            raise ValueError("bin edges must be a strictly increasing sequence of >= 2 values")
        if edges[0] > 0.0 or edges[-1] < top:
            raise ValueError(f"bins [{edges[0]}, {edges[-1]}] do not cover distances [0, {top}]")
        nb = len(edges) - 1
        assign = lambda d: _assign(d, edges)  # noqa: E731
    models = dict(models or {})
    observed = np.zeros(nb)
    expected = {k: np.zeros(nb) for k in models}
    A = g.adjacency
    for i, drow in distances.rows():
        b = assign(drow)
        lo, hi = A.indptr[i], A.indptr[i + 1]
        observed += np.bincount(b[A.indices[lo:hi]], weights=A.data[lo:hi], minlength=nb)
        for k, m in models.items():
            expected[k] += np.bincount(b, weights=m.row(i), minlength=nb)
    return EffectCurve(edges, observed, expected)


def _gamma_series(a: float, x: float) -> float:
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(10_000):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * 1e-16:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_contfrac(a: float, x: float) -> float:
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def regularized_gamma_upper(a: float, x: float) -> float:
    """``Q(a, x) = Gamma(a, x) / Gamma(a)``."""
    if a <= 0:
        raise ValueError("a must be > 0")
    if x < 0:
        raise ValueError("x must be >= 0")
    if x == 0.0:
        return 1.0
    if x < a + 1.0:
        return max(0.0, 1.0 - _gamma_series(a, x))
    return min(1.0, _gamma_contfrac(a, x))


def chi2_sf(stat: float, dof: int) -> float:
    """Upper tail probability of the chi-squared distribution."""
    return regularized_gamma_upper(dof / 2.0, stat / 2.0)


@dataclass(frozen=True)
class ChiSquaredResult:
    statistic: float
    dof: int
    p_value: float
    table: np.ndarray


def chi_squared_test(table, yates: bool = False) -> ChiSquaredResult:
    """Pearson's test of independence on a contingency table."""
    O = np.asarray(table, dtype=float)
    if O.ndim != 2 or min(O.shape) < 2:
        raise ValueError(f"contingency table must be at least 2x2, got shape {O.shape}")
    if np.any(O < 0):
        raise ValueError("counts must be nonnegative")
    total = O.sum()
    E = np.outer(O.sum(axis=1), O.sum(axis=0)) / total if total > 0 else np.zeros_like(O)
    if np.any(E <= 0):
        raise ValueError("every expected cell count must be positive")
    dof = (O.shape[0] - 1) * (O.shape[1] - 1)
    diff = np.abs(O - E)
    if yates and dof == 1:
        diff = np.maximum(diff - 0.5, 0.0)
    stat = float(np.sum(diff**2 / E))
    return ChiSquaredResult(stat, dof, chi2_sf(stat, dof), O)


def contingency_table(a: Sequence, b: Sequence) -> tuple[np.ndarray, list, list]:
    a = list(a)
    b = list(b)
    if len(a) != len(b):
        raise ValueError("attributes must cover the same nodes")
    ra = sorted(set(a), key=str)
    cb = sorted(set(b), key=str)
    ia = {v: k for k, v in enumerate(ra)}
    ib = {v: k for k, v in enumerate(cb)}
    T = np.zeros((len(ra), len(cb)))
    for x, y in zip(a, b):
        T[ia[x], ib[y]] += 1
    return T, ra, cb


def chi_squared_independence(a: Sequence, b: Sequence, yates: bool = False) -> ChiSquaredResult:
    """Test whether two categorical node attributes are independent."""
    T, _, _ = contingency_table(a, b)
    return chi_squared_test(T, yates=yates)
