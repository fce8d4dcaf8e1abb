"""Node attributes, pairwise attribute distances and kernel functions."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy.spatial.distance import cdist

logger = logging.getLogger(__name__)

EARTH_RADIUS_KM = 6371.0
DENSE_CAP = 20_000

DISTANCE_KINDS = ("euclidean", "great-circle", "discrete")
KERNEL_KINDS = (
    "gaussian",
    "reciprocal",
    "hard-threshold",
    "constant",
    "two-level-step",
    "exp-decay",
    "exp-inverse",
)
# CLI spellings
KERNEL_ALIASES = {
    "threshold": "hard-threshold",
    "step": "two-level-step",
    "expdecay": "exp-decay",
    "expinverse": "exp-inverse",
}
DISTANCE_ALIASES = {"greatcircle": "great-circle"}

SCALED_KERNELS = ("gaussian", "reciprocal", "hard-threshold")


def canonical_kernel(kind: str) -> str:
    kind = KERNEL_ALIASES.get(kind, kind)
    if kind not in KERNEL_KINDS:
        raise ValueError(f"unknown kernel kind {kind!r}")
    return kind


class AttributeTable:
    """Per-node attribute columns, numeric or categorical.

    Parameters
    ----------
    columns : mapping of str to sequence
        One entry per node for every column, in the graph's dense order.
    """

    def __init__(self, columns: Mapping[str, Sequence], n: int | None = None):
        self.columns: dict[str, np.ndarray] = {}
        self.numeric: dict[str, bool] = {}
        for name, values in columns.items():
            values = list(values)
            if n is None:
                n = len(values)
            if len(values) != n:
                raise ValueError(f"column {name!r} has {len(values)} values, expected {n}")
            arr, is_num = _coerce(values)
            self.columns[name] = arr
            self.numeric[name] = is_num
        self.n = 0 if n is None else n

    def __contains__(self, name: str) -> bool:
        return name in self.columns

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.columns[name]
        except KeyError:
            raise KeyError(f"missing attribute {name!r}") from None

    def names(self) -> list[str]:
        return list(self.columns)

    def matrix(self, names: Sequence[str]) -> np.ndarray:
        """Numeric ``(n, len(names))`` array of the selected columns."""
        cols = []
        for name in names:
            col = self[name]
            if not self.numeric[name]:
                raise ValueError(f"attribute {name!r} is categorical, numeric required")
            cols.append(col)
        return np.column_stack(cols) if cols else np.zeros((self.n, 0))

    def codes(self, names: Sequence[str]) -> np.ndarray:
        """Integer code per node for the joint value of ``names``."""
        keys = list(zip(*(self[name].tolist() for name in names)))
        lookup: dict = {}
        return np.array([lookup.setdefault(key, len(lookup)) for key in keys], dtype=np.int64)

    @classmethod
    def from_array(cls, X, names: Sequence[str] | None = None) -> "AttributeTable":
        X = np.asarray(X)
        if X.ndim == 1:
            X = X[:, None]
        if names is None:
            names = [f"a{j}" for j in range(X.shape[1])]
        return cls({name: X[:, j] for j, name in enumerate(names)}, n=X.shape[0])


def _coerce(values: list) -> tuple[np.ndarray, bool]:
    try:
        arr = np.asarray([float(v) for v in values], dtype=float)
    except (TypeError, ValueError):
        return np.asarray([str(v) for v in values], dtype=object), False
    if not np.all(np.isfinite(arr)):
        raise ValueError("numeric attribute values must be finite")
    return arr, True


def read_attributes(path: str | Path, node_ids: Sequence | None = None) -> AttributeTable:
    """Read an attribute file: header row, then ``node <values...>`` rows.

    Comma-separated if the header contains a comma, else whitespace. With
    ``node_ids`` the rows are aligned to that node order.
    """
    with open(path, newline="") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise ValueError(f"{path}: empty attribute file")
    if "," in lines[0]:
        rows = list(csv.reader(lines))
    else:
        rows = [ln.split() for ln in lines]
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    by_id: dict[int, list[str]] = {}
    for lineno, row in enumerate(body, 2):
        if len(row) != len(header):
            raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            node = int(row[0])
        except ValueError:
            raise ValueError(f"{path}:{lineno}: node id must be an integer") from None
        by_id[node] = [v.strip() for v in row[1:]]
    if node_ids is None:
        order = sorted(by_id)
    else:
        order = [int(v) for v in node_ids]
        missing = [v for v in order if v not in by_id]
        if missing:
            raise ValueError(f"{path}: no attributes for node(s) {missing[:5]}")
        extra = len(set(by_id) - set(order))
        if extra:
            logger.warning("%s: ignoring %d rows for nodes not in the graph", path, extra)
    cols = {name: [by_id[v][j] for v in order] for j, name in enumerate(header[1:])}
    return AttributeTable(cols, n=len(order))


@dataclass(frozen=True)
class DistanceSpec:
    kind: str
    attributes: tuple[str, ...]

    def __post_init__(self) -> None:
        kind = DISTANCE_ALIASES.get(self.kind, self.kind)
        if kind not in DISTANCE_KINDS:
            raise ValueError(f"unknown distance kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "attributes", tuple(self.attributes))
        if not self.attributes:
            raise ValueError("distance needs at least one attribute")
        if kind == "great-circle" and len(self.attributes) != 2:
            raise ValueError("great-circle distance needs exactly (lat, lon) attributes")


def haversine(lat1, lon1, lat2, lon2, radius: float = EARTH_RADIUS_KM):
    """Great-circle distance between points given in degrees."""
    phi1, phi2 = np.radians(lat1), np.radians(lat2)
    dphi = phi2 - phi1
    dlmb = np.radians(lon2) - np.radians(lon1)
    a = np.sin(dphi / 2.0) ** 2 + np.cos(phi1) * np.cos(phi2) * np.sin(dlmb / 2.0) ** 2
    return 2.0 * radius * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))


def _check_latlon(latlon: np.ndarray) -> None:
    if np.any(np.abs(latlon[:, 0]) > 90.0) or np.any(np.abs(latlon[:, 1]) > 180.0):
        raise ValueError("great-circle coordinates out of range (|lat|<=90, |lon|<=180)")


def distance(spec: DistanceSpec, attrs: AttributeTable, i: int, j: int) -> float:
    """Distance between nodes ``i`` and ``j`` in terms of the selected attributes."""
    return float(PairwiseDistances(spec, attrs).row(i)[j])


class PairwiseDistances:
    """Pairwise ``d_ij`` over an attribute table.

    Rows are evaluated on demand; ``matrix()`` materialises (and caches) the
    dense ``(n, n)`` array when ``n <= dense_cap``.
    """

    def __init__(self, spec: DistanceSpec, attrs: AttributeTable, dense_cap: int = DENSE_CAP):
        self.spec = spec
        self.n = attrs.n
        self.dense_cap = dense_cap
        if spec.kind == "discrete":
            self._data = attrs.codes(spec.attributes)
        else:
            self._data = attrs.matrix(spec.attributes)
            if spec.kind == "great-circle":
                _check_latlon(self._data)
        self._dense: np.ndarray | None = None

    @classmethod
    def from_matrix(cls, D) -> "PairwiseDistances":
        D = np.asarray(D, dtype=float)
        if D.ndim != 2 or D.shape[0] != D.shape[1]:
            raise ValueError("distance matrix must be square")
        if np.any(D < 0) or not np.allclose(D, D.T, rtol=0, atol=0):
            raise ValueError("distance matrix must be symmetric and nonnegative")
        self = cls.__new__(cls)
        self.spec = None
        self.n = D.shape[0]
        self.dense_cap = max(DENSE_CAP, D.shape[0])
        self._data = None
        self._dense = D
        return self

    @property
    def is_dense(self) -> bool:
        return self._dense is not None or self.n <= self.dense_cap

    def row(self, i: int) -> np.ndarray:
        if self._dense is not None:
            return self._dense[i]
        kind = self.spec.kind
        x = self._data
        if kind == "discrete":
            return (x != x[i]).astype(float)
        if kind == "euclidean":
            return np.sqrt(((x - x[i]) ** 2).sum(axis=1))
        d = haversine(x[i, 0], x[i, 1], x[:, 0], x[:, 1])
        d[i] = 0.0
        return d

    def matrix(self) -> np.ndarray:
        if self._dense is None:
            kind = self.spec.kind
            x = self._data
            if kind == "discrete":
                D = (x[:, None] != x[None, :]).astype(float)
            elif kind == "euclidean":
                D = cdist(x, x)
            else:
                D = haversine(x[:, None, 0], x[:, None, 1], x[None, :, 0], x[None, :, 1])
                D = 0.5 * (D + D.T)
                np.fill_diagonal(D, 0.0)
            if self.n > self.dense_cap:
                return D
            self._dense = D
        return self._dense

    def rows(self):
        for i in range(self.n):
            yield i, self.row(i)

    def max(self) -> float:
        if self.is_dense:
            return float(self.matrix().max()) if self.n else 0.0
        return max(float(r.max()) for _, r in self.rows())

    def unique_values(self) -> np.ndarray:
        if self.is_dense:
            return np.unique(self.matrix())
        vals = set()
        for _, r in self.rows():
            vals.update(np.unique(r).tolist())
        return np.array(sorted(vals))


def mean_pairwise_distance(distances: PairwiseDistances) -> float:
    """Mean of ``d_ij`` over all ``n^2`` ordered pairs, diagonal included."""
    n = distances.n
    if n == 0:
        return 0.0
    if distances.is_dense:
        return float(distances.matrix().sum() / n**2)
    return float(sum(r.sum() for _, r in distances.rows()) / n**2)


@dataclass(frozen=True)
class KernelSpec:
    """Distance kernel ``f: [0, inf) -> [0, 1]``.

    ``sigma`` is the length scale for gaussian/reciprocal/hard-threshold
    and the off-diagonal level for two-level-step; other kinds ignore it.
    """

    kind: str
    sigma: float | None = None

    def __post_init__(self) -> None:
        kind = canonical_kernel(self.kind)
        object.__setattr__(self, "kind", kind)
        s = self.sigma
        if kind in SCALED_KERNELS:
            if s is None or not s > 0 or not math.isfinite(s):
                raise ValueError(f"{kind} kernel needs sigma > 0, got {s!r}")
        elif kind == "two-level-step":
            if s is None or not 0.0 <= s <= 1.0:
                raise ValueError(f"two-level-step kernel needs sigma in [0, 1], got {s!r}")

    def __call__(self, d):
        return kernel_eval(self, d)


def kernel_eval(spec: KernelSpec, d):
    """Evaluate the kernel at distance(s) ``d``; scalar in, scalar out."""
    scalar = np.ndim(d) == 0
    d = np.asarray(d, dtype=float)
    if np.any(d < 0):
        raise ValueError("distances must be nonnegative")
    kind, s = spec.kind, spec.sigma
    if kind == "gaussian":
        out = np.exp(-((d / s) ** 2))
    elif kind == "reciprocal":
        out = 1.0 / (1.0 + (d / s) ** 2)
    elif kind == "hard-threshold":
        out = (d <= s).astype(float)
    elif kind == "constant":
        out = np.ones_like(d)
    elif kind == "two-level-step":
        out = np.where(d == 0.0, 1.0, s)
    elif kind == "exp-decay":
        out = np.exp(-d)
    else:
        with np.errstate(divide="ignore", over="ignore"):
            out = np.where(d > 0.0, np.exp(-1.0 / np.where(d > 0.0, d, 1.0)), 0.0)
    return float(out) if scalar else out
