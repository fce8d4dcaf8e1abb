"""scikit-learn style wrappers around the null models and optimisers."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin

from ._validation import check_distances, check_graph, check_seed
from .attributes import SCALED_KERNELS, KernelSpec, canonical_kernel, mean_pairwise_distance
from .consensus import default_sigma_grid, parse_grid, parse_scalar, run_sweep
from .nullmodels import DistModel, NGModel, SpaModel
from .optimizers import OptimizerConfig, optimize

NULL_MODELS = ("ng", "spa", "dist")


class ModularityCommunities(ClusterMixin, BaseEstimator):
    """Community detection by modularity maximisation under a chosen null model.

    Parameters
    ----------
    null_model : {"ng", "spa", "dist"}
        Configuration model, empirical distance-binned model, or kernel model.
    kernel : str
        Kernel for ``null_model="dist"``.
    sigma : float or str, optional
        Kernel parameter. Strings like ``"0.5dbar"`` scale by the mean
        pairwise distance. ``None`` means one mean distance.
    distance : {"euclidean", "great-circle", "discrete"}
        How attribute vectors are compared when ``attributes`` are given.
    tau : float, optional
        Spa bin width; defaults to a twentieth of the largest distance.
    algorithm : {"lpam-plus", "louvain"}
    random_state : int or None

    Attributes
    ----------
    labels_ : ndarray of shape (n_nodes,)
    modularity_ : float
    n_communities_ : int
    n_sweeps_ : int
    null_model_ : NullModel
    """

    def __init__(
        self,
        null_model="dist",
        kernel="gaussian",
        sigma=None,
        distance="euclidean",
        tau=None,
        algorithm="lpam-plus",
        max_sweeps=100,
        min_gain=1e-10,
        random_state=0,
    ):
        self.null_model = null_model
        self.kernel = kernel
        self.sigma = sigma
        self.distance = distance
        self.tau = tau
        self.algorithm = algorithm
        self.max_sweeps = max_sweeps
        self.min_gain = min_gain
        self.random_state = random_state

    def _build_model(self, g, attributes, distances, importance):
        if self.null_model not in NULL_MODELS:
            raise ValueError(f"null_model must be one of {NULL_MODELS}, got {self.null_model!r}")
        if self.null_model == "ng":
            return NGModel(g)
        dist = check_distances(g, attributes, distances, self.distance)
        if self.null_model == "spa":
            tau = self.tau if self.tau is not None else (dist.max() or 1.0) / 20.0
            h = g.strengths if importance is None else importance
            return SpaModel(g, dist, h, float(tau))
        kind = canonical_kernel(self.kernel)
        sigma = self.sigma
        if kind in SCALED_KERNELS:
            dbar = mean_pairwise_distance(dist)
            sigma = dbar if sigma is None else parse_scalar(sigma, dbar)
        elif sigma is not None:
            sigma = float(sigma)
        return DistModel(g, dist, KernelSpec(kind, sigma))

    def fit(self, X, y=None, attributes=None, distances=None, importance=None):
        """Detect communities in the graph with adjacency ``X``.

        ``attributes`` (n_nodes, n_features) or ``distances`` (n_nodes,
        n_nodes) are required for the Spa and Dist models.
        """
        g = check_graph(X)
        model = self._build_model(g, attributes, distances, importance)
        cfg = OptimizerConfig(self.algorithm, check_seed(self.random_state), self.max_sweeps, self.min_gain)
        res = optimize(g, model, cfg)
        self.graph_ = g
        self.null_model_ = model
        self.labels_ = res.labels
        self.modularity_ = res.q
        self.n_communities_ = int(res.labels.max()) + 1
        self.n_sweeps_ = res.sweeps
        return self


class ConsensusDistModularity(ClusterMixin, BaseEstimator):
    """Dist-Modularity over a grid of kernel parameters, keeping the consensus partition.

    ``sigma_grid`` may be a sequence, a ``"lo:hi:step[dbar]"`` string, or
    ``None`` for the kernel's default grid.

    Attributes
    ----------
    labels_, sigma_, modularity_, sweep_
    """

    def __init__(
        self,
        kernel="gaussian",
        sigma_grid=None,
        distance="euclidean",
        algorithm="lpam-plus",
        max_sweeps=100,
        min_gain=1e-10,
        random_state=0,
        n_jobs=1,
    ):
        self.kernel = kernel
        self.sigma_grid = sigma_grid
        self.distance = distance
        self.algorithm = algorithm
        self.max_sweeps = max_sweeps
        self.min_gain = min_gain
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y=None, attributes=None, distances=None):
        g = check_graph(X)
        dist = check_distances(g, attributes, distances, self.distance)
        kind = canonical_kernel(self.kernel)
        dbar = mean_pairwise_distance(dist)
        if self.sigma_grid is None:
            grid = default_sigma_grid(kind, dbar)
        elif isinstance(self.sigma_grid, str):
            grid = parse_grid(self.sigma_grid, dbar)
        else:
            grid = np.asarray(self.sigma_grid, dtype=float)
        cfg = OptimizerConfig(self.algorithm, check_seed(self.random_state), self.max_sweeps, self.min_gain)
        sweep = run_sweep(g, dist, kind, grid, cfg, threads=self.n_jobs)
        self.graph_ = g
        self.sweep_ = sweep
        self.sigma_ = sweep.consensus_sigma
        self.labels_ = sweep.consensus_labels
        self.modularity_ = float(sweep.q[sweep.consensus_index])
        self.n_communities_ = int(self.labels_.max()) + 1
        return self
