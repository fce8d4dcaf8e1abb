"""Community detection with distance-aware modularity null models."""

from .attributes import AttributeTable, DistanceSpec, KernelSpec, PairwiseDistances, kernel_eval, read_attributes
from .benchgen import BenchConfig, generate, grid_experiment
from .consensus import SweepResult, nmi, run_sweep
from .estimators import ConsensusDistModularity, ModularityCommunities
from .graph import Graph, GraphError, Partition, load_graph, read_edge_list, read_partition, write_partition
from .engine import modularity
from .nullmodels import DistModel, NGModel, NullModelError, SpaModel
from .optimizers import OptimizerConfig, exhaustive_best_partition, optimize
from .stats import chi_squared_independence, chi_squared_test, effect_curve

__version__ = "0.1.0"

__all__ = [
    "AttributeTable",
    "BenchConfig",
    "ConsensusDistModularity",
    "DistModel",
    "DistanceSpec",
    "Graph",
    "GraphError",
    "KernelSpec",
    "ModularityCommunities",
    "NGModel",
    "NullModelError",
    "OptimizerConfig",
    "PairwiseDistances",
    "Partition",
    "SpaModel",
    "SweepResult",
    "chi_squared_independence",
    "chi_squared_test",
    "effect_curve",
    "exhaustive_best_partition",
    "generate",
    "grid_experiment",
    "kernel_eval",
    "load_graph",
    "modularity",
    "nmi",
    "optimize",
    "read_attributes",
    "read_edge_list",
    "read_partition",
    "run_sweep",
    "write_partition",
]
