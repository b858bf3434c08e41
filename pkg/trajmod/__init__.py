"""Network-constrained trajectory clustering by recursive modularity optimization."""

__version__ = "0.1.0"

from trajmod.errors import DataFormatError, GeneratorError, TrajmodError, ValidationError  # noqa: E402
from trajmod.network import RoadNetwork, load_network  # noqa: E402
from trajmod.partition import Partition  # noqa: E402
from trajmod.pipeline import ClusterResult, HacResult, run_cluster, run_hac  # noqa: E402
from trajmod.similarity import SimilarityGraph, build_similarity_graph  # noqa: E402
from trajmod.trajectories import Trajectory, TrajectorySet, load_trajectories  # noqa: E402

__all__ = [
    "ClusterResult",
    "DataFormatError",
    "GeneratorError",
    "HacResult",
    "Partition",
    "RoadNetwork",
    "SimilarityGraph",
    "Trajectory",
    "TrajectorySet",
    "TrajmodError",
    "ValidationError",
    "build_similarity_graph",
    "load_network",
    "load_trajectories",
    "run_cluster",
    "run_hac",
]
