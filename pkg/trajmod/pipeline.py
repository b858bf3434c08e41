"""End-to-end runs: load -> weight -> similarity graph -> hierarchy (or agglomerative baseline)."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any, Sequence

from trajmod.hac import Dendrogram, agglomerate, cut, distance_matrix
from trajmod.hierarchy import ClusterHierarchy, HierarchyParams, build_hierarchy, flatten_by_level, greedy_expand
from trajmod.log import RunLogger
from trajmod.modularity import modularity
from trajmod.network import load_network
from trajmod.partition import Partition
from trajmod.similarity import SimilarityGraph, build_similarity_graph
from trajmod.trajectories import TrajectorySet, load_trajectories


@dataclass
class ClusterResult:
    trajectories: TrajectorySet
    graph: SimilarityGraph
    hierarchy: ClusterHierarchy
    levels: list[Partition]
    expansions: dict[int, Partition] = field(default_factory=dict)
    elapsed: float = 0.0

    def summary(self) -> dict[str, Any]:
        """Top-level Q, level count, and cluster counts per level."""
        root = self.hierarchy.root
        return {
            "n_trajectories": len(self.trajectories),
            "n_graph_edges": self.graph.n_edges,
            "top_level_modularity": root.modularity_of_split,
            "top_level_clusters": len(root.children) if root.children else 1,
            "levels": len(self.levels),
            "clusters_per_level": [p.k for p in self.levels],
            "modularity_per_level": [modularity(self.graph, p) for p in self.levels],
            "leaves": len(self.hierarchy.leaves()),
        }


@dataclass
class HacResult:
    trajectories: TrajectorySet
    dendrogram: Dendrogram
    partitions: dict[int, Partition]
    elapsed: float = 0.0


def load_dataset(nodes_path: str, edges_path: str, trajectories_path: str, strict_connectivity: bool = False) -> TrajectorySet:
    net = load_network(nodes_path, edges_path)
    return load_trajectories(trajectories_path, net, strict_connectivity=strict_connectivity)


def run_cluster(
    nodes_path: str,
    edges_path: str,
    trajectories_path: str,
    *,
    weighting: str = "spatial",
    params: HierarchyParams | None = None,
    min_similarity: float = 0.0,
    strict_connectivity: bool = False,
    expand: Sequence[int] = (),
    log_dir: str | None = None,
) -> ClusterResult:
    """Cluster a trajectory dataset with recursive modularity optimization.

    Args:
        nodes_path: Nodes CSV of the road network.
        edges_path: Edges CSV of the road network.
        trajectories_path: Long-format trajectories CSV.
        weighting: ``spatial``, ``classic`` or ``jaccard``.
        params: Null-model and recursion parameters.
        min_similarity: Similarity floor for graph edges (0 keeps every positive edge).
        strict_connectivity: Reject trajectories with non-adjacent consecutive segments.
        expand: Target cluster counts for greedy expansion of the hierarchy.
        log_dir: Directory for JSONL logs. None disables logging.
    """
    params = params or HierarchyParams()
    logger = RunLogger(log_dir) if log_dir else None
    t0 = time.perf_counter()
    try:
        ts = load_dataset(nodes_path, edges_path, trajectories_path, strict_connectivity)
        if logger:
            report = ts.report
            logger.log_stage(0, "load", time.perf_counter() - t0,
                             trajectories=len(ts), visits=report.n_visits, segments=report.n_distinct_segments,
                             gaps=report.n_gaps)

        t = time.perf_counter()
        graph = build_similarity_graph(ts, weighting, min_similarity=min_similarity)
        if logger:
            logger.log_stage(1, "graph", time.perf_counter() - t, nodes=len(graph), edges=graph.n_edges)

        t = time.perf_counter()
        hierarchy = build_hierarchy(graph, params, logger)
        if logger:
            logger.log_stage(2, "hierarchy", time.perf_counter() - t,
                             clusters=len(hierarchy), leaves=len(hierarchy.leaves()), depth=hierarchy.max_depth)

        levels = [flatten_by_level(hierarchy, level) for level in range(hierarchy.max_depth + 1)]
        expansions = {k: greedy_expand(hierarchy, graph, k) for k in expand}

        return ClusterResult(
            trajectories=ts,
            graph=graph,
            hierarchy=hierarchy,
            levels=levels,
            expansions=expansions,
            elapsed=time.perf_counter() - t0,
        )
    finally:
        if logger:
            logger.close()


def run_hac(
    nodes_path: str,
    edges_path: str,
    trajectories_path: str,
    *,
    weighting: str = "spatial",
    linkage: str = "average",
    ks: Sequence[int] = (),
    strict_connectivity: bool = False,
    log_dir: str | None = None,
) -> HacResult:
    """Agglomerative baseline on ``1 - similarity``, cut at each ``k`` in ``ks``."""
    logger = RunLogger(log_dir) if log_dir else None
    t0 = time.perf_counter()
    try:
        ts = load_dataset(nodes_path, edges_path, trajectories_path, strict_connectivity)
        t = time.perf_counter()
        dendrogram = agglomerate(distance_matrix(ts, weighting), linkage)
        if logger:
            logger.log_stage(0, "hac", time.perf_counter() - t, trajectories=len(ts), linkage=linkage)
        partitions = {k: cut(dendrogram, k, ts.ids) for k in ks}
        return HacResult(ts, dendrogram, partitions, time.perf_counter() - t0)
    finally:
        if logger:
            logger.close()
