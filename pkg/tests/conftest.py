from __future__ import annotations

import itertools
import os

import numpy as np
import pytest

from trajmod.network import Edge, Node, RoadNetwork, grid_network
from trajmod.partition import Partition
from trajmod.similarity import SimilarityGraph
from trajmod.trajectories import Trajectory, TrajectorySet


def make_network(edges: list[tuple[str, str, str, float]], coords: dict[str, tuple[float, float]] | None = None) -> RoadNetwork:
    """Network from ``(edge_id, source, target, length)`` tuples; nodes default to the origin."""
    names = sorted({n for _, s, t, _ in edges for n in (s, t)} | set(coords or {}))
    coords = coords or {}
    nodes = [Node(n, *coords.get(n, (0.0, 0.0))) for n in names]
    return RoadNetwork(nodes, [Edge(*e) for e in edges])


def make_set(net: RoadNetwork, paths: dict[str, list[str]]) -> TrajectorySet:
    return TrajectorySet(tuple(Trajectory.from_edges(tid, p) for tid, p in paths.items()), net)


def write_csv(path, header: str, rows: list[str]) -> str:
    with open(path, "w", encoding="utf-8") as f:
        f.write(header + "\n")
        for row in rows:
            f.write(row + "\n")
    return str(path)


def dense_modularity(g: SimilarityGraph, p: Partition) -> float:
    """Textbook ``1/2m sum_ij (A_ij - k_i k_j / 2m) delta(c_i, c_j)``."""
    a = g.matrix.toarray()
    k = a.sum(axis=1)
    two_m = a.sum()
    if two_m == 0:
        return 0.0
    labels = p.labels_for(g.node_ids)
    same = labels[:, None] == labels[None, :]
    return float(((a - np.outer(k, k) / two_m) * same).sum() / two_m)


def set_partitions(items: list[int]):
    """Every partition of ``items`` as a list of blocks."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for smaller in set_partitions(rest):
        for i in range(len(smaller)):
            yield smaller[:i] + [[first] + smaller[i]] + smaller[i + 1:]
        yield [[first]] + smaller


def exhaustive_max_modularity(g: SimilarityGraph) -> float:
    ids = list(g.node_ids)
    best = -1.0
    for blocks in set_partitions(list(range(len(ids)))):
        p = Partition.from_clusters([[ids[i] for i in b] for b in blocks]).restricted(ids)
        best = max(best, dense_modularity(g, p))
    return best


def graph_from_pairs(n: int, pairs, weight: float = 1.0) -> SimilarityGraph:
    ids = [f"v{i}" for i in range(n)]
    return SimilarityGraph.from_edges(ids, [(i, j, weight) for i, j in pairs])


def random_graph(n: int, density: float, rng: np.random.Generator) -> SimilarityGraph:
    edges = [
        (i, j, float(rng.uniform(0.05, 1.0)))
        for i, j in itertools.combinations(range(n), 2)
        if rng.random() < density
    ]
    return SimilarityGraph.from_edges([f"v{i}" for i in range(n)], edges)


@pytest.fixture
def barbell() -> SimilarityGraph:
    """Two unit triangles joined by the bridge 2-3."""
    return graph_from_pairs(6, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)])


@pytest.fixture
def abc_set() -> TrajectorySet:
    """T1={a,b}, T2={b,c}, T3={c} on unit-length segments."""
    net = make_network(
        [("a", "n0", "n1", 1.0), ("b", "n1", "n2", 1.0), ("c", "n2", "n3", 1.0)],
        {"n0": (0.0, 0.0), "n1": (1.0, 0.0), "n2": (2.0, 0.0), "n3": (3.0, 0.0)},
    )
    return make_set(net, {"T1": ["a", "b"], "T2": ["b", "c"], "T3": ["c"]})


@pytest.fixture
def grid():
    return grid_network(8, 8, spacing=100.0, seed=3)


@pytest.fixture
def two_pairs_files(tmp_path) -> dict[str, str]:
    """Two disjoint corridors, each travelled by two identical trajectories."""
    nodes = write_csv(
        tmp_path / "nodes.csv",
        "node_id,x,y",
        ["a,0,0", "b,100,0", "c,200,0", "d,0,500", "e,100,500", "f,200,500"],
    )
    edges = write_csv(
        tmp_path / "edges.csv",
        "edge_id,from,to,length,oneway",
        ["ab,a,b,100,1", "bc,b,c,100,1", "de,d,e,100,1", "ef,e,f,100,1"],
    )
    rows = []
    for traj_id, path in (("t0", "ab bc"), ("t1", "ab bc"), ("t2", "de ef"), ("t3", "de ef")):
        for seq, edge_id in enumerate(path.split()):
            rows.append(f"{traj_id},{seq},{seq * 10.0},{edge_id}")
    trajectories = write_csv(tmp_path / "trajectories.csv", "traj_id,seq,timestamp,edge_id", rows)
    labels = write_csv(tmp_path / "labels.csv", "traj_id,corridor_id", ["t0,0", "t1,0", "t2,1", "t3,1"])
    return {"nodes": nodes, "edges": edges, "trajectories": trajectories, "labels": labels}


def read_tree(root: str) -> dict[str, bytes]:
    """Relative path -> bytes of every file under ``root``."""
    out = {}
    for dirpath, _, files in os.walk(root):
        for name in files:
            full = os.path.join(dirpath, name)
            with open(full, "rb") as f:
                out[os.path.relpath(full, root)] = f.read()
    return out
