"""Hierarchical agglomerative clustering baseline on ``1 - similarity`` distances."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from scipy.spatial.distance import squareform

from trajmod.errors import ValidationError
from trajmod.partition import Partition
from trajmod.similarity import build_similarity_graph
from trajmod.trajectories import TrajectorySet

Linkage = Literal["single", "average", "complete"]
LINKAGES: tuple[str, ...] = ("single", "average", "complete")
DEFAULT_MAX_TRAJECTORIES = 20000


def distance_matrix(
    ts: TrajectorySet,
    scheme: str = "spatial",
    *,
    max_trajectories: int = DEFAULT_MAX_TRAJECTORIES,
) -> np.ndarray:
    """Condensed upper-triangle distances ``1 - similarity`` (scipy ``squareform`` layout).

    Pairs without a shared weighted segment are at distance 1.
    """
    n = len(ts)
    if n > max_trajectories:
        raise ValidationError(
            f"{n} trajectories exceed the agglomerative baseline cap of {max_trajectories}"
        )
    graph = build_similarity_graph(ts, scheme)
    condensed = np.ones(n * (n - 1) // 2, dtype=np.float64)
    for i, j, w in graph.edges():
        condensed[_condensed_index(n, i, j)] = 1.0 - w
    return condensed


def _condensed_index(n: int, i: int, j: int) -> int:
    if i > j:
        i, j = j, i
    return n * i - i * (i + 1) // 2 + (j - i - 1)


@dataclass(frozen=True)
class MergeStep:
    step: int
    left: int
    right: int
    distance: float
    size: int


@dataclass(frozen=True)
class Dendrogram:
    """Merge history of ``n`` leaves.

    Ids follow the scipy linkage convention: leaf ``i`` is ``i`` and the cluster
    created at step ``s`` is ``n + s``. ``left`` is the side holding the smaller
    leaf index.
    """

    n: int
    merges: tuple[MergeStep, ...]
    linkage: str = "single"

    def __post_init__(self) -> None:
        if len(self.merges) != self.n - 1:
            raise ValidationError(f"a dendrogram of {self.n} leaves needs {self.n - 1} merges")

    def to_linkage(self) -> np.ndarray:
        """scipy-compatible linkage matrix ``[left, right, distance, size]``."""
        return np.array([[m.left, m.right, m.distance, m.size] for m in self.merges], dtype=np.float64).reshape(-1, 4)


def agglomerate(d: np.ndarray, linkage: str = "single") -> Dendrogram:
    """Naive agglomerative clustering with Lance-Williams updates.

    ``d`` is a condensed vector or a symmetric square matrix with zero
    diagonal. Clusters are tracked by their smallest leaf index; the closest
    pair is chosen with ties broken by the smallest index pair. Average
    linkage is the unweighted pair-group mean (UPGMA).
    """
    if linkage not in LINKAGES:
        raise ValidationError(f"unknown linkage {linkage!r}; expected one of {LINKAGES}")
    dist = _as_square(d)
    n = dist.shape[0]
    if n < 2:
        raise ValidationError("agglomerative clustering needs at least 2 elements")

    work = dist.copy()
    work[np.tril_indices(n)] = np.inf
    # Keep the upper triangle authoritative; mirror reads through _get.
    active = np.ones(n, dtype=bool)
    sizes = np.ones(n, dtype=np.int64)
    cluster_id = np.arange(n)

    merges: list[MergeStep] = []
    for step in range(n - 1):
        flat = int(np.argmin(work))
        i, j = divmod(flat, n)
        dij = float(work[i, j])

        others = np.flatnonzero(active)
        others = others[(others != i) & (others != j)]
        d_ik = _get(work, i, others)
        d_jk = _get(work, j, others)
        if linkage == "single":
            merged = np.minimum(d_ik, d_jk)
        elif linkage == "complete":
            merged = np.maximum(d_ik, d_jk)
        else:
            merged = (sizes[i] * d_ik + sizes[j] * d_jk) / (sizes[i] + sizes[j])

        size = int(sizes[i] + sizes[j])
        merges.append(MergeStep(step, int(cluster_id[i]), int(cluster_id[j]), dij, size))

        # i < j always (upper triangle), so the merged cluster keeps slot i.
        lower, upper = others[others < i], others[others > i]
        work[lower, i] = merged[others < i]
        work[i, upper] = merged[others > i]
        work[j, :] = np.inf
        work[:, j] = np.inf
        active[j] = False
        sizes[i] = size
        cluster_id[i] = n + step

    return Dendrogram(n, tuple(merges), linkage)


def _as_square(d: np.ndarray) -> np.ndarray:
    arr = np.asarray(d, dtype=np.float64)
    if arr.ndim == 1:
        return squareform(arr, checks=False)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError("distance matrix must be condensed or square")
    if not np.allclose(arr, arr.T) or np.any(np.diag(arr) != 0):
        raise ValidationError("distance matrix must be symmetric with a zero diagonal")
    return arr


def _get(work: np.ndarray, i: int, others: np.ndarray) -> np.ndarray:
    """Distances from slot ``i`` to ``others`` read from the upper triangle."""
    return np.where(others < i, work[others, i], work[i, others])


def cut(dend: Dendrogram, k: int, ids: Sequence[str] | None = None) -> Partition:
    """Undo the last ``k - 1`` merges and return the ``k`` clusters."""
    n = dend.n
    if not 1 <= k <= n:
        raise ValidationError(f"k must lie in [1, {n}], got {k}")
    parent = list(range(2 * n - 1))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for m in dend.merges[: n - k]:
        new = n + m.step
        parent[find(m.left)] = new
        parent[find(m.right)] = new

    ids = list(ids) if ids is not None else [str(i) for i in range(n)]
    if len(ids) != n:
        raise ValidationError(f"expected {n} ids, got {len(ids)}")
    return Partition.from_labels(ids, [find(i) for i in range(n)])


def write_dendrogram(dend: Dendrogram, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(("step", "left", "right", "distance"))
        for m in dend.merges:
            writer.writerow([m.step, m.left, m.right, repr(m.distance)])
