"""Pairwise trajectory similarity and the sparse similarity graph G_Sim.

Candidate pairs come from an inverted segment index, so only trajectories
sharing at least one segment are ever compared. An edge links two trajectories
iff their similarity is strictly positive.
"""

from __future__ import annotations

import csv
import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import AbstractSet, Iterable, Literal, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from trajmod.errors import ValidationError
from trajmod.trajectories import Trajectory, TrajectorySet
from trajmod.weighting import CorpusStats, WeightVector, compute_profiles, corpus_stats

logger = logging.getLogger(__name__)

GraphScheme = Literal["spatial", "classic", "jaccard"]
GRAPH_SCHEMES: tuple[str, ...] = ("spatial", "classic", "jaccard")

# Weighting scheme that feeds each graph scheme.
PROFILE_SCHEME = {"spatial": "spatial", "classic": "classic", "jaccard": "binary"}


def profile_scheme(scheme: str) -> str:
    try:
        return PROFILE_SCHEME[scheme]
    except KeyError:
        raise ValidationError(f"unknown similarity scheme {scheme!r}; expected one of {GRAPH_SCHEMES}") from None


class SimilarityGraph:
    """Weighted undirected graph over trajectories, stored as a symmetric CSR matrix.

    Node ``i`` is the trajectory ``node_ids[i]``. There are no self-loops and
    every stored weight is strictly positive.
    """

    def __init__(self, node_ids: Sequence[str], matrix: sp.csr_array):
        self.node_ids: tuple[str, ...] = tuple(node_ids)
        n = len(self.node_ids)
        if matrix.shape != (n, n):
            raise ValidationError(f"matrix shape {matrix.shape} does not match {n} nodes")
        self.matrix = sp.csr_array(matrix)
        self.matrix.sort_indices()
        self.degrees: np.ndarray = np.asarray(self.matrix.sum(axis=1), dtype=np.float64).reshape(n)
        self.total_weight_2m: float = float(self.degrees.sum())

    @classmethod
    def from_edges(cls, node_ids: Sequence[str], edges: Iterable[tuple[int, int, float]]) -> SimilarityGraph:
        n = len(node_ids)
        seen: set[tuple[int, int]] = set()
        rows: list[int] = []
        cols: list[int] = []
        data: list[float] = []
        for i, j, w in edges:
            i, j, w = int(i), int(j), float(w)
            if i == j:
                raise ValidationError(f"self-loop on node {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise ValidationError(f"edge ({i}, {j}) out of range for {n} nodes")
            if not (w > 0 and math.isfinite(w)):
                raise ValidationError(f"edge ({i}, {j}) has non-positive weight {w}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValidationError(f"duplicate edge {key}")
            seen.add(key)
            rows += [i, j]
            cols += [j, i]
            data += [w, w]
        matrix = sp.coo_array((np.asarray(data, dtype=np.float64), (rows, cols)), shape=(n, n)).tocsr()
        return cls(node_ids, matrix)

    def __len__(self) -> int:
        return len(self.node_ids)

    @property
    def n_edges(self) -> int:
        return self.matrix.nnz // 2

    @property
    def total_weight(self) -> float:
        """m: the summed weight of all edges, each counted once."""
        return self.total_weight_2m / 2.0

    def neighbors(self, i: int) -> list[tuple[int, float]]:
        start, end = self.matrix.indptr[i], self.matrix.indptr[i + 1]
        return [(int(j), float(w)) for j, w in zip(self.matrix.indices[start:end], self.matrix.data[start:end])]

    @property
    def adjacency(self) -> list[list[tuple[int, float]]]:
        return [self.neighbors(i) for i in range(len(self))]

    def edges(self) -> list[tuple[int, int, float]]:
        """Each edge once as ``(i, j, w)`` with ``i < j``, sorted."""
        upper = sp.triu(self.matrix, k=1).tocoo()
        order = np.lexsort((upper.col, upper.row))
        return [(int(upper.row[k]), int(upper.col[k]), float(upper.data[k])) for k in order]

    def weight(self, i: int, j: int) -> float:
        return float(self.matrix[i, j])

    def subgraph(self, indices: Sequence[int]) -> SimilarityGraph:
        """Induced subgraph; node ``k`` of the result is node ``indices[k]`` here."""
        idx = np.asarray(indices, dtype=np.int64)
        sub = self.matrix[idx][:, idx]
        return SimilarityGraph([self.node_ids[i] for i in idx], sp.csr_array(sub))

    def components(self) -> list[list[int]]:
        """Connected components, each sorted, ordered by smallest member."""
        if len(self) == 0:
            return []
        _, labels = connected_components(self.matrix, directed=False)
        groups: dict[int, list[int]] = {}
        for node, label in enumerate(labels):
            groups.setdefault(int(label), []).append(node)
        return sorted(groups.values(), key=lambda members: members[0])


@dataclass
class InvertedIndex:
    """Segment -> postings ``[(trajectory index, weight), ...]`` sorted by trajectory index."""

    postings: dict[str, list[tuple[int, float]]]

    @classmethod
    def from_profiles(cls, profiles: Sequence[WeightVector]) -> InvertedIndex:
        postings: dict[str, list[tuple[int, float]]] = defaultdict(list)
        for i, profile in enumerate(profiles):
            for e, w in profile.weights.items():
                postings[e].append((i, w))
        return cls({e: postings[e] for e in sorted(postings)})

    def candidate_pairs(self) -> set[tuple[int, int]]:
        """All pairs ``(i, j)``, ``i < j``, sharing at least one weighted segment."""
        pairs: set[tuple[int, int]] = set()
        for plist in self.postings.values():
            for a in range(len(plist)):
                for b in range(a + 1, len(plist)):
                    pairs.add((plist[a][0], plist[b][0]))
        return pairs

    def accumulate(self) -> dict[tuple[int, int], float]:
        """Sparse dot products of every candidate pair, summed in segment-id order."""
        dots: dict[tuple[int, int], float] = defaultdict(float)
        for plist in self.postings.values():
            for a in range(len(plist)):
                i, wi = plist[a]
                for b in range(a + 1, len(plist)):
                    j, wj = plist[b]
                    dots[(i, j)] += wi * wj
        return dots


def cosine_similarity(p: WeightVector, q: WeightVector) -> float:
    """Cosine of two sparse profiles; 0 if either has zero norm."""
    if p.norm == 0.0 or q.norm == 0.0:
        return 0.0
    common = sorted(p.weights.keys() & q.weights.keys())
    if not common:
        return 0.0
    dot = math.fsum(p.weights[e] * q.weights[e] for e in common)
    return min(1.0, max(0.0, dot / (p.norm * q.norm)))


def _support(x: Trajectory | WeightVector | AbstractSet[str]) -> AbstractSet[str]:
    if isinstance(x, Trajectory):
        return x.segments
    if isinstance(x, WeightVector):
        return x.weights.keys()
    return x


def jaccard_similarity(a: Trajectory | WeightVector | AbstractSet[str], b: Trajectory | WeightVector | AbstractSet[str]) -> float:
    """|S1 ∩ S2| / |S1 ∪ S2| over distinct segments; 1 when both are empty."""
    s1, s2 = _support(a), _support(b)
    union = len(s1 | s2)
    if union == 0:
        return 1.0
    return len(s1 & s2) / union


def pair_similarity(p: WeightVector, q: WeightVector, scheme: str) -> float:
    """Similarity of two profiles built with ``profile_scheme(scheme)``."""
    if profile_scheme(scheme) == "binary":
        return jaccard_similarity(p, q)
    return cosine_similarity(p, q)


def distance(p: WeightVector, q: WeightVector, scheme: str) -> float:
    """``1 - similarity``, the dissimilarity used by the agglomerative baseline."""
    return 1.0 - pair_similarity(p, q, scheme)


def build_similarity_graph(
    ts: TrajectorySet,
    scheme: str = "spatial",
    *,
    min_similarity: float = 0.0,
    stats: CorpusStats | None = None,
    profiles: Sequence[WeightVector] | None = None,
) -> SimilarityGraph:
    """Assemble G_Sim over all trajectories of ``ts`` (isolated ones included).

    An edge is kept iff the similarity is > 0 and >= ``min_similarity``.
    """
    if min_similarity < 0 or min_similarity > 1:
        raise ValidationError(f"min_similarity must lie in [0, 1], got {min_similarity}")
    if profiles is None:
        profiles = compute_profiles(ts, profile_scheme(scheme), stats or corpus_stats(ts))
    elif len(profiles) != len(ts):
        raise ValidationError("one profile per trajectory is required")

    index = InvertedIndex.from_profiles(profiles)
    dots = index.accumulate()
    jaccard = profile_scheme(scheme) == "binary"

    edges: list[tuple[int, int, float]] = []
    for (i, j), dot in sorted(dots.items()):
        if jaccard:
            union = len(profiles[i]) + len(profiles[j]) - dot
            sim = dot / union
        else:
            sim = min(1.0, dot / (profiles[i].norm * profiles[j].norm))
        if sim > 0.0 and sim >= min_similarity:
            edges.append((i, j, sim))

    graph = SimilarityGraph.from_edges(ts.ids, edges)
    logger.info(
        "similarity graph (%s): %d nodes, %d edges from %d candidate pairs",
        scheme, len(graph), graph.n_edges, len(dots),
    )
    return graph


def write_graph(graph: SimilarityGraph, path: str) -> None:
    """Dump ``traj_i,traj_j,weight`` with ``traj_i < traj_j``, sorted."""
    rows = []
    for i, j, w in graph.edges():
        a, b = graph.node_ids[i], graph.node_ids[j]
        rows.append((a, b, w) if a < b else (b, a, w))
    rows.sort()
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(("traj_i", "traj_j", "weight"))
        for a, b, w in rows:
            writer.writerow([a, b, repr(w)])
