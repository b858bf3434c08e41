"""Weighted modularity, greedy agglomerative optimization, and null-model validation."""

from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass

import numpy as np

from trajmod.errors import ValidationError
from trajmod.partition import Partition
from trajmod.seeding import derive_seed
from trajmod.similarity import SimilarityGraph

logger = logging.getLogger(__name__)


def modularity(g: SimilarityGraph, p: Partition) -> float:
    """Newman-Girvan modularity ``Q = sum_c [w_in(c)/m - (w_tot(c)/2m)^2]``.

    ``m`` is the total edge weight, ``w_in(c)`` the weight of edges inside c and
    ``w_tot(c)`` the summed weighted degree of c. ``Q = 0`` when ``m = 0``.
    """
    labels = p.labels_for(g.node_ids)
    two_m = g.total_weight_2m
    if two_m == 0.0:
        return 0.0
    k = int(labels.max()) + 1 if len(labels) else 0
    coo = g.matrix.tocoo()
    rows, cols = np.asarray(coo.row), np.asarray(coo.col)
    inside = labels[rows] == labels[cols]
    # Each undirected edge appears twice in the symmetric matrix.
    w_in_twice = np.bincount(labels[rows[inside]], weights=coo.data[inside], minlength=k)
    w_tot = np.bincount(labels, weights=g.degrees, minlength=k)
    return float(np.sum(w_in_twice / two_m - (w_tot / two_m) ** 2))


@dataclass(frozen=True)
class Merge:
    """Community ``right`` absorbed into ``left`` (``left < right``) for a gain ``delta_q``."""

    left: int
    right: int
    delta_q: float


@dataclass(frozen=True)
class GreedyResult:
    partition: Partition
    merges: tuple[Merge, ...]
    modularity: float


def greedy_merges(g: SimilarityGraph) -> GreedyResult:
    """Agglomerative modularity maximization from singletons.

    Repeatedly merges the linked community pair with the largest positive
    ``dQ = w_ab/m - w_tot(a) * w_tot(b) / (2 m^2)``; ties go to the smallest
    ``(a, b)`` id pair and the merged community keeps id ``a``. Only linked
    pairs can have ``dQ > 0``, so unlinked pairs are never tracked.
    """
    n = len(g)
    if n == 0:
        raise ValidationError("cannot partition an empty graph")
    m = g.total_weight
    singletons = Partition.singletons(g.node_ids)
    if m == 0.0:
        return GreedyResult(singletons, (), 0.0)

    tot = g.degrees.tolist()
    links: list[dict[int, float]] = [{} for _ in range(n)]
    for i, j, w in g.edges():
        links[i][j] = w
        links[j][i] = w
    stamp = [0] * n
    alive = [True] * n
    members: list[list[int]] = [[i] for i in range(n)]
    scale = 1.0 / (2.0 * m * m)

    def gain(a: int, b: int) -> float:
        return links[a][b] / m - tot[a] * tot[b] * scale

    heap = [(-gain(a, b), a, b, 0, 0) for a in range(n) for b in links[a] if a < b]
    heapq.heapify(heap)

    q = float(-np.sum((g.degrees / (2.0 * m)) ** 2))
    merges: list[Merge] = []
    while heap:
        neg, a, b, sa, sb = heapq.heappop(heap)
        if not (alive[a] and alive[b]) or stamp[a] != sa or stamp[b] != sb:
            continue
        dq = -neg
        if dq <= 0.0:
            break

        for x, w in links[b].items():
            if x == a:
                continue
            merged = links[a].get(x, 0.0) + w
            links[a][x] = merged
            links[x][a] = merged
            del links[x][b]
        del links[a][b]
        links[b] = {}
        tot[a] += tot[b]
        tot[b] = 0.0
        alive[b] = False
        stamp[a] += 1
        members[a].extend(members[b])
        members[b] = []
        merges.append(Merge(a, b, dq))
        q += dq

        for x in links[a]:
            lo, hi = (a, x) if a < x else (x, a)
            heapq.heappush(heap, (-gain(lo, hi), lo, hi, stamp[lo], stamp[hi]))

    rep = [0] * n
    for a in range(n):
        for node in members[a]:
            rep[node] = a
    partition = Partition.from_labels(g.node_ids, rep)
    return GreedyResult(partition, tuple(merges), q)


def greedy_partition(g: SimilarityGraph) -> Partition:
    return greedy_merges(g).partition


def randomize_graph(g: SimilarityGraph, seed: int, swaps_per_edge: int = 10) -> SimilarityGraph:
    """Degree-preserving rewiring by double-edge swaps.

    Each of the ``swaps_per_edge * |E|`` attempts picks two edges ``a-b`` and
    ``c-d`` and rewires them to ``a-d`` and ``c-b``; every new edge keeps the
    weight of the edge whose first endpoint it retains, so unweighted degrees
    and the multiset of weights are preserved. Swaps that would create a
    self-loop or a parallel edge are rejected.
    """
    edges = g.edges()
    n_edges = len(edges)
    if n_edges < 2:
        return SimilarityGraph(g.node_ids, g.matrix.copy())
    n = len(g)
    src = [e[0] for e in edges]
    dst = [e[1] for e in edges]
    weights = [e[2] for e in edges]
    present = {min(a, b) * n + max(a, b) for a, b in zip(src, dst)}

    attempts = swaps_per_edge * n_edges
    rng = np.random.default_rng(seed)
    picks = rng.integers(0, n_edges, size=(attempts, 2)).tolist()
    flips = rng.integers(0, 2, size=attempts).tolist()
    done = 0
    for (i, j), flip in zip(picks, flips):
        if i == j:
            continue
        a, b = src[i], dst[i]
        c, d = (dst[j], src[j]) if flip else (src[j], dst[j])
        if a == d or c == b:
            continue
        new1 = min(a, d) * n + max(a, d)
        new2 = min(c, b) * n + max(c, b)
        if new1 == new2 or new1 in present or new2 in present:
            continue
        present.discard(min(a, b) * n + max(a, b))
        present.discard(min(c, d) * n + max(c, d))
        present.add(new1)
        present.add(new2)
        src[i], dst[i] = a, d
        src[j], dst[j] = c, b
        done += 1
    logger.debug("rewired %d/%d swap attempts", done, attempts)
    return SimilarityGraph.from_edges(g.node_ids, zip(src, dst, weights))


@dataclass(frozen=True)
class NullStats:
    observed: float
    mean: float
    std: float
    replicates: int
    null_values: tuple[float, ...]

    def passes(self, z: float) -> bool:
        if self.std == 0.0:
            return self.observed > self.mean
        return self.observed > self.mean + z * self.std


def null_statistics(
    g: SimilarityGraph,
    p: Partition,
    replicates: int = 20,
    seed: int = 0,
    swaps_per_edge: int = 10,
) -> NullStats:
    """Observed Q of ``p`` against greedy Q on ``replicates`` rewired graphs.

    Replicate ``r`` is rewired with ``derive_seed(seed, "null", r)``; the
    spread is the sample standard deviation.
    """
    if replicates < 2:
        raise ValidationError(f"null-model validation needs at least 2 replicates, got {replicates}")
    observed = modularity(g, p)
    values = []
    for r in range(replicates):
        null_graph = randomize_graph(g, derive_seed(seed, "null", r), swaps_per_edge)
        values.append(modularity(null_graph, greedy_partition(null_graph)))
    if max(values) == min(values):
        mean, std = values[0], 0.0
    else:
        mean = math.fsum(values) / replicates
        std = float(np.std(np.asarray(values), ddof=1))
    return NullStats(observed, mean, std, replicates, tuple(values))


def validate_partition(
    g: SimilarityGraph,
    p: Partition,
    replicates: int = 20,
    z: float = 2.0,
    seed: int = 0,
    swaps_per_edge: int = 10,
) -> bool:
    """True iff Q of ``p`` exceeds the null mean by more than ``z`` null standard deviations."""
    if p.k < 2:
        raise ValidationError("validation needs a partition with at least two communities")
    return null_statistics(g, p, replicates, seed, swaps_per_edge).passes(z)
