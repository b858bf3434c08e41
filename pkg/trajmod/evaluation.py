"""Cluster quality: length-weighted overlaps, endpoint inertia, and adjusted Rand index."""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import asdict, dataclass
from typing import Literal, Mapping, Sequence

import numpy as np
from scipy.special import comb

from trajmod.errors import ValidationError
from trajmod.network import RoadNetwork
from trajmod.partition import Partition
from trajmod.trajectories import Trajectory, TrajectorySet, end_point, start_point

REPORT_FIELDS = (
    "method",
    "k",
    "intraclass_overlap",
    "interclass_overlap",
    "start_intra",
    "start_inter",
    "start_total",
    "end_intra",
    "end_inter",
    "end_total",
    "ari",
)


def _distinct_length(segments: frozenset[str], net: RoadNetwork) -> float:
    return math.fsum(net.length(e) for e in sorted(segments))


def pair_overlap(t: Trajectory, t_other: Trajectory, net: RoadNetwork) -> float:
    """Share of ``t``'s distinct length that ``t_other`` also travels (asymmetric)."""
    shared = t.segments & t_other.segments
    if not shared:
        return 0.0
    return _distinct_length(shared, net) / _distinct_length(t.segments, net)


def _clusters(p: Partition, ts: TrajectorySet) -> list[list[Trajectory]]:
    labels = p.labels_for(ts.ids)
    out: list[list[Trajectory]] = [[] for _ in range(p.k)]
    for traj, c in zip(ts, labels):
        out[c].append(traj)
    return out


def intraclass_overlap(p: Partition, ts: TrajectorySet) -> float:
    """``sum_C 1/|C| sum_{Ti != Tj in C} overlap(Ti, Tj)`` over ordered pairs.

    For a member T, the inner sum over the other members equals the length of
    each distinct segment of T times the number of other members containing it.
    """
    net = ts.network
    total = []
    for members in _clusters(p, ts):
        if len(members) < 2:
            continue
        counts: Counter[str] = Counter()
        for traj in members:
            counts.update(traj.segments)
        acc = []
        for traj in members:
            shared = math.fsum(net.length(e) * (counts[e] - 1) for e in sorted(traj.segments))
            acc.append(shared / _distinct_length(traj.segments, net))
        total.append(math.fsum(acc) / len(members))
    return math.fsum(total)


def interclass_overlap(p: Partition, ts: TrajectorySet) -> float:
    """``sum_Ci 1/(|T| - |Ci|) sum_{j != i} sum_{T in Ci, T' in Cj} overlap(T, T')``.

    A cluster holding every trajectory contributes 0.
    """
    net = ts.network
    n = len(ts)
    df: Counter[str] = Counter()
    for traj in ts:
        df.update(traj.segments)
    total = []
    for members in _clusters(p, ts):
        outside = n - len(members)
        if outside == 0:
            continue
        counts: Counter[str] = Counter()
        for traj in members:
            counts.update(traj.segments)
        acc = []
        for traj in members:
            shared = math.fsum(net.length(e) * (df[e] - counts[e]) for e in sorted(traj.segments))
            acc.append(shared / _distinct_length(traj.segments, net))
        total.append(math.fsum(acc) / outside)
    return math.fsum(total)


@dataclass(frozen=True)
class Inertia:
    intra: float
    inter: float
    total: float


def inertia(p: Partition, ts: TrajectorySet, which: Literal["start", "end"] = "start") -> Inertia:
    """Within-cluster, between-cluster and total inertia of start or end points (m^2)."""
    if which not in ("start", "end"):
        raise ValidationError(f"which must be 'start' or 'end', got {which!r}")
    point = start_point if which == "start" else end_point
    labels = p.labels_for(ts.ids)
    pts = np.array([point(t, ts.network) for t in ts], dtype=np.float64)
    k = p.k
    counts = np.bincount(labels, minlength=k).astype(np.float64)
    centroids = np.stack(
        [np.bincount(labels, weights=pts[:, dim], minlength=k) / counts for dim in range(2)],
        axis=1,
    )
    mean = pts.mean(axis=0)
    intra = float(np.sum((pts - centroids[labels]) ** 2))
    inter = float(np.sum(counts * np.sum((centroids - mean) ** 2, axis=1)))
    total = float(np.sum((pts - mean) ** 2))
    return Inertia(intra, inter, total)


def adjusted_rand_index(p: Partition, q: Partition) -> float:
    """Adjusted Rand index from the contingency table of ``p`` and ``q``.

    When both partitions are trivial in the same way (the expected index equals
    its maximum) the value is 1.
    """
    if p.assignment.keys() != q.assignment.keys():
        raise ValidationError("partitions cover different elements")
    ids = list(p.assignment)
    a = p.labels_for(ids)
    b = q.labels_for(ids)
    table = np.zeros((p.k, q.k), dtype=np.int64)
    np.add.at(table, (a, b), 1)
    sum_cells = float(comb(table, 2).sum())
    sum_rows = float(comb(table.sum(axis=1), 2).sum())
    sum_cols = float(comb(table.sum(axis=0), 2).sum())
    pairs = float(comb(len(ids), 2))
    if pairs == 0:
        return 1.0
    expected = sum_rows * sum_cols / pairs
    maximum = (sum_rows + sum_cols) / 2.0
    if maximum == expected:
        return 1.0
    return (sum_cells - expected) / (maximum - expected)


@dataclass(frozen=True)
class EvaluationReport:
    k: int
    intraclass_overlap: float
    interclass_overlap: float
    start: Inertia
    end: Inertia
    ari: float | None = None

    def row(self, method: str) -> dict[str, object]:
        return {
            "method": method,
            "k": self.k,
            "intraclass_overlap": self.intraclass_overlap,
            "interclass_overlap": self.interclass_overlap,
            **{f"start_{key}": value for key, value in asdict(self.start).items()},
            **{f"end_{key}": value for key, value in asdict(self.end).items()},
            "ari": "" if self.ari is None else self.ari,
        }


def evaluate(p: Partition, ts: TrajectorySet, labels: Mapping[str, object] | None = None) -> EvaluationReport:
    """All metrics for ``p``; ARI only when planted ``labels`` are given."""
    p = p.restricted(ts.ids)
    ari = None
    if labels is not None:
        truth = Partition.from_labels(list(labels), list(labels.values())).restricted(ts.ids)
        ari = adjusted_rand_index(p, truth)
    return EvaluationReport(
        k=p.k,
        intraclass_overlap=intraclass_overlap(p, ts),
        interclass_overlap=interclass_overlap(p, ts),
        start=inertia(p, ts, "start"),
        end=inertia(p, ts, "end"),
        ari=ari,
    )


def write_report(rows: Sequence[Mapping[str, object]], path: str) -> None:
    """One row per (method, k), Table-1 style."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=REPORT_FIELDS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: (repr(v) if isinstance(v, float) else v) for key, v in row.items()})


def most_visited_segment(ts: TrajectorySet) -> str:
    """Segment travelled by the most trajectories; ties go to the smallest edge id."""
    df: Counter[str] = Counter()
    for traj in ts:
        df.update(traj.segments)
    return min(df, key=lambda e: (-df[e], e))


def clusters_through(p: Partition, ts: TrajectorySet, edge_id: str) -> list[int]:
    """Community ids of ``p`` holding at least one trajectory that visits ``edge_id``."""
    ts.network.edge(edge_id)
    return sorted({p.assignment[t.id] for t in ts if edge_id in t.segments})
