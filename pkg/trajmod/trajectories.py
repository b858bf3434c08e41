"""Network-constrained trajectories: loading, validation, indexing and endpoints."""

from __future__ import annotations

import csv
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from trajmod.errors import DataFormatError, ValidationError
from trajmod.network import RoadNetwork

logger = logging.getLogger(__name__)

TRAJECTORY_FIELDS = ("traj_id", "seq", "timestamp", "edge_id")
LABEL_FIELDS = ("traj_id", "corridor_id")


@dataclass(frozen=True)
class Visit:
    t: float
    edge_id: str


@dataclass(frozen=True)
class Trajectory:
    """Ordered, timestamped sequence of visited segments ``{(t1, e1), ..., (tn, en)}``."""

    id: str
    visits: tuple[Visit, ...]

    def __post_init__(self) -> None:
        if not self.visits:
            raise ValidationError(f"trajectory {self.id!r} is empty")
        for prev, nxt in zip(self.visits, self.visits[1:]):
            if nxt.t < prev.t:
                raise ValidationError(f"trajectory {self.id!r} has decreasing timestamps")

    @classmethod
    def from_edges(cls, traj_id: str, edge_ids: Sequence[str], timestamps: Sequence[float] | None = None) -> Trajectory:
        ts = timestamps if timestamps is not None else range(len(edge_ids))
        return cls(traj_id, tuple(Visit(float(t), e) for t, e in zip(ts, edge_ids, strict=True)))

    def __len__(self) -> int:
        return len(self.visits)

    @property
    def edge_ids(self) -> list[str]:
        return [v.edge_id for v in self.visits]

    @property
    def segments(self) -> frozenset[str]:
        """Distinct segments (set semantics)."""
        return frozenset(v.edge_id for v in self.visits)


@dataclass(frozen=True)
class LoadReport:
    n_trajectories: int
    n_visits: int
    n_distinct_segments: int
    n_gaps: int = 0


@dataclass(frozen=True)
class TrajectorySet:
    """The dataset of trajectories, with unique ids, bound to its road network."""

    trajectories: tuple[Trajectory, ...]
    network: RoadNetwork
    report: LoadReport | None = field(default=None, compare=False)
    _index: Mapping[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.trajectories:
            raise ValidationError("a trajectory set needs at least one trajectory")
        index: dict[str, int] = {}
        for i, traj in enumerate(self.trajectories):
            if traj.id in index:
                raise ValidationError(f"duplicate trajectory id {traj.id!r}")
            index[traj.id] = i
            for visit in traj.visits:
                if not self.network.has_edge(visit.edge_id):
                    raise ValidationError(f"trajectory {traj.id!r} visits unknown edge {visit.edge_id!r}")
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.trajectories)

    def __iter__(self):
        return iter(self.trajectories)

    def __getitem__(self, i: int) -> Trajectory:
        return self.trajectories[i]

    @property
    def ids(self) -> list[str]:
        return [t.id for t in self.trajectories]

    def index_of(self, traj_id: str) -> int:
        try:
            return self._index[traj_id]
        except KeyError:
            raise ValidationError(f"unknown trajectory id {traj_id!r}") from None

    def get(self, traj_id: str) -> Trajectory:
        return self.trajectories[self.index_of(traj_id)]

    def distinct_segments(self) -> set[str]:
        out: set[str] = set()
        for traj in self.trajectories:
            out.update(traj.segments)
        return out


def count_gaps(traj: Trajectory, net: RoadNetwork) -> int:
    """Number of consecutive visit pairs that are not head-to-tail adjacent."""
    edges = traj.edge_ids
    return sum(1 for a, b in zip(edges, edges[1:]) if net.edge(a).target != net.edge(b).source)


def load_trajectories(path: str, net: RoadNetwork, strict_connectivity: bool = False) -> TrajectorySet:
    """Load the long-format ``traj_id,seq,timestamp,edge_id`` CSV.

    Rows of one trajectory must be contiguous with ``seq`` counting from 0.
    With ``strict_connectivity`` a gap between consecutive edges is an error;
    otherwise gaps are tolerated and counted in the load report.
    """
    if not os.path.isfile(path):
        raise DataFormatError(path, "file not found")

    grouped: list[tuple[str, int, list[Visit]]] = []
    seen: set[str] = set()
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        header = reader.fieldnames or []
        missing = [c for c in TRAJECTORY_FIELDS if c not in header]
        if missing:
            raise DataFormatError(path, f"missing columns {missing}; expected header {','.join(TRAJECTORY_FIELDS)}", line=1)
        for row in reader:
            line = reader.line_num
            if None in row or any(row[c] is None for c in TRAJECTORY_FIELDS):
                raise DataFormatError(path, "wrong number of fields", line=line)
            traj_id = row["traj_id"].strip()
            edge_id = row["edge_id"].strip()
            try:
                seq = int(row["seq"])
                t = float(row["timestamp"])
            except ValueError:
                raise DataFormatError(path, f"bad seq/timestamp in trajectory {traj_id!r}", line=line) from None
            if not math.isfinite(t):
                raise DataFormatError(path, f"non-finite timestamp in trajectory {traj_id!r}", line=line)
            if not net.has_edge(edge_id):
                raise DataFormatError(path, f"trajectory {traj_id!r} visits unknown edge {edge_id!r}", line=line)

            if not grouped or grouped[-1][0] != traj_id:
                if traj_id in seen:
                    raise DataFormatError(path, f"duplicate trajectory id {traj_id!r} (rows not contiguous)", line=line)
                seen.add(traj_id)
                grouped.append((traj_id, line, []))
            visits = grouped[-1][2]
            if seq != len(visits):
                raise DataFormatError(path, f"trajectory {traj_id!r}: expected seq {len(visits)}, got {seq}", line=line)
            if visits and t < visits[-1].t:
                raise DataFormatError(path, f"trajectory {traj_id!r}: decreasing timestamp", line=line)
            visits.append(Visit(t, edge_id))

    if not grouped:
        raise DataFormatError(path, "no trajectories")

    trajectories = []
    n_gaps = 0
    for traj_id, line, visits in grouped:
        traj = Trajectory(traj_id, tuple(visits))
        gaps = count_gaps(traj, net)
        if gaps and strict_connectivity:
            raise DataFormatError(path, f"trajectory {traj_id!r} is not a connected walk ({gaps} gaps)", line=line)
        n_gaps += gaps
        trajectories.append(traj)

    report = LoadReport(
        n_trajectories=len(trajectories),
        n_visits=sum(len(t) for t in trajectories),
        n_distinct_segments=len({v.edge_id for t in trajectories for v in t.visits}),
        n_gaps=n_gaps,
    )
    if n_gaps:
        logger.warning("%s: %d non-adjacent consecutive segment pairs tolerated", path, n_gaps)
    logger.info(
        "loaded %d trajectories (%d visits, %d distinct segments)",
        report.n_trajectories, report.n_visits, report.n_distinct_segments,
    )
    return TrajectorySet(tuple(trajectories), net, report)


def save_trajectories(ts: TrajectorySet | Iterable[Trajectory], path: str) -> None:
    """Write trajectories in the long CSV format; floats use ``repr`` so reloads are exact."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(TRAJECTORY_FIELDS)
        for traj in ts:
            for seq, visit in enumerate(traj.visits):
                writer.writerow([traj.id, seq, repr(visit.t), visit.edge_id])


def start_point(traj: Trajectory, net: RoadNetwork) -> tuple[float, float]:
    """Coordinates of the tail node of the first segment."""
    return net.coords(net.edge(traj.visits[0].edge_id).source)


def end_point(traj: Trajectory, net: RoadNetwork) -> tuple[float, float]:
    """Coordinates of the head node of the last segment."""
    return net.coords(net.edge(traj.visits[-1].edge_id).target)


def read_labels(path: str) -> dict[str, str]:
    """Read a ``traj_id,corridor_id`` file into a mapping."""
    if not os.path.isfile(path):
        raise DataFormatError(path, "file not found")
    labels: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        if [c for c in LABEL_FIELDS if c not in (reader.fieldnames or [])]:
            raise DataFormatError(path, f"expected header {','.join(LABEL_FIELDS)}", line=1)
        for row in reader:
            traj_id = (row["traj_id"] or "").strip()
            if traj_id in labels:
                raise DataFormatError(path, f"duplicate trajectory id {traj_id!r}", line=reader.line_num)
            labels[traj_id] = (row["corridor_id"] or "").strip()
    return labels


def write_labels(labels: Mapping[str, object], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(LABEL_FIELDS)
        for traj_id, label in labels.items():
            writer.writerow([traj_id, label])
