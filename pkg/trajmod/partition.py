"""Flat clusterings of trajectories and their ``traj_id,cluster_id`` files."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from trajmod.errors import DataFormatError, ValidationError

ASSIGNMENT_FIELDS = ("traj_id", "cluster_id")


@dataclass(frozen=True)
class Partition:
    """Assignment of every element to a community id in ``0..k-1``.

    Ids are dense and numbered by first appearance in ``assignment`` order.
    """

    assignment: Mapping[str, int]

    def __post_init__(self) -> None:
        used = set(self.assignment.values())
        if used != set(range(len(used))):
            raise ValidationError("community ids must be dense 0..k-1")

    @classmethod
    def from_labels(cls, ids: Sequence[str], labels: Iterable[object]) -> Partition:
        """Relabel arbitrary hashable labels densely by first appearance."""
        dense: dict[object, int] = {}
        assignment: dict[str, int] = {}
        for traj_id, label in zip(ids, labels, strict=True):
            if traj_id in assignment:
                raise ValidationError(f"duplicate element {traj_id!r}")
            assignment[traj_id] = dense.setdefault(label, len(dense))
        return cls(assignment)

    @classmethod
    def from_clusters(cls, clusters: Iterable[Iterable[str]]) -> Partition:
        ids: list[str] = []
        labels: list[int] = []
        for c, members in enumerate(clusters):
            for traj_id in members:
                ids.append(traj_id)
                labels.append(c)
        return cls.from_labels(ids, labels)

    @classmethod
    def single(cls, ids: Sequence[str]) -> Partition:
        return cls.from_labels(ids, [0] * len(ids))

    @classmethod
    def singletons(cls, ids: Sequence[str]) -> Partition:
        return cls.from_labels(ids, range(len(ids)))

    def __len__(self) -> int:
        return len(self.assignment)

    @property
    def k(self) -> int:
        return len(set(self.assignment.values()))

    @property
    def ids(self) -> list[str]:
        return list(self.assignment)

    def labels_for(self, ids: Sequence[str]) -> np.ndarray:
        """Community labels aligned with ``ids``; the element sets must coincide."""
        if len(ids) != len(self.assignment) or set(ids) != self.assignment.keys():
            raise ValidationError("partition does not cover exactly the given elements")
        return np.fromiter((self.assignment[i] for i in ids), dtype=np.int64, count=len(ids))

    def clusters(self) -> list[list[str]]:
        """Members of each community, indexed by community id."""
        out: list[list[str]] = [[] for _ in range(self.k)]
        for traj_id, c in self.assignment.items():
            out[c].append(traj_id)
        return out

    def sizes(self) -> list[int]:
        return [len(c) for c in self.clusters()]

    def restricted(self, ids: Sequence[str]) -> Partition:
        """This partition reordered to ``ids`` and relabeled densely."""
        return Partition.from_labels(ids, self.labels_for(ids))


def write_assignment(p: Partition, path: str, order: Sequence[str] | None = None) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(ASSIGNMENT_FIELDS)
        for traj_id in order if order is not None else p.assignment:
            writer.writerow([traj_id, p.assignment[traj_id]])


def read_assignment(path: str) -> Partition:
    if not os.path.isfile(path):
        raise DataFormatError(path, "file not found")
    ids: list[str] = []
    labels: list[str] = []
    seen: set[str] = set()
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        if [c for c in ASSIGNMENT_FIELDS if c not in (reader.fieldnames or [])]:
            raise DataFormatError(path, f"expected header {','.join(ASSIGNMENT_FIELDS)}", line=1)
        for row in reader:
            traj_id = (row["traj_id"] or "").strip()
            if not traj_id or row["cluster_id"] is None:
                raise DataFormatError(path, "incomplete row", line=reader.line_num)
            if traj_id in seen:
                raise DataFormatError(path, f"duplicate trajectory id {traj_id!r}", line=reader.line_num)
            seen.add(traj_id)
            ids.append(traj_id)
            labels.append(row["cluster_id"].strip())
    if not ids:
        raise DataFormatError(path, "empty assignment")
    return Partition.from_labels(ids, labels)
