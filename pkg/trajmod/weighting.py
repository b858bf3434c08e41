"""TF-IDF style segment weighting of trajectories (bags of segments).

Three schemes are supported:

- ``spatial``: the length-based term frequency of a segment in a trajectory,
  ``c_e * length(e) / sum of visited lengths``, times ``ln(|T| / df(e))``;
- ``classic``: textbook TF-IDF, ``c_e / n`` times the same IDF;
- ``binary``: weight 1 for every distinct segment (the Jaccard representation).
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Literal, Mapping

from trajmod.errors import ValidationError
from trajmod.network import RoadNetwork
from trajmod.trajectories import Trajectory, TrajectorySet

Scheme = Literal["spatial", "classic", "binary"]
SCHEMES: tuple[str, ...] = ("spatial", "classic", "binary")


@dataclass(frozen=True)
class CorpusStats:
    """Corpus size and per-segment document frequency (set semantics)."""

    n_trajectories: int
    doc_freq: Mapping[str, int]

    def idf(self, edge_id: str) -> float:
        try:
            df = self.doc_freq[edge_id]
        except KeyError:
            raise ValidationError(f"segment {edge_id!r} missing from corpus statistics") from None
        return math.log(self.n_trajectories / df)


@dataclass(frozen=True)
class WeightVector:
    """Sparse segment -> weight profile of one trajectory; zero weights are omitted."""

    owner: str
    weights: Mapping[str, float]
    norm: float

    @classmethod
    def from_weights(cls, owner: str, weights: Mapping[str, float]) -> WeightVector:
        kept = {e: float(w) for e, w in sorted(weights.items()) if w != 0.0}
        for e, w in kept.items():
            if w < 0 or not math.isfinite(w):
                raise ValidationError(f"weight of {e!r} in {owner!r} must be finite and non-negative")
        return cls(owner, kept, math.sqrt(math.fsum(w * w for w in kept.values())))

    def __len__(self) -> int:
        return len(self.weights)


def corpus_stats(ts: TrajectorySet | Iterable[Trajectory]) -> CorpusStats:
    doc_freq: Counter[str] = Counter()
    n = 0
    for traj in ts:
        n += 1
        doc_freq.update(traj.segments)
    return CorpusStats(n, dict(sorted(doc_freq.items())))


def compute_profile(traj: Trajectory, stats: CorpusStats, scheme: Scheme, net: RoadNetwork) -> WeightVector:
    """Weight vector of ``traj`` under ``scheme``.

    Term frequencies use bag semantics (a repeated segment counts once per
    visit, and its length is summed once per visit in the denominator).
    """
    counts = Counter(traj.edge_ids)
    for e in counts:
        if e not in stats.doc_freq:
            raise ValidationError(f"segment {e!r} of trajectory {traj.id!r} missing from corpus statistics")

    if scheme == "binary":
        return WeightVector.from_weights(traj.id, {e: 1.0 for e in counts})

    if scheme == "spatial":
        total = math.fsum(net.length(e) * c for e, c in counts.items())
        tf = {e: c * net.length(e) / total for e, c in counts.items()}
    elif scheme == "classic":
        n = len(traj)
        tf = {e: c / n for e, c in counts.items()}
    else:
        raise ValidationError(f"unknown weighting scheme {scheme!r}; expected one of {SCHEMES}")

    return WeightVector.from_weights(traj.id, {e: tf[e] * stats.idf(e) for e in tf})


def compute_profiles(ts: TrajectorySet, scheme: Scheme, stats: CorpusStats | None = None) -> list[WeightVector]:
    stats = stats or corpus_stats(ts)
    return [compute_profile(traj, stats, scheme, ts.network) for traj in ts]


def write_profiles(profiles: Iterable[WeightVector], path: str) -> None:
    """Debug dump ``traj_id,edge_id,weight`` sorted by (traj_id, edge_id)."""
    rows = sorted((p.owner, e, w) for p in profiles for e, w in p.weights.items())
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(("traj_id", "edge_id", "weight"))
        for owner, e, w in rows:
            writer.writerow([owner, e, repr(w)])
