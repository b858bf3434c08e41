"""GeoJSON export of clusters: trajectories as line strings plus departure and arrival points.

Coordinates are the network's planar (x, y) meters, not longitude/latitude.
"""

from __future__ import annotations

import json
import os
from typing import Any

from trajmod.network import RoadNetwork
from trajmod.partition import Partition
from trajmod.trajectories import Trajectory, TrajectorySet, end_point, start_point


class Feature:
    """A GeoJSON Feature."""

    def __init__(self, geometry_type: str, coords: Any, **properties: Any):
        self.feature = {
            "type": "Feature",
            "properties": dict(properties),
            "geometry": {"type": geometry_type, "coordinates": coords},
        }


class FeatureCollection:
    """A GeoJSON FeatureCollection."""

    def __init__(self, **properties: Any):
        self.collection: dict[str, Any] = {"type": "FeatureCollection", "properties": dict(properties), "features": []}

    def add(self, feature: Feature) -> None:
        self.collection["features"].append(feature.feature)

    def __len__(self) -> int:
        return len(self.collection["features"])

    def dump(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.collection, f, indent=2)
            f.write("\n")


def line_coords(traj: Trajectory, net: RoadNetwork) -> list[list[float]]:
    """Node coordinate chain of ``traj``; a gap between segments keeps both endpoints."""
    coords: list[list[float]] = []
    last_node: str | None = None
    for visit in traj.visits:
        edge = net.edge(visit.edge_id)
        if edge.source != last_node:
            coords.append(list(net.coords(edge.source)))
        coords.append(list(net.coords(edge.target)))
        last_node = edge.target
    return coords


def cluster_collections(
    p: Partition,
    ts: TrajectorySet,
    through: str | None = None,
) -> dict[int, FeatureCollection]:
    """One FeatureCollection per cluster.

    With ``through``, only trajectories visiting that segment are drawn and
    clusters without such trajectories are skipped.
    """
    net = ts.network
    labels = p.labels_for(ts.ids)
    collections: dict[int, FeatureCollection] = {}
    for traj, cluster in zip(ts, labels.tolist()):
        if through is not None and through not in traj.segments:
            continue
        fc = collections.setdefault(cluster, FeatureCollection(cluster_id=cluster))
        fc.add(Feature("LineString", line_coords(traj, net), traj_id=traj.id, cluster_id=cluster, role="trajectory"))
        fc.add(Feature("Point", list(start_point(traj, net)), traj_id=traj.id, cluster_id=cluster, role="departure"))
        fc.add(Feature("Point", list(end_point(traj, net)), traj_id=traj.id, cluster_id=cluster, role="arrival"))
    return dict(sorted(collections.items()))


def export_geojson(p: Partition, ts: TrajectorySet, out_dir: str, through: str | None = None) -> list[str]:
    """Write ``cluster_<id>.geojson`` files into ``out_dir``; returns their paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for cluster, fc in cluster_collections(p, ts, through).items():
        path = os.path.join(out_dir, f"cluster_{cluster}.geojson")
        fc.dump(path)
        paths.append(path)
    return paths
