"""Seeded synthetic trajectories with optional planted corridors."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from trajmod.errors import GeneratorError, ValidationError
from trajmod.network import RoadNetwork
from trajmod.seeding import rng_for
from trajmod.trajectories import Trajectory, TrajectorySet, Visit

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GeneratorParams:
    n: int
    corridors: int | None = None
    deviation_prob: float = 0.0
    seed: int = 0
    speed: float = 10.0
    max_retries: int = 50
    min_corridor_edges: int = 5
    max_detour_edges: int = 4

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValidationError(f"n must be >= 1, got {self.n}")
        if self.corridors is not None and self.corridors < 1:
            raise ValidationError(f"corridors must be >= 1, got {self.corridors}")
        if not 0.0 <= self.deviation_prob <= 1.0:
            raise ValidationError(f"deviation_prob must lie in [0, 1], got {self.deviation_prob}")
        if self.speed <= 0 or self.max_retries < 1 or self.min_corridor_edges < 1 or self.max_detour_edges < 1:
            raise ValidationError("speed, max_retries, min_corridor_edges and max_detour_edges must be positive")


@dataclass(frozen=True)
class SyntheticDataset:
    trajectories: TrajectorySet
    labels: dict[str, int] | None
    corridors: tuple[tuple[str, str], ...] = ()


def generate(
    net: RoadNetwork,
    n: int,
    corridors: int | Sequence[tuple[str, str]] | None = None,
    deviation_prob: float = 0.0,
    seed: int = 0,
    *,
    speed: float = 10.0,
    max_retries: int = 50,
    min_corridor_edges: int = 5,
    max_detour_edges: int = 4,
) -> SyntheticDataset:
    """Generate ``n`` trajectories on ``net``.

    With corridors, trajectory ``i`` follows corridor ``i mod k`` along the
    shortest path between its origin and destination, taking a detour at each
    intermediate node with probability ``deviation_prob``. Without corridors
    every trajectory gets its own uniformly sampled origin-destination pair.
    Timestamps assume constant ``speed`` (m/s) from t=0.
    """
    explicit = corridors if corridors is not None and not isinstance(corridors, int) else None
    params = GeneratorParams(
        n=n,
        corridors=len(explicit) if explicit is not None else corridors,
        deviation_prob=deviation_prob,
        seed=seed,
        speed=speed,
        max_retries=max_retries,
        min_corridor_edges=min_corridor_edges,
        max_detour_edges=max_detour_edges,
    )
    node_ids = sorted(net.nodes)
    if len(node_ids) < 2:
        raise GeneratorError("the network needs at least two nodes")
    width = len(str(n - 1))

    ods: list[tuple[str, str]] = []
    paths: list[list[str]] = []
    if explicit is not None:
        for origin, destination in explicit:
            path = net.shortest_path(origin, destination)
            if not path:
                raise GeneratorError(f"corridor {origin!r} -> {destination!r} is unreachable or empty")
            ods.append((origin, destination))
            paths.append(path)
    elif params.corridors is not None:
        ods, paths = _sample_corridors(net, node_ids, params)

    trajectories: list[Trajectory] = []
    labels: dict[str, int] | None = {} if paths else None
    for i in range(n):
        traj_id = f"t{i:0{width}d}"
        rng = rng_for(seed, "trajectory", i)
        if paths:
            corridor = i % len(paths)
            edges = _route(net, paths[corridor], params.deviation_prob, params.max_detour_edges, rng)
            labels[traj_id] = corridor
        else:
            edges = _sample_path(net, node_ids, params, rng, traj_id)
        trajectories.append(_stamp(net, traj_id, edges, speed))

    ts = TrajectorySet(tuple(trajectories), net)
    logger.info("generated %d trajectories over %d corridors", n, len(paths))
    return SyntheticDataset(ts, labels, tuple(ods))


def _sample_corridors(
    net: RoadNetwork, node_ids: list[str], params: GeneratorParams
) -> tuple[list[tuple[str, str]], list[list[str]]]:
    """Edge-disjoint corridors of at least ``min_corridor_edges`` edges."""
    rng = rng_for(params.seed, "corridors")
    used: set[str] = set()
    ods: list[tuple[str, str]] = []
    paths: list[list[str]] = []
    for c in range(params.corridors or 0):
        for _ in range(params.max_retries):
            a, b = rng.choice(len(node_ids), size=2, replace=False)
            origin, destination = node_ids[a], node_ids[b]
            if not net.reachable(origin, destination):
                continue
            path = net.shortest_path(origin, destination)
            if len(path) < params.min_corridor_edges or used.intersection(path):
                continue
            used.update(path)
            ods.append((origin, destination))
            paths.append(path)
            break
        else:
            raise GeneratorError(f"no disjoint reachable corridor {c} after {params.max_retries} attempts")
    return ods, paths


def _sample_path(
    net: RoadNetwork, node_ids: list[str], params: GeneratorParams, rng: np.random.Generator, traj_id: str
) -> list[str]:
    for _ in range(params.max_retries):
        a, b = rng.choice(len(node_ids), size=2, replace=False)
        if net.reachable(node_ids[a], node_ids[b]):
            return net.shortest_path(node_ids[a], node_ids[b])
    raise GeneratorError(f"no reachable origin-destination pair for {traj_id} after {params.max_retries} attempts")


def _route(net: RoadNetwork, path: list[str], prob: float, max_detour: int, rng: np.random.Generator) -> list[str]:
    """Follow ``path``, occasionally leaving it and rejoining two edges further on.

    A detour is one exit edge plus the shortest way back; it is dropped when
    the way back exceeds ``max_detour`` edges.
    """
    if prob == 0.0:
        return list(path)
    nodes = [net.edge(path[0]).source] + [net.edge(e).target for e in path]
    on_path = set(nodes)
    out: list[str] = []
    i = 0
    while i < len(path):
        if i > 0 and rng.random() < prob:
            rejoin = min(i + 2, len(path))
            exits = [e for e in net.out_edges(nodes[i]) if e.target not in on_path]
            if exits:
                exit_edge = exits[int(rng.integers(len(exits)))]
                back = net.shortest_path(exit_edge.target, nodes[rejoin])
                if back is not None and len(back) <= max_detour:
                    out.append(exit_edge.edge_id)
                    out.extend(back)
                    i = rejoin
                    continue
        out.append(path[i])
        i += 1
    return out


def _stamp(net: RoadNetwork, traj_id: str, edges: list[str], speed: float) -> Trajectory:
    visits = []
    elapsed = 0.0
    for e in edges:
        visits.append(Visit(round(elapsed / speed, 3), e))
        elapsed += net.length(e)
    return Trajectory(traj_id, tuple(visits))
