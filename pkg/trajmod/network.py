"""Directed road network: intersections, road segments, CSV I/O and shortest paths."""

from __future__ import annotations

import csv
import heapq
import logging
import math
import os
from dataclasses import dataclass
from decimal import Decimal
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

from trajmod.errors import DataFormatError, ValidationError

logger = logging.getLogger(__name__)

NODE_FIELDS = ("node_id", "x", "y")
EDGE_FIELDS = ("edge_id", "from", "to", "length", "oneway")


@dataclass(frozen=True)
class Node:
    node_id: str
    x: float
    y: float


@dataclass(frozen=True)
class Edge:
    edge_id: str
    source: str
    target: str
    length: float


class RoadNetwork:
    """Validated, immutable directed graph G=(V, E) with planar coordinates in meters.

    A two-way street is two distinct directed edges. Parallel edges between the
    same pair of intersections are allowed, so the networkx view is a
    ``MultiDiGraph`` keyed by edge id.
    """

    def __init__(self, nodes: Iterable[Node], edges: Iterable[Edge]):
        self._nodes: dict[str, Node] = {}
        for node in nodes:
            if node.node_id in self._nodes:
                raise ValidationError(f"duplicate node id {node.node_id!r}")
            self._nodes[node.node_id] = node

        self._edges: dict[str, Edge] = {}
        self._exact: dict[str, Decimal] = {}
        self._out: dict[str, list[Edge]] = {nid: [] for nid in self._nodes}
        for edge in edges:
            if edge.edge_id in self._edges:
                raise ValidationError(f"duplicate edge id {edge.edge_id!r}")
            for end in (edge.source, edge.target):
                if end not in self._nodes:
                    raise ValidationError(f"edge {edge.edge_id!r} references unknown node {end!r}")
            if not (edge.length > 0 and math.isfinite(edge.length)):
                raise ValidationError(f"edge {edge.edge_id!r} has non-positive length {edge.length}")
            self._edges[edge.edge_id] = edge
            self._exact[edge.edge_id] = Decimal(repr(edge.length))
            self._out[edge.source].append(edge)

        for out in self._out.values():
            out.sort(key=lambda e: e.edge_id)

        graph = nx.MultiDiGraph()
        for node in self._nodes.values():
            graph.add_node(node.node_id, x=node.x, y=node.y)
        for edge in self._edges.values():
            graph.add_edge(edge.source, edge.target, key=edge.edge_id, length=edge.length)
        self._graph = nx.freeze(graph)

    @property
    def nodes(self) -> dict[str, Node]:
        return dict(self._nodes)

    @property
    def edges(self) -> dict[str, Edge]:
        return dict(self._edges)

    @property
    def graph(self) -> nx.MultiDiGraph:
        """Frozen networkx view; edge keys are edge ids, ``length`` is the weight."""
        return self._graph

    def reachable(self, source: str, target: str) -> bool:
        """True if a directed path leads from ``source`` to ``target``."""
        self.node(source)
        self.node(target)
        return nx.has_path(self._graph, source, target)

    def strong_components(self) -> int:
        return nx.number_strongly_connected_components(self._graph)

    def __len__(self) -> int:
        return len(self._nodes)

    @property
    def n_edges(self) -> int:
        return len(self._edges)

    def has_node(self, node_id: str) -> bool:
        return node_id in self._nodes

    def has_edge(self, edge_id: str) -> bool:
        return edge_id in self._edges

    def node(self, node_id: str) -> Node:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise ValidationError(f"unknown node id {node_id!r}") from None

    def edge(self, edge_id: str) -> Edge:
        try:
            return self._edges[edge_id]
        except KeyError:
            raise ValidationError(f"unknown edge id {edge_id!r}") from None

    def coords(self, node_id: str) -> tuple[float, float]:
        node = self.node(node_id)
        return node.x, node.y

    def out_edges(self, node_id: str) -> list[Edge]:
        """Outgoing edges of ``node_id`` sorted by edge id."""
        self.node(node_id)
        return list(self._out[node_id])

    def length(self, edge_id: str) -> float:
        return self.edge(edge_id).length

    def path_length(self, edge_ids: Sequence[str]) -> float:
        return math.fsum(self.edge(e).length for e in edge_ids)

    def is_walk(self, edge_ids: Sequence[str]) -> bool:
        """True if consecutive edges are head-to-tail adjacent."""
        for prev, nxt in zip(edge_ids, edge_ids[1:]):
            if self.edge(prev).target != self.edge(nxt).source:
                return False
        return True

    def shortest_path(self, source: str, target: str) -> list[str] | None:
        """Minimal-length directed path from ``source`` to ``target`` as edge ids.

        Among equal-length paths the lexicographically smallest edge-id sequence
        wins. Returns ``[]`` when source == target and ``None`` if unreachable.
        """
        self.node(source)
        self.node(target)
        if source == target:
            return []

        # Every edge is strictly positive, so the best label of a node is
        # extended from the best label of its predecessor: Dijkstra over
        # (distance, path) keys settles each node with its lexicographic winner.
        # Distances are exact decimal sums of the lengths as written, so routes
        # of equal length tie regardless of float rounding.
        heap: list[tuple[Decimal, tuple[str, ...], str]] = [(Decimal(0), (), source)]
        settled: set[str] = set()
        while heap:
            dist, path, node = heapq.heappop(heap)
            if node in settled:
                continue
            settled.add(node)
            if node == target:
                return list(path)
            for edge in self._out[node]:
                if edge.target not in settled:
                    heapq.heappush(heap, (dist + self._exact[edge.edge_id], path + (edge.edge_id,), edge.target))
        return None


def _read_rows(path: str, fields: Sequence[str]) -> Iterable[tuple[int, dict[str, str]]]:
    if not os.path.isfile(path):
        raise DataFormatError(path, "file not found")
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        header = reader.fieldnames or []
        missing = [c for c in fields if c not in header]
        if missing:
            raise DataFormatError(path, f"missing columns {missing}; expected header {','.join(fields)}", line=1)
        for row in reader:
            if None in row or any(row[c] is None for c in fields):
                raise DataFormatError(path, "wrong number of fields", line=reader.line_num)
            yield reader.line_num, row


def _parse_float(path: str, line: int, field: str, value: str) -> float:
    try:
        out = float(value)
    except ValueError:
        raise DataFormatError(path, f"{field} is not a number: {value!r}", line=line) from None
    if not math.isfinite(out):
        raise DataFormatError(path, f"{field} is not finite: {value!r}", line=line)
    return out


def load_network(nodes_path: str, edges_path: str) -> RoadNetwork:
    """Load and validate a road network from ``node_id,x,y`` and
    ``edge_id,from,to,length,oneway`` CSV files.

    A row with ``oneway=0`` is a two-way road and becomes the directed edges
    ``<id>_f`` (from -> to) and ``<id>_r`` (to -> from).
    """
    nodes: dict[str, Node] = {}
    for line, row in _read_rows(nodes_path, NODE_FIELDS):
        node_id = row["node_id"].strip()
        if not node_id:
            raise DataFormatError(nodes_path, "empty node_id", line=line)
        if node_id in nodes:
            raise DataFormatError(nodes_path, f"duplicate node id {node_id!r}", line=line)
        nodes[node_id] = Node(
            node_id,
            _parse_float(nodes_path, line, "x", row["x"]),
            _parse_float(nodes_path, line, "y", row["y"]),
        )

    edges: dict[str, Edge] = {}

    def _add(edge: Edge, line: int) -> None:
        if edge.edge_id in edges:
            raise DataFormatError(edges_path, f"duplicate edge id {edge.edge_id!r}", line=line)
        edges[edge.edge_id] = edge

    for line, row in _read_rows(edges_path, EDGE_FIELDS):
        edge_id = row["edge_id"].strip()
        source, target = row["from"].strip(), row["to"].strip()
        if not edge_id:
            raise DataFormatError(edges_path, "empty edge_id", line=line)
        for end in (source, target):
            if end not in nodes:
                raise DataFormatError(edges_path, f"edge {edge_id!r} references unknown node {end!r}", line=line)
        length = _parse_float(edges_path, line, "length", row["length"])
        if length <= 0:
            raise DataFormatError(edges_path, f"edge {edge_id!r} has non-positive length {length}", line=line)
        oneway = row["oneway"].strip()
        if oneway == "1":
            _add(Edge(edge_id, source, target, length), line)
        elif oneway == "0":
            _add(Edge(f"{edge_id}_f", source, target, length), line)
            _add(Edge(f"{edge_id}_r", target, source, length), line)
        else:
            raise DataFormatError(edges_path, f"oneway must be 0 or 1, got {oneway!r}", line=line)

    net = RoadNetwork(nodes.values(), edges.values())
    logger.info(
        "loaded network: %d nodes, %d directed edges, %d strongly connected components",
        len(net), net.n_edges, net.strong_components(),
    )
    return net


def save_network(net: RoadNetwork, nodes_path: str, edges_path: str) -> None:
    """Write ``net`` in the CSV formats read by :func:`load_network`.

    Edge pairs ``<id>_f``/``<id>_r`` that mirror each other are written back as
    one two-way row, so ``load_network`` reproduces the same edge ids.
    """
    with open(nodes_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(NODE_FIELDS)
        for node in net.nodes.values():
            writer.writerow([node.node_id, repr(node.x), repr(node.y)])

    edges = net.edges
    written: set[str] = set()
    with open(edges_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(EDGE_FIELDS)
        for edge in edges.values():
            if edge.edge_id in written:
                continue
            if edge.edge_id.endswith("_f"):
                base = edge.edge_id[:-2]
                rev = edges.get(f"{base}_r")
                if (
                    rev is not None
                    and rev.source == edge.target
                    and rev.target == edge.source
                    and rev.length == edge.length
                ):
                    writer.writerow([base, edge.source, edge.target, repr(edge.length), 0])
                    written.update((edge.edge_id, rev.edge_id))
                    continue
            writer.writerow([edge.edge_id, edge.source, edge.target, repr(edge.length), 1])
            written.add(edge.edge_id)


def grid_network(
    rows: int,
    cols: int,
    spacing: float = 100.0,
    jitter: float = 0.2,
    seed: int = 0,
) -> RoadNetwork:
    """Two-way grid map with seeded coordinate jitter.

    Node ``n{r}_{c}`` sits near ``(c * spacing, r * spacing)``, displaced by up
    to ``jitter * spacing / 2`` per axis; segment lengths are the Euclidean
    distances between their endpoints.
    """
    if rows < 1 or cols < 1 or rows * cols < 2:
        raise ValidationError(f"grid must have at least two nodes, got {rows}x{cols}")
    if spacing <= 0 or not 0 <= jitter < 1:
        raise ValidationError("spacing must be positive and jitter in [0, 1)")
    rng = np.random.default_rng(seed)
    offsets = rng.uniform(-0.5, 0.5, size=(rows, cols, 2)) * jitter * spacing
    width = max(len(str(rows - 1)), len(str(cols - 1)))

    def nid(r: int, c: int) -> str:
        return f"n{r:0{width}d}_{c:0{width}d}"

    nodes = [
        Node(nid(r, c), float(c * spacing + offsets[r, c, 0]), float(r * spacing + offsets[r, c, 1]))
        for r in range(rows)
        for c in range(cols)
    ]
    pos = {n.node_id: (n.x, n.y) for n in nodes}
    edges: list[Edge] = []
    for r in range(rows):
        for c in range(cols):
            for kind, (r2, c2) in (("h", (r, c + 1)), ("v", (r + 1, c))):
                if r2 >= rows or c2 >= cols:
                    continue
                a, b = nid(r, c), nid(r2, c2)
                length = math.dist(pos[a], pos[b])
                road = f"{kind}{r:0{width}d}_{c:0{width}d}"
                edges.append(Edge(f"{road}_f", a, b, length))
                edges.append(Edge(f"{road}_r", b, a, length))
    return RoadNetwork(nodes, edges)
