"""Recursive modularity clustering into a hierarchy of nested, validated communities."""

from __future__ import annotations

import json
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Iterator, Sequence

from trajmod.errors import ValidationError
from trajmod.modularity import NullStats, greedy_merges, modularity, null_statistics
from trajmod.partition import Partition
from trajmod.seeding import derive_seed
from trajmod.similarity import SimilarityGraph

if TYPE_CHECKING:
    from trajmod.log import RunLogger

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HierarchyParams:
    replicates: int = 20
    z: float = 2.0
    seed: int = 0
    min_size: int = 2
    swaps_per_edge: int = 10

    def __post_init__(self) -> None:
        if self.replicates < 2:
            raise ValidationError(f"replicates must be >= 2, got {self.replicates}")
        if not math.isfinite(self.z):
            raise ValidationError(f"z must be finite, got {self.z}")
        if self.min_size < 1:
            raise ValidationError(f"min_size must be >= 1, got {self.min_size}")
        if self.swaps_per_edge < 1:
            raise ValidationError(f"swaps_per_edge must be >= 1, got {self.swaps_per_edge}")


@dataclass
class ClusterNode:
    id: int
    members: tuple[str, ...]
    depth: int
    children: list[ClusterNode] = field(default_factory=list)
    modularity_of_split: float | None = None
    validated: bool = False
    decision: str | None = None

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def size(self) -> int:
        return len(self.members)


class ClusterHierarchy:
    """Tree of nested clusters; ids are assigned breadth-first from the root (id 0)."""

    def __init__(self, root: ClusterNode, node_ids: Sequence[str] | None = None):
        self.root = root
        self.node_ids: tuple[str, ...] = tuple(node_ids) if node_ids is not None else root.members
        self._by_id = {c.id: c for c in self.walk()}

    def walk(self) -> Iterator[ClusterNode]:
        """Breadth-first traversal, children in stored order."""
        queue = deque([self.root])
        while queue:
            node = queue.popleft()
            yield node
            queue.extend(node.children)

    def __getitem__(self, cluster_id: int) -> ClusterNode:
        return self._by_id[cluster_id]

    def __len__(self) -> int:
        return len(self._by_id)

    @property
    def max_depth(self) -> int:
        return max(c.depth for c in self.walk())

    def leaves(self) -> list[ClusterNode]:
        return sorted((c for c in self.walk() if c.is_leaf), key=lambda c: c.id)

    def nodes_at_depth(self, depth: int) -> list[ClusterNode]:
        return sorted((c for c in self.walk() if c.depth == depth), key=lambda c: c.id)

    def check(self) -> None:
        """Re-verify that children partition their parent and the root holds every trajectory."""
        if set(self.root.members) != set(self.node_ids) or len(self.root.members) != len(self.node_ids):
            raise ValidationError("root members differ from the trajectory set")
        for node in self.walk():
            if node.is_leaf:
                continue
            union: list[str] = [m for child in node.children for m in child.members]
            if len(union) != len(set(union)) or set(union) != set(node.members):
                raise ValidationError(f"children of cluster {node.id} do not partition it")
            for child in node.children:
                if child.depth != node.depth + 1 or not child.members:
                    raise ValidationError(f"cluster {child.id} is malformed")

    def to_json(self) -> dict[str, Any]:
        def encode(node: ClusterNode) -> dict[str, Any]:
            out: dict[str, Any] = {
                "id": node.id,
                "size": node.size,
                "validated": node.validated,
                "decision": node.decision,
                "modularity_of_split": node.modularity_of_split,
                "children": [encode(c) for c in node.children],
            }
            if node.is_leaf:
                out["members"] = list(node.members)
            return out

        return encode(self.root)

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> ClusterHierarchy:
        def decode(obj: dict[str, Any], depth: int) -> ClusterNode:
            children = [decode(c, depth + 1) for c in obj.get("children", [])]
            if children:
                members = tuple(m for c in children for m in c.members)
            else:
                members = tuple(str(m) for m in obj["members"])
            return ClusterNode(
                id=int(obj["id"]),
                members=members,
                depth=depth,
                children=children,
                modularity_of_split=obj.get("modularity_of_split"),
                validated=bool(obj.get("validated", False)),
                decision=obj.get("decision"),
            )

        hierarchy = cls(decode(data, 0))
        hierarchy.check()
        return hierarchy


def write_hierarchy(h: ClusterHierarchy, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(h.to_json(), f, indent=2)
        f.write("\n")


def read_hierarchy(path: str) -> ClusterHierarchy:
    with open(path, encoding="utf-8") as f:
        return ClusterHierarchy.from_json(json.load(f))


def build_hierarchy(
    g: SimilarityGraph,
    params: HierarchyParams | None = None,
    run_logger: RunLogger | None = None,
) -> ClusterHierarchy:
    """Split clusters top-down until no validated community structure remains.

    A cluster smaller than ``min_size`` is a leaf. Otherwise greedy modularity
    optimization runs on the induced subgraph; a split finer than the connected
    components is kept only if it beats the null model seeded with
    ``derive_seed(seed, "validate", cluster_id)``. A disconnected cluster whose
    finer split fails (or does not exist) is still split into its components;
    such nodes carry ``decision="components"`` and ``validated=False``.
    """
    params = params or HierarchyParams()
    index = {traj_id: i for i, traj_id in enumerate(g.node_ids)}
    root = ClusterNode(0, tuple(g.node_ids), 0)
    next_id = 1
    step = 0
    queue = deque([root])
    while queue:
        node = queue.popleft()
        groups, q, decision, stats = _split(g, node, index, params)
        if run_logger:
            run_logger.log_split(step, node.id, node.depth, node.size, len(groups), q, decision, stats)
        step += 1
        if not groups:
            continue
        node.modularity_of_split = q
        node.decision = decision
        # component splits are structural, not null-tested
        node.validated = decision == "validated"
        for members in groups:
            child = ClusterNode(next_id, members, node.depth + 1)
            next_id += 1
            node.children.append(child)
            queue.append(child)
        logger.debug("cluster %d (%d members) split into %d (%s)", node.id, node.size, len(groups), decision)

    hierarchy = ClusterHierarchy(root, g.node_ids)
    hierarchy.check()
    logger.info("hierarchy: %d clusters, %d leaves, depth %d", len(hierarchy), len(hierarchy.leaves()), hierarchy.max_depth)
    return hierarchy


def _split(
    g: SimilarityGraph,
    node: ClusterNode,
    index: dict[str, int],
    params: HierarchyParams,
) -> tuple[list[tuple[str, ...]], float | None, str, NullStats | None]:
    """Return (child member groups, Q of the split, decision label, null stats)."""
    if node.size < max(2, params.min_size):
        return [], None, "too_small", None

    positions = [index[m] for m in node.members]
    sub = g.subgraph(positions)
    components = [tuple(sub.node_ids[i] for i in comp) for comp in sub.components()]

    # Greedy merges only linked communities, so its result refines the components.
    result = greedy_merges(sub)
    if result.partition.k > len(components):
        stats = null_statistics(
            sub,
            result.partition,
            params.replicates,
            derive_seed(params.seed, "validate", node.id),
            params.swaps_per_edge,
        )
        if stats.passes(params.z):
            groups = [tuple(c) for c in result.partition.clusters()]
            return groups, stats.observed, "validated", stats
    else:
        stats = None

    if len(components) > 1:
        q = modularity(sub, Partition.from_clusters(components).restricted(sub.node_ids))
        return components, q, "components", stats
    if stats is None:
        return [], None, "single_community", None
    return [], stats.observed, "rejected", stats


def _partition_of(h: ClusterHierarchy, clusters: Sequence[ClusterNode]) -> Partition:
    return Partition.from_clusters(c.members for c in clusters).restricted(h.node_ids)


def level_clusters(h: ClusterHierarchy, level: int) -> list[ClusterNode]:
    """Clusters at depth ``level`` plus leaves shallower than it, by cluster id."""
    if level < 0:
        raise ValidationError(f"level must be >= 0, got {level}")
    chosen = [c for c in h.walk() if c.depth == level or (c.is_leaf and c.depth < level)]
    return sorted(chosen, key=lambda c: c.id)


def flatten_by_level(h: ClusterHierarchy, level: int) -> Partition:
    return _partition_of(h, level_clusters(h, level))


def expand_clusters(h: ClusterHierarchy, g: SimilarityGraph, k: int) -> list[ClusterNode]:
    """Greedy expansion from the root towards ``k`` clusters.

    Each step replaces the expandable cluster whose children give the largest
    modularity change on the full graph ``g`` (the smallest loss; the change may
    be negative), ties going to the smallest cluster id.
    """
    n_leaves = len(h.leaves())
    if not 1 <= k <= n_leaves:
        raise ValidationError(f"k must lie in [1, {n_leaves}], got {k}")
    if set(g.node_ids) != set(h.node_ids):
        raise ValidationError("graph and hierarchy cover different trajectories")

    current = [h.root]
    q_current = modularity(g, _partition_of(h, current))
    while len(current) < k:
        best: tuple[float, ClusterNode, list[ClusterNode], float] | None = None
        for cand in sorted((c for c in current if not c.is_leaf), key=lambda c: c.id):
            trial = [c for c in current if c is not cand] + cand.children
            q_trial = modularity(g, _partition_of(h, trial))
            delta = q_trial - q_current
            if best is None or delta > best[0]:
                best = (delta, cand, trial, q_trial)
        if best is None:
            break
        delta, cand, current, q_current = best
        logger.debug("expanded cluster %d (dQ=%.6f) -> %d clusters", cand.id, delta, len(current))
    return sorted(current, key=lambda c: c.id)


def greedy_expand(h: ClusterHierarchy, g: SimilarityGraph, k: int) -> Partition:
    return _partition_of(h, expand_clusters(h, g, k))
