from __future__ import annotations

import itertools

import pytest

from conftest import graph_from_pairs
from trajmod.errors import ValidationError
from trajmod.hierarchy import (
    ClusterHierarchy,
    ClusterNode,
    HierarchyParams,
    build_hierarchy,
    expand_clusters,
    flatten_by_level,
    greedy_expand,
    level_clusters,
    read_hierarchy,
    write_hierarchy,
)
from trajmod.modularity import modularity
from trajmod.partition import Partition

FAST = HierarchyParams(replicates=8, z=2.0, seed=0)


def _clusters(p: Partition):
    return sorted(sorted(c) for c in p.clusters())


def test_two_disconnected_pairs():
    g = graph_from_pairs(4, [(0, 1), (2, 3)])
    h = build_hierarchy(g, FAST)
    assert len(h) == 3
    assert [c.members for c in h.root.children] == [("v0", "v1"), ("v2", "v3")]
    assert all(c.is_leaf and c.size == 2 for c in h.root.children)
    assert not h.root.validated
    assert h.root.decision == "components"
    assert h.root.modularity_of_split == pytest.approx(0.5)
    assert [c.decision for c in h.root.children] == [None, None]


def test_single_node_graph():
    h = build_hierarchy(graph_from_pairs(1, []))
    assert len(h) == 1
    assert h.root.is_leaf
    assert h.max_depth == 0


def test_complete_graph_stays_a_leaf():
    g = graph_from_pairs(8, itertools.combinations(range(8), 2))
    h = build_hierarchy(g, FAST)
    assert h.root.is_leaf


def _blocks(sizes, bridges=()):
    pairs, offset = [], 0
    for size in sizes:
        pairs += [(offset + a, offset + b) for a, b in itertools.combinations(range(size), 2)]
        offset += size
    return graph_from_pairs(offset, pairs + list(bridges))


def test_bridged_blocks_split_after_validation():
    g = _blocks([6, 6, 6], bridges=[(0, 6), (6, 12)])
    h = build_hierarchy(g, FAST)
    top = flatten_by_level(h, 1)
    assert {frozenset(c) for c in top.clusters()} == {frozenset(f"v{i}" for i in range(s, s + 6)) for s in (0, 6, 12)}
    assert h.root.validated
    assert h.root.decision == "validated"
    assert all(c.is_leaf for c in h.root.children)


def test_min_size_makes_leaves():
    g = graph_from_pairs(4, [(0, 1), (2, 3)])
    h = build_hierarchy(g, HierarchyParams(replicates=4, min_size=5))
    assert h.root.is_leaf


def test_ids_are_breadth_first_and_hierarchy_is_valid():
    # Components at the root, then a bridged pair of blocks inside the second one.
    g = _blocks([3, 5, 5], bridges=[(4, 8)])
    h = build_hierarchy(g, FAST)
    h.check()
    ids = [c.id for c in h.walk()]
    assert ids == list(range(len(h)))
    depths = [c.depth for c in h.walk()]
    assert depths == sorted(depths)


def test_deterministic_under_seed():
    g = _blocks([5, 5, 5], bridges=[(0, 5), (5, 10)])
    assert build_hierarchy(g, FAST).to_json() == build_hierarchy(g, FAST).to_json()


def test_params_validation():
    with pytest.raises(ValidationError):
        HierarchyParams(replicates=1)
    with pytest.raises(ValidationError):
        HierarchyParams(min_size=0)


def _toy() -> ClusterHierarchy:
    """root(0) -> A(1){a,b,c,d} , B(2){e,f}; A -> A1(3){a,b}, A2(4){c,d}."""
    a1 = ClusterNode(3, ("a", "b"), 2)
    a2 = ClusterNode(4, ("c", "d"), 2)
    a = ClusterNode(1, ("a", "b", "c", "d"), 1, [a1, a2], 0.1, True)
    b = ClusterNode(2, ("e", "f"), 1)
    root = ClusterNode(0, ("a", "b", "c", "d", "e", "f"), 0, [a, b], 0.2, True)
    return ClusterHierarchy(root)


def test_flatten_by_level():
    h = _toy()
    assert flatten_by_level(h, 0).k == 1
    assert _clusters(flatten_by_level(h, 1)) == [["a", "b", "c", "d"], ["e", "f"]]
    leaves = [["a", "b"], ["c", "d"], ["e", "f"]]
    assert _clusters(flatten_by_level(h, 2)) == leaves
    assert _clusters(flatten_by_level(h, 7)) == leaves
    assert [c.id for c in level_clusters(h, 2)] == [2, 3, 4]
    with pytest.raises(ValidationError):
        flatten_by_level(h, -1)


def test_greedy_expand_bounds():
    h = _toy()
    g = graph_from_pairs(6, [(0, 1), (2, 3), (4, 5), (1, 2)])
    g = type(g)(list("abcdef"), g.matrix)
    assert greedy_expand(h, g, 1).k == 1
    assert _clusters(greedy_expand(h, g, 3)) == [["a", "b"], ["c", "d"], ["e", "f"]]
    with pytest.raises(ValidationError):
        greedy_expand(h, g, 4)
    with pytest.raises(ValidationError):
        greedy_expand(h, g, 0)


def test_greedy_expand_picks_smallest_loss():
    # Two expandable children of the root; the expansion order must follow direct Q differences.
    x1, x2 = ClusterNode(3, ("a", "b"), 2), ClusterNode(4, ("c", "d"), 2)
    y1, y2 = ClusterNode(5, ("e", "f"), 2), ClusterNode(6, ("g", "h"), 2)
    x = ClusterNode(1, ("a", "b", "c", "d"), 1, [x1, x2])
    y = ClusterNode(2, ("e", "f", "g", "h"), 1, [y1, y2])
    h = ClusterHierarchy(ClusterNode(0, tuple("abcdefgh"), 0, [x, y]))
    # X's halves are weakly linked, Y's halves strongly.
    pairs = [(0, 1), (2, 3), (1, 2), (4, 5), (6, 7), (4, 6), (5, 7), (4, 7), (5, 6), (3, 4)]
    base = graph_from_pairs(8, pairs)
    g = type(base)(list("abcdefgh"), base.matrix)

    def q(groups):
        return modularity(g, Partition.from_clusters(groups).restricted(list("abcdefgh")))

    after_x = q([x1.members, x2.members, y.members])
    after_y = q([x.members, y1.members, y2.members])
    expected_first = 1 if after_x >= after_y else 2
    chosen = expand_clusters(h, g, 3)
    expanded = ({1, 2} - {c.id for c in chosen}).pop()
    assert expanded == expected_first


def test_json_round_trip(tmp_path):
    h = _toy()
    path = str(tmp_path / "h.json")
    write_hierarchy(h, path)
    again = read_hierarchy(path)
    assert again.to_json() == h.to_json()
    assert [c.members for c in again.walk()] == [c.members for c in h.walk()]


def test_check_rejects_overlapping_children():
    bad = ClusterNode(0, ("a", "b"), 0, [ClusterNode(1, ("a",), 1), ClusterNode(2, ("a",), 1)])
    with pytest.raises(ValidationError):
        ClusterHierarchy(bad).check()
