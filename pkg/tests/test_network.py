from __future__ import annotations

import itertools

import networkx as nx
import numpy as np
import pytest

from conftest import make_network, write_csv
from trajmod.errors import DataFormatError, ValidationError
from trajmod.network import Edge, Node, RoadNetwork, grid_network, load_network, save_network


def test_load_minimal_network(tmp_path):
    nodes = write_csv(tmp_path / "nodes.csv", "node_id,x,y", ["a,0,0", "b,3,4"])
    edges = write_csv(tmp_path / "edges.csv", "edge_id,from,to,length,oneway", ["e1,a,b,5,1"])
    net = load_network(nodes, edges)
    assert len(net) == 2
    assert net.n_edges == 1
    assert net.edge("e1") == Edge("e1", "a", "b", 5.0)
    assert net.coords("b") == (3.0, 4.0)


def test_two_way_row_expands_to_directed_pair(tmp_path):
    nodes = write_csv(tmp_path / "nodes.csv", "node_id,x,y", ["a,0,0", "b,1,0"])
    edges = write_csv(tmp_path / "edges.csv", "edge_id,from,to,length,oneway", ["r,a,b,7.5,0"])
    net = load_network(nodes, edges)
    assert net.edge("r_f") == Edge("r_f", "a", "b", 7.5)
    assert net.edge("r_r") == Edge("r_r", "b", "a", 7.5)


def test_dangling_reference_names_node_and_line(tmp_path):
    nodes = write_csv(tmp_path / "nodes.csv", "node_id,x,y", ["a,0,0", "b,1,0"])
    edges = write_csv(tmp_path / "edges.csv", "edge_id,from,to,length,oneway", ["e1,a,b,1,1", "e2,b,zz,1,1"])
    with pytest.raises(DataFormatError) as exc:
        load_network(nodes, edges)
    assert "'zz'" in str(exc.value)
    assert exc.value.line == 3


@pytest.mark.parametrize(
    "row, message",
    [
        ("e1,a,b,0,1", "non-positive"),
        ("e1,a,b,-2,1", "non-positive"),
        ("e1,a,b,abc,1", "not a number"),
        ("e1,a,b,1,2", "oneway"),
    ],
)
def test_bad_edge_rows(tmp_path, row, message):
    nodes = write_csv(tmp_path / "nodes.csv", "node_id,x,y", ["a,0,0", "b,1,0"])
    edges = write_csv(tmp_path / "edges.csv", "edge_id,from,to,length,oneway", [row])
    with pytest.raises(DataFormatError, match=message):
        load_network(nodes, edges)


def test_duplicate_ids_and_missing_files(tmp_path):
    nodes = write_csv(tmp_path / "nodes.csv", "node_id,x,y", ["a,0,0", "a,1,0"])
    edges = write_csv(tmp_path / "edges.csv", "edge_id,from,to,length,oneway", [])
    with pytest.raises(DataFormatError, match="duplicate node"):
        load_network(nodes, edges)
    with pytest.raises(DataFormatError, match="file not found"):
        load_network(str(tmp_path / "missing.csv"), edges)


def test_constructor_validates():
    with pytest.raises(ValidationError):
        RoadNetwork([Node("a", 0, 0)], [Edge("e", "a", "b", 1.0)])
    with pytest.raises(ValidationError):
        RoadNetwork([Node("a", 0, 0), Node("b", 0, 0)], [Edge("e", "a", "b", 1.0), Edge("e", "b", "a", 1.0)])


def test_shortest_path_trivial_cases():
    net = make_network([("ab", "a", "b", 1.0)])
    assert net.shortest_path("a", "a") == []
    assert net.shortest_path("a", "b") == ["ab"]
    assert net.shortest_path("b", "a") is None
    with pytest.raises(ValidationError):
        net.shortest_path("a", "nowhere")


def test_shortest_path_diamond():
    net = make_network([
        ("s1", "s", "u", 2.0), ("u1", "u", "t", 3.0),
        ("s2", "s", "v", 4.0), ("v1", "v", "t", 3.0),
    ])
    assert net.shortest_path("s", "t") == ["s1", "u1"]
    assert net.path_length(net.shortest_path("s", "t")) == 5.0


def test_shortest_path_tie_goes_to_smallest_edge_sequence():
    net = make_network([
        ("b1", "s", "u", 1.0), ("b2", "u", "t", 1.0),
        ("a1", "s", "v", 1.0), ("a2", "v", "t", 1.0),
    ])
    assert net.shortest_path("s", "t") == ["a1", "a2"]


def _all_paths(net: RoadNetwork, source: str, target: str):
    def walk(node, used_nodes, path):
        if node == target:
            yield list(path)
            return
        for edge in net.out_edges(node):
            if edge.target not in used_nodes:
                yield from walk(edge.target, used_nodes | {edge.target}, path + [edge.edge_id])

    yield from walk(source, {source}, [])


@pytest.mark.parametrize("seed", range(100))
def test_shortest_path_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    names = [f"n{i}" for i in range(6)]
    edges = [
        (f"e{a}{b}", names[a], names[b], float(rng.integers(1, 6)))
        for a, b in itertools.permutations(range(6), 2)
        if rng.random() < 0.4
    ]
    net = make_network(edges, {n: (0.0, 0.0) for n in names})
    for s, t in itertools.permutations(names, 2):
        found = net.shortest_path(s, t)
        lengths = [net.path_length(p) for p in _all_paths(net, s, t)]
        if not lengths:
            assert found is None
        else:
            assert net.is_walk(found)
            assert net.path_length(found) == pytest.approx(min(lengths))


def test_grid_network_shape_and_lengths():
    net = grid_network(3, 4, spacing=50.0, jitter=0.2, seed=1)
    assert len(net) == 12
    # 3 * 3 horizontal + 2 * 4 vertical roads, both directions.
    assert net.n_edges == 2 * (9 + 8)
    for edge in net.edges.values():
        assert edge.length == pytest.approx(np.hypot(*np.subtract(net.coords(edge.source), net.coords(edge.target))))
    assert nx.is_strongly_connected(net.graph)
    assert grid_network(3, 4, spacing=50.0, seed=1).nodes == net.nodes


def test_save_network_round_trip(tmp_path, grid):
    nodes, edges = str(tmp_path / "nodes.csv"), str(tmp_path / "edges.csv")
    save_network(grid, nodes, edges)
    again = load_network(nodes, edges)
    assert again.nodes == grid.nodes
    assert again.edges == grid.edges
    with open(edges) as f:
        assert all(line.rstrip().endswith(",0") for line in list(f)[1:])


def test_graph_view_is_frozen():
    net = make_network([("ab", "a", "b", 2.0)])
    assert net.graph.has_edge("a", "b", key="ab")
    with pytest.raises(nx.NetworkXError):
        net.graph.add_node("c")


def test_equal_real_lengths_tie_despite_float_rounding():
    # 0.1 + 0.2 != 0.3 in floating point
    net = make_network([("a1", "s", "u", 0.1), ("a2", "u", "t", 0.2), ("b1", "s", "t", 0.3)])
    assert net.shortest_path("s", "t") == ["a1", "a2"]
    net = make_network([("a1", "s", "t", 0.3), ("b1", "s", "u", 0.1), ("b2", "u", "t", 0.2)])
    assert net.shortest_path("s", "t") == ["a1"]


def test_reachability_follows_direction():
    net = make_network([("ab", "a", "b", 1.0), ("bc", "b", "c", 1.0), ("cb", "c", "b", 1.0)])
    assert net.reachable("a", "c")
    assert not net.reachable("c", "a")
    assert net.strong_components() == 2
    with pytest.raises(ValidationError):
        net.reachable("a", "zz")


def _write_city(tmp_path, n_nodes=6105, n_roads=7035):
    nodes = tmp_path / "nodes.csv"
    edges = tmp_path / "edges.csv"
    with open(nodes, "w") as f:
        f.write("node_id,x,y\n")
        for i in range(n_nodes):
            f.write(f"n{i},{i * 10.0},{(i % 7) * 3.0}\n")
    with open(edges, "w") as f:
        f.write("edge_id,from,to,length,oneway\n")
        for i in range(n_nodes - 1):
            f.write(f"r{i},n{i},n{i + 1},10.0,0\n")
        for j in range(n_roads - (n_nodes - 1)):
            f.write(f"s{j},n{j},n{j + 2},15.0,0\n")
    return str(nodes), str(edges)


@pytest.mark.slow
def test_city_scale_network_and_trajectory_load(tmp_path):
    from trajmod.trajectories import load_trajectories

    nodes, edges = _write_city(tmp_path)
    net = load_network(nodes, edges)
    assert len(net) == 6105
    assert net.n_edges == 14070
    assert net.strong_components() == 1
    assert net.shortest_path("n0", "n4") == ["s0_f", "s2_f"]

    path = tmp_path / "trajectories.csv"
    expected_visits = 0
    distinct: set[str] = set()
    with open(path, "w") as f:
        f.write("traj_id,seq,timestamp,edge_id\n")
        for k in range(10000):
            start = (k * 7) % 6000
            route = [f"r{start + step}_f" for step in range(1 + k % 5)]
            if k % 100 == 0:
                route.append(f"r{start + 50}_f")
            for seq, edge_id in enumerate(route):
                f.write(f"t{k},{seq},{seq * 1.5},{edge_id}\n")
            expected_visits += len(route)
            distinct.update(route)

    ts = load_trajectories(str(path), net)
    assert len(ts) == 10000
    assert ts.report.n_trajectories == 10000
    assert ts.report.n_visits == expected_visits
    assert ts.report.n_distinct_segments == len(distinct)
    assert ts.report.n_gaps == 100
