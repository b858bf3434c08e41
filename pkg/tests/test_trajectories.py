from __future__ import annotations

import pytest

from conftest import make_network, make_set, write_csv
from trajmod.errors import DataFormatError, ValidationError
from trajmod.trajectories import (
    Trajectory,
    TrajectorySet,
    Visit,
    end_point,
    load_trajectories,
    read_labels,
    save_trajectories,
    start_point,
    write_labels,
)


@pytest.fixture
def net():
    return make_network(
        [("ab", "a", "b", 10.0), ("bc", "b", "c", 20.0), ("ba", "b", "a", 10.0), ("cd", "c", "d", 5.0)],
        {"a": (0.0, 0.0), "b": (10.0, 0.0), "c": (10.0, 20.0), "d": (15.0, 20.0)},
    )


def _write(tmp_path, rows):
    return write_csv(tmp_path / "traj.csv", "traj_id,seq,timestamp,edge_id", rows)


def test_single_trajectory_of_one_edge(tmp_path, net):
    ts = load_trajectories(_write(tmp_path, ["t1,0,0,ab"]), net)
    assert len(ts) == 1
    assert len(ts[0]) == 1
    assert ts.report.n_trajectories == 1
    assert ts.report.n_distinct_segments == 1


def test_load_report_counts(tmp_path, net):
    rows = ["t1,0,0,ab", "t1,1,1,bc", "t2,0,0,ab", "t2,1,1,ba", "t2,2,2,ab"]
    ts = load_trajectories(_write(tmp_path, rows), net)
    assert ts.ids == ["t1", "t2"]
    assert ts.report.n_visits == 5
    assert ts.report.n_distinct_segments == 3
    assert ts.get("t2").segments == frozenset({"ab", "ba"})
    assert ts.index_of("t2") == 1


def test_unknown_edge_names_trajectory_and_line(tmp_path, net):
    with pytest.raises(DataFormatError) as exc:
        load_trajectories(_write(tmp_path, ["t1,0,0,ab", "t9,0,0,zz"]), net)
    assert "t9" in str(exc.value)
    assert exc.value.line == 3


@pytest.mark.parametrize(
    "rows, message",
    [
        (["t1,0,5,ab", "t1,1,4,bc"], "decreasing"),
        (["t1,0,0,ab", "t1,2,1,bc"], "expected seq 1"),
        (["t1,0,0,ab", "t2,0,0,ab", "t1,1,1,bc"], "duplicate trajectory"),
        (["t1,0,x,ab"], "bad seq/timestamp"),
        ([], "no trajectories"),
    ],
)
def test_malformed_rows(tmp_path, net, rows, message):
    with pytest.raises(DataFormatError, match=message):
        load_trajectories(_write(tmp_path, rows), net)


def test_gaps_are_tolerated_unless_strict(tmp_path, net, caplog):
    path = _write(tmp_path, ["t1,0,0,ab", "t1,1,1,cd"])
    ts = load_trajectories(path, net)
    assert ts.report.n_gaps == 1
    assert "non-adjacent" in caplog.text
    with pytest.raises(DataFormatError, match="not a connected walk"):
        load_trajectories(path, net, strict_connectivity=True)


def test_equal_timestamps_are_allowed():
    traj = Trajectory("t", (Visit(1.0, "ab"), Visit(1.0, "bc")))
    assert traj.edge_ids == ["ab", "bc"]
    with pytest.raises(ValidationError):
        Trajectory("t", ())


def test_endpoints(net):
    ts = make_set(net, {"one": ["ab"], "chain": ["ab", "bc"], "loop": ["ab", "ba"]})
    assert start_point(ts.get("one"), net) == (0.0, 0.0)
    assert end_point(ts.get("one"), net) == (10.0, 0.0)
    assert end_point(ts.get("chain"), net) == (10.0, 20.0)
    assert start_point(ts.get("loop"), net) == end_point(ts.get("loop"), net) == (0.0, 0.0)


def test_save_round_trips_exactly(tmp_path, net):
    original = make_set(net, {"x": ["ab", "bc"], "y": ["ba"]})
    traj = Trajectory("z", (Visit(0.1, "ab"), Visit(0.30000000000000004, "bc")))
    ts = TrajectorySet(original.trajectories + (traj,), net)
    path = str(tmp_path / "out.csv")
    save_trajectories(ts, path)
    again = load_trajectories(path, net)
    assert again.trajectories == ts.trajectories


def test_duplicate_ids_rejected_in_memory(net):
    with pytest.raises(ValidationError, match="duplicate"):
        TrajectorySet((Trajectory.from_edges("x", ["ab"]), Trajectory.from_edges("x", ["bc"])), net)
    with pytest.raises(ValidationError, match="unknown edge"):
        TrajectorySet((Trajectory.from_edges("x", ["zz"]),), net)


def test_labels_round_trip(tmp_path):
    path = str(tmp_path / "labels.csv")
    write_labels({"t0": 0, "t1": 1}, path)
    assert read_labels(path) == {"t0": "0", "t1": "1"}
