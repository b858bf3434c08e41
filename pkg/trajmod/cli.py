"""Command-line entry point.

Usage:
    trajmod generate --n 300 --corridors 3 --deviation 0.1 --seed 7 --out data/
    trajmod cluster --nodes data/nodes.csv --edges data/edges.csv \\
        --trajectories data/trajectories.csv --out runs/mod
    trajmod hac --nodes ... --edges ... --trajectories ... --linkage average --k 3 --out runs/hac
    trajmod evaluate --nodes ... --edges ... --trajectories ... \\
        --assignment runs/mod/assignment_level_1.csv --labels data/labels.csv --out report.csv
    trajmod rerun runs/mod/run.json --out runs/mod-again
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import os
import shutil
import sys
import tempfile
from typing import Any, Callable, Iterator

from trajmod import __version__
from trajmod.errors import DataFormatError, TrajmodError
from trajmod.evaluation import evaluate, most_visited_segment, write_report
from trajmod.geojson import export_geojson
from trajmod.hac import LINKAGES, write_dendrogram
from trajmod.hierarchy import HierarchyParams, write_hierarchy
from trajmod.network import grid_network, load_network, save_network
from trajmod.partition import read_assignment, write_assignment
from trajmod.pipeline import load_dataset, run_cluster, run_hac
from trajmod.seeding import derive_seed
from trajmod.similarity import GRAPH_SCHEMES, build_similarity_graph, write_graph
from trajmod.synth import generate
from trajmod.trajectories import read_labels, save_trajectories, write_labels

logger = logging.getLogger(__name__)

_DATASET = ("nodes", "edges", "trajectories", "strict_connectivity")
_PATHS = ("nodes", "edges", "trajectories", "assignment", "labels")

# Parameters recorded in run.json, per command with an output directory.
RUN_PARAMS: dict[str, tuple[str, ...]] = {
    "cluster": _DATASET + (
        "weighting", "null_replicates", "z", "min_size", "seed", "swaps_per_edge", "min_similarity", "expand",
    ),
    "hac": _DATASET + ("weighting", "linkage", "k"),
    "generate": (
        "n", "corridors", "deviation", "seed", "nodes", "edges", "grid_rows", "grid_cols", "spacing", "jitter",
    ),
    "export-geojson": _DATASET + ("assignment", "through_most_visited"),
}


@contextlib.contextmanager
def _staged_dir(out: str) -> Iterator[str]:
    """Yield a scratch directory next to ``out``; it replaces ``out`` only on success."""
    out = os.path.abspath(out)
    parent = os.path.dirname(out)
    os.makedirs(parent, exist_ok=True)
    tmp = tempfile.mkdtemp(prefix=f".{os.path.basename(out)}.", dir=parent)
    try:
        yield tmp
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    if os.path.isdir(out):
        shutil.rmtree(out)
    os.replace(tmp, out)


@contextlib.contextmanager
def _staged_file(path: str) -> Iterator[str]:
    path = os.path.abspath(path)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{os.path.basename(path)}.", dir=os.path.dirname(path))
    os.close(fd)
    try:
        yield tmp
    except BaseException:
        os.remove(tmp)
        raise
    os.replace(tmp, path)


def _write_json(obj: Any, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


def _write_run(args: argparse.Namespace, out_dir: str) -> None:
    params = {name: getattr(args, name) for name in RUN_PARAMS[args.command]}
    _write_json({"command": args.command, "params": params, "version": __version__}, os.path.join(out_dir, "run.json"))


def cmd_cluster(args: argparse.Namespace) -> None:
    params = HierarchyParams(
        replicates=args.null_replicates,
        z=args.z,
        seed=args.seed,
        min_size=args.min_size,
        swaps_per_edge=args.swaps_per_edge,
    )
    result = run_cluster(
        args.nodes,
        args.edges,
        args.trajectories,
        weighting=args.weighting,
        params=params,
        min_similarity=args.min_similarity,
        strict_connectivity=args.strict_connectivity,
        expand=args.expand,
        log_dir=args.log_dir,
    )
    order = result.trajectories.ids
    with _staged_dir(args.out) as tmp:
        write_hierarchy(result.hierarchy, os.path.join(tmp, "hierarchy.json"))
        for level, p in enumerate(result.levels):
            write_assignment(p, os.path.join(tmp, f"assignment_level_{level}.csv"), order)
        for k, p in result.expansions.items():
            write_assignment(p, os.path.join(tmp, f"assignment_k{k}.csv"), order)
        _write_json(result.summary(), os.path.join(tmp, "summary.json"))
        _write_run(args, tmp)
    logger.info("clustered %d trajectories into %d levels in %.1fs", len(order), len(result.levels), result.elapsed)


def cmd_hac(args: argparse.Namespace) -> None:
    result = run_hac(
        args.nodes,
        args.edges,
        args.trajectories,
        weighting=args.weighting,
        linkage=args.linkage,
        ks=args.k,
        strict_connectivity=args.strict_connectivity,
        log_dir=args.log_dir,
    )
    with _staged_dir(args.out) as tmp:
        write_dendrogram(result.dendrogram, os.path.join(tmp, "dendrogram.csv"))
        for k, p in result.partitions.items():
            write_assignment(p, os.path.join(tmp, f"assignment_k{k}.csv"), result.trajectories.ids)
        _write_run(args, tmp)
    logger.info("%s linkage on %d trajectories in %.1fs", args.linkage, len(result.trajectories), result.elapsed)


def cmd_evaluate(args: argparse.Namespace) -> None:
    ts = load_dataset(args.nodes, args.edges, args.trajectories, args.strict_connectivity)
    labels = read_labels(args.labels) if args.labels else None
    methods = args.method or [os.path.splitext(os.path.basename(a))[0] for a in args.assignment]
    rows = []
    for method, path in zip(methods, args.assignment):
        report = evaluate(read_assignment(path), ts, labels)
        rows.append(report.row(method))
    with _staged_file(args.out) as tmp:
        write_report(rows, tmp)


def cmd_generate(args: argparse.Namespace) -> None:
    if args.nodes:
        net = load_network(args.nodes, args.edges)
    else:
        net = grid_network(args.grid_rows, args.grid_cols, args.spacing, args.jitter, derive_seed(args.seed, "grid"))
    dataset = generate(net, args.n, args.corridors, args.deviation, args.seed)
    with _staged_dir(args.out) as tmp:
        save_network(net, os.path.join(tmp, "nodes.csv"), os.path.join(tmp, "edges.csv"))
        save_trajectories(dataset.trajectories, os.path.join(tmp, "trajectories.csv"))
        if dataset.labels is not None:
            write_labels(dataset.labels, os.path.join(tmp, "labels.csv"))
        _write_run(args, tmp)


def cmd_export_geojson(args: argparse.Namespace) -> None:
    ts = load_dataset(args.nodes, args.edges, args.trajectories, args.strict_connectivity)
    p = read_assignment(args.assignment)
    through = most_visited_segment(ts) if args.through_most_visited else None
    with _staged_dir(args.out) as tmp:
        paths = export_geojson(p, ts, tmp, through)
        _write_run(args, tmp)
    logger.info("wrote %d feature collections%s", len(paths), f" through {through}" if through else "")


def cmd_graph(args: argparse.Namespace) -> None:
    ts = load_dataset(args.nodes, args.edges, args.trajectories, args.strict_connectivity)
    graph = build_similarity_graph(ts, args.weighting, min_similarity=args.min_similarity)
    with _staged_file(args.out) as tmp:
        write_graph(graph, tmp)
    logger.info("similarity graph: %d nodes, %d edges", len(graph), graph.n_edges)


def cmd_rerun(args: argparse.Namespace) -> None:
    path = args.run_json
    try:
        with open(path, encoding="utf-8") as f:
            run = json.load(f)
    except json.JSONDecodeError as e:
        raise DataFormatError(path, f"invalid JSON: {e.msg}", line=e.lineno) from None
    command = run.get("command") if isinstance(run, dict) else None
    if command not in RUN_PARAMS:
        raise DataFormatError(path, f"not a rerunnable run record (command {command!r})")
    params = run.get("params")
    if not isinstance(params, dict) or set(RUN_PARAMS[command]) - params.keys():
        raise DataFormatError(path, f"incomplete params for {command}")
    if run.get("version") != __version__:
        logger.warning("run.json was written by version %s, replaying with %s", run.get("version"), __version__)
    replay = argparse.Namespace(
        command=command,
        out=args.out or os.path.dirname(os.path.abspath(path)),
        log_dir=args.log_dir,
        **{name: params[name] for name in RUN_PARAMS[command]},
    )
    COMMANDS[command](replay)


COMMANDS: dict[str, Callable[[argparse.Namespace], None]] = {
    "cluster": cmd_cluster,
    "hac": cmd_hac,
    "evaluate": cmd_evaluate,
    "generate": cmd_generate,
    "export-geojson": cmd_export_geojson,
    "graph": cmd_graph,
    "rerun": cmd_rerun,
}


def _add_dataset(p: argparse.ArgumentParser) -> None:
    p.add_argument("--nodes", required=True, help="Nodes CSV (node_id,x,y).")
    p.add_argument("--edges", required=True, help="Edges CSV (edge_id,from,to,length[,oneway]).")
    p.add_argument("--trajectories", required=True, help="Trajectories CSV (traj_id,seq,timestamp,edge_id).")
    p.add_argument(
        "--strict-connectivity",
        action="store_true",
        help="Reject trajectories whose consecutive segments are not adjacent.",
    )


def _add_weighting(p: argparse.ArgumentParser) -> None:
    p.add_argument("--weighting", choices=GRAPH_SCHEMES, default="spatial", help="Segment weighting scheme.")


def _add_log_dir(p: argparse.ArgumentParser) -> None:
    p.add_argument("--log-dir", default=None, help="Directory for JSONL stage and split logs.")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trajmod",
        description="Cluster network-constrained trajectories by modularity optimization.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Log at DEBUG level.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="Recursive modularity clustering into a hierarchy.")
    _add_dataset(p)
    _add_weighting(p)
    p.add_argument("--null-replicates", type=int, default=20, help="Randomized graphs per validation.")
    p.add_argument("--z", type=float, default=2.0, help="Null-model threshold in standard deviations.")
    p.add_argument("--min-size", type=int, default=2, help="Clusters smaller than this are leaves.")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--swaps-per-edge", type=int, default=10, help="Rewiring swaps per edge in each null graph.")
    p.add_argument("--min-similarity", type=float, default=0.0, help="Drop graph edges below this similarity.")
    p.add_argument("--expand", type=int, action="append", metavar="K", help="Also write a K-cluster cut (repeatable).")
    p.add_argument("--out", required=True, help="Output directory.")
    _add_log_dir(p)

    p = sub.add_parser("hac", help="Agglomerative clustering baseline.")
    _add_dataset(p)
    _add_weighting(p)
    p.add_argument("--linkage", choices=LINKAGES, default="average")
    p.add_argument("--k", type=int, action="append", required=True, help="Cluster count to cut at (repeatable).")
    p.add_argument("--out", required=True, help="Output directory.")
    _add_log_dir(p)

    p = sub.add_parser("evaluate", help="Overlap, inertia and ARI of one or more assignments.")
    _add_dataset(p)
    p.add_argument("--assignment", action="append", required=True, help="Assignment CSV (repeatable).")
    p.add_argument("--method", action="append", help="Row name per --assignment (default: file stem).")
    p.add_argument("--labels", default=None, help="Planted labels CSV (traj_id,corridor_id) for ARI.")
    p.add_argument("--out", required=True, help="Report CSV path.")

    p = sub.add_parser("generate", help="Synthetic trajectories with optional planted corridors.")
    p.add_argument("--n", type=int, required=True, help="Number of trajectories.")
    p.add_argument("--corridors", type=int, default=None, help="Number of planted corridors.")
    p.add_argument("--deviation", type=float, default=0.0, help="Per-node detour probability.")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nodes", default=None, help="Nodes CSV of an existing map (with --edges).")
    p.add_argument("--edges", default=None, help="Edges CSV of an existing map (with --nodes).")
    p.add_argument("--grid-rows", type=int, default=12)
    p.add_argument("--grid-cols", type=int, default=12)
    p.add_argument("--spacing", type=float, default=100.0, help="Grid spacing in meters.")
    p.add_argument("--jitter", type=float, default=0.2, help="Node jitter as a fraction of the spacing.")
    p.add_argument("--out", required=True, help="Output directory.")

    p = sub.add_parser("export-geojson", help="One GeoJSON feature collection per cluster.")
    _add_dataset(p)
    p.add_argument("--assignment", required=True, help="Assignment CSV.")
    p.add_argument(
        "--through-most-visited",
        action="store_true",
        help="Only draw trajectories on the segment visited by the most trajectories.",
    )
    p.add_argument("--out", required=True, help="Output directory.")

    p = sub.add_parser("graph", help="Dump the similarity graph as CSV.")
    _add_dataset(p)
    _add_weighting(p)
    p.add_argument("--min-similarity", type=float, default=0.0)
    p.add_argument("--out", required=True, help="Graph CSV path.")

    p = sub.add_parser("rerun", help="Replay a run.json.")
    p.add_argument("run_json", help="run.json written by an earlier command.")
    p.add_argument("--out", default=None, help="Output directory (default: the run.json directory).")
    _add_log_dir(p)
    return parser


def _check_args(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    """Contradictory or out-of-range flags are usage errors (exit 2)."""
    if args.command == "cluster":
        args.expand = sorted(set(args.expand or []))
        if any(k < 1 for k in args.expand):
            parser.error("--expand values must be >= 1")
    elif args.command == "hac":
        args.k = sorted(set(args.k))
        if any(k < 1 for k in args.k):
            parser.error("--k values must be >= 1")
    elif args.command == "evaluate":
        if args.method and len(args.method) != len(args.assignment):
            parser.error("give one --method per --assignment")
    elif args.command == "generate":
        if (args.nodes is None) != (args.edges is None):
            parser.error("--nodes and --edges go together")
    for name in _PATHS:
        value = getattr(args, name, None)
        if isinstance(value, str):
            setattr(args, name, os.path.abspath(value))
        elif isinstance(value, list):
            setattr(args, name, [os.path.abspath(v) for v in value])


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _check_args(parser, args)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        COMMANDS[args.command](args)
    except (TrajmodError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
