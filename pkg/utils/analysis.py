#!/usr/bin/env python3
"""Aggregate and display evaluation reports from experiment directories.

Usage:
    # Pass a parent directory (each subfolder is an experiment):
    python utils/analysis.py results/compare

    # Pass individual experiment directories:
    python utils/analysis.py results/compare/k3_dev0.1 results/compare/k5_dev0.2
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass, field


@dataclass
class MethodRow:
    method: str
    level: int | None
    k: int
    ari: float | None
    intra: float
    inter: float
    start_ratio: float
    end_ratio: float


@dataclass
class ExperimentStats:
    exp_dir: str
    n: int = 0
    corridors: int | None = None
    deviation: float = 0.0
    rows: list[MethodRow] = field(default_factory=list)
    top_modularity: dict[str, float | None] = field(default_factory=dict)


def _ratio(intra: str, total: str) -> float:
    """Share of the total inertia that stays inside clusters."""
    t = float(total)
    return float(intra) / t if t else 0.0


def _read_generator_params(exp_dir: str) -> dict:
    """Parameters of the ``generate`` run that produced the experiment's data, if recorded."""
    path = os.path.join(exp_dir, "data", "run.json")
    if not os.path.exists(path):
        return {}
    with open(path) as f:
        return json.load(f).get("params", {})


def _split_method(name: str) -> tuple[str, int | None]:
    """``modularity_spatial@L2`` -> (``modularity_spatial``, 2); names without a level pass through."""
    method, sep, level = name.rpartition("@L")
    if not sep or not level.isdigit():
        return name, None
    return method, int(level)


def _weighting_of(method: str) -> str:
    return method.rsplit("_", 1)[-1]


def _read_top_modularity(exp_dir: str) -> dict[str, float | None]:
    """Top-level split modularity of every ``modularity_<weighting>`` run in the experiment."""
    out: dict[str, float | None] = {}
    for child in sorted(os.listdir(exp_dir)):
        path = os.path.join(exp_dir, child, "summary.json")
        if child.startswith("modularity_") and os.path.isfile(path):
            with open(path) as f:
                out[child.removeprefix("modularity_")] = json.load(f).get("top_level_modularity")
    return out


def analyze_experiment(exp_dir: str) -> ExperimentStats | None:
    """Analyze a single experiment directory containing report.csv and data/run.json."""
    report_path = os.path.join(exp_dir, "report.csv")
    if not os.path.exists(report_path):
        return None

    stats = ExperimentStats(exp_dir=exp_dir)
    params = _read_generator_params(exp_dir)
    stats.n = int(params.get("n", 0))
    stats.corridors = params.get("corridors")
    stats.deviation = float(params.get("deviation", 0.0))
    stats.top_modularity = _read_top_modularity(exp_dir)

    with open(report_path) as f:
        for r in csv.DictReader(f):
            method, level = _split_method(r["method"])
            stats.rows.append(MethodRow(
                method=method,
                level=level,
                k=int(r["k"]),
                ari=float(r["ari"]) if r["ari"] else None,
                intra=float(r["intraclass_overlap"]),
                inter=float(r["interclass_overlap"]),
                start_ratio=_ratio(r["start_intra"], r["start_total"]),
                end_ratio=_ratio(r["end_intra"], r["end_total"]),
            ))
    return stats


def resolve_experiment_dirs(paths: list[str]) -> list[str]:
    """Given CLI paths, return a flat list of experiment directories.

    If a path itself contains report.csv, treat it as an experiment dir.
    Otherwise treat it as a parent and use its immediate subdirectories.
    """
    exp_dirs: list[str] = []
    for p in paths:
        if os.path.isfile(os.path.join(p, "report.csv")):
            exp_dirs.append(p)
        elif os.path.isdir(p):
            for child in sorted(os.listdir(p)):
                child_path = os.path.join(p, child)
                if os.path.isdir(child_path) and os.path.isfile(os.path.join(child_path, "report.csv")):
                    exp_dirs.append(child_path)
    return exp_dirs


def _format_q(q: float | None) -> str:
    return "-" if q is None else f"{q:.3f}"


def print_table(all_stats: list[ExperimentStats]) -> None:
    headers = [
        "Experiment",
        "Method",
        "N",
        "Corridors",
        "Dev",
        "Level",
        "k",
        "ARI",
        "Intra",
        "Inter",
        "Start W/T",
        "End W/T",
        "Top Q",
    ]

    rows: list[list[str]] = []
    for s in all_stats:
        for m in s.rows:
            rows.append([
                os.path.basename(os.path.normpath(s.exp_dir)),
                m.method,
                str(s.n),
                "-" if s.corridors is None else str(s.corridors),
                f"{s.deviation:.2f}",
                "-" if m.level is None else str(m.level),
                str(m.k),
                "-" if m.ari is None else f"{m.ari:.3f}",
                f"{m.intra:.2f}",
                f"{m.inter:.2f}",
                f"{m.start_ratio:.0%}",
                f"{m.end_ratio:.0%}",
                _format_q(s.top_modularity.get(_weighting_of(m.method))),
            ])

    col_widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            col_widths[i] = max(col_widths[i], len(cell))

    def fmt_row(cells: list[str]) -> str:
        parts = []
        for i, cell in enumerate(cells):
            # Right-align numeric columns (index 2+), left-align names
            if i < 2:
                parts.append(cell.ljust(col_widths[i]))
            else:
                parts.append(cell.rjust(col_widths[i]))
        return " | ".join(parts)

    sep = "-+-".join("-" * w for w in col_widths)

    print(fmt_row(headers))
    print(sep)
    for row in rows:
        print(fmt_row(row))


def main() -> None:
    parser = argparse.ArgumentParser(
        description="Analyze experiment directories and print a method comparison table."
    )
    parser.add_argument(
        "paths",
        nargs="+",
        help="Experiment directories (with report.csv) or parent directories containing them.",
    )
    args = parser.parse_args()

    exp_dirs = resolve_experiment_dirs(args.paths)
    if not exp_dirs:
        print("No experiment directories found.", file=sys.stderr)
        sys.exit(1)

    all_stats = [s for s in (analyze_experiment(d) for d in exp_dirs) if s and s.rows]
    if not all_stats:
        print("No valid reports found.", file=sys.stderr)
        sys.exit(1)

    print_table(all_stats)


if __name__ == "__main__":
    main()
