"""Streaming JSONL logger writing pipeline events to separate files as they happen."""

from __future__ import annotations

import json
import os
from datetime import datetime, timezone
from typing import Any, TYPE_CHECKING

if TYPE_CHECKING:
    from trajmod.modularity import NullStats


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _write(f, obj: dict) -> None:
    f.write(json.dumps(obj) + "\n")
    f.flush()


class RunLogger:
    """Writes events to stages.jsonl and splits.jsonl."""

    def __init__(self, log_dir: str):
        os.makedirs(log_dir, exist_ok=True)
        self._log_dir = log_dir
        self._stages_f = open(os.path.join(log_dir, "stages.jsonl"), "a")
        self._splits_f = open(os.path.join(log_dir, "splits.jsonl"), "a")

    def __enter__(self) -> RunLogger:
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()

    def log_stage(self, step: int, stage: str, elapsed: float, **counts: Any) -> None:
        """Log one pipeline stage (load, weighting, graph, hierarchy, ...) and its counts."""
        _write(self._stages_f, {
            "step": step,
            "timestamp": _now(),
            "stage": stage,
            "elapsed": elapsed,
            **counts,
        })

    def log_split(
        self,
        step: int,
        cluster_id: int,
        depth: int,
        size: int,
        n_children: int,
        modularity: float | None,
        decision: str,
        stats: NullStats | None = None,
    ) -> None:
        event = {
            "step": step,
            "timestamp": _now(),
            "cluster_id": cluster_id,
            "depth": depth,
            "size": size,
            "n_children": n_children,
            "modularity": modularity,
            "decision": decision,
        }
        if stats is not None:
            event["null"] = {"mean": stats.mean, "std": stats.std, "replicates": stats.replicates}
        _write(self._splits_f, event)

    def close(self) -> None:
        for f in (self._stages_f, self._splits_f):
            f.close()
