"""Labeled seed derivation: one user seed fans out to independent component streams."""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(seed: int, *labels: object) -> int:
    """Hash ``seed`` with ``labels`` into a 64-bit seed.

    The same (seed, labels) always yields the same value, and distinct labels
    give unrelated streams, e.g. ``derive_seed(7, "null", cluster_id, replicate)``.
    """
    h = hashlib.blake2b(digest_size=8)
    h.update(repr((int(seed),) + tuple(labels)).encode("utf-8"))
    return int.from_bytes(h.digest(), "little")


def rng_for(seed: int, *labels: object) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, *labels))
