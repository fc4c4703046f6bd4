"""Deterministic derivation of child random generators.

Every stochastic task in the toolkit draws from a generator derived from
``(job_seed, stream_label, index)``.  String labels are folded to integers
with CRC-32 so the derivation is stable across platforms and sessions.
"""

from __future__ import annotations

import zlib

import numpy as np


def _as_key(part) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    return int(part)


def child_seed_sequence(seed, *path) -> np.random.SeedSequence:
    """SeedSequence for the task identified by ``path`` under ``seed``."""
    if seed is None:
        return np.random.SeedSequence()
    return np.random.SeedSequence((int(seed),) + tuple(_as_key(p) for p in path))


def child_rng(seed, *path) -> np.random.Generator:
    """Generator for the task identified by ``path`` under ``seed``.

    ``seed=None`` yields a fresh nondeterministic generator; any integer
    seed makes the result a pure function of ``(seed, *path)``.
    """
    return np.random.default_rng(child_seed_sequence(seed, *path))
