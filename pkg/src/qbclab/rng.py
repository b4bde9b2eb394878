"""Reproducible random streams.

Every stream is a Philox (counter-based) generator keyed by the master seed and
a path such as ``(session_index, role)``.  Streams for different paths are
statistically independent and do not depend on the order in which they are
created, so results are identical for any degree of parallelism.
"""
from __future__ import annotations

import numpy as np

DEFAULT_SEED = 20240917


def stream(master_seed: int, *path: int) -> np.random.Generator:
    if master_seed < 0 or master_seed >= 2**64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {master_seed}")
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))
