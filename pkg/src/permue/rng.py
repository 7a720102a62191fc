"""Deterministic random-stream derivation.

All randomness in this package flows from 64-bit integer seeds through
counter-based Philox bit generators.  Independent substreams are derived
from a root seed plus an integer path (one stream per trial, per window,
per replicate chunk, ...), so results are bit-identical for a given seed
no matter how the work is ordered or scheduled across workers.
"""

from __future__ import annotations

import numpy as np

__all__ = ["substream", "derive_seed"]


def substream(seed: int, *path: int) -> np.random.Generator:
    """Return a ``Generator`` over the Philox substream identified by ``(seed, *path)``.

    Distinct paths yield statistically independent streams; equal
    arguments always yield the same stream.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *path: int) -> int:
    """Derive a new integer seed from ``(seed, *path)``.

    Used to hand a child component (a simulation run, a window, ...) its
    own root seed so that nested derivations cannot collide.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, np.uint64)[0])
