"""Coincidence counts for a pair of spike trains on one window.

Two notions of a coincidence are supported.  The binned count chops the
window into bins of width ``delta`` and counts bins hit by both trains.
The delayed count is symmetric in time and counts spike pairs at most
``delta`` apart; it is computed by a single forward sweep over the two
sorted trains whose cost scales with the number of spikes plus the
number of coincidences, not with the number of spike pairs.

An :class:`OpCounter` can be attached to a counting call to measure that
cost.  The accounting of ``total`` is fixed so measurements are
comparable across kernels: the delayed sweep charges 2 per left-train
spike processed (the two interval bounds) plus 1 per spike-time
comparison evaluated -- a comparison costs the same whether it advances
the pointer, counts a pair, or ends the scan; the binned kernel charges
2 per bin (one occupancy lookup per train).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .core import SpikeTrain, Window

__all__ = [
    "Delayed",
    "Binned",
    "CoincidenceKind",
    "OpCounter",
    "delayed_count",
    "binned_count",
    "count",
]


@dataclass(frozen=True)
class Delayed:
    """Delayed coincidences: pairs ``(u, v)`` with ``|u - v| <= delta``."""

    delta: float

    def __post_init__(self):
        if not (np.isfinite(self.delta) and self.delta > 0.0):
            raise ValueError(f"delta must be positive, got {self.delta}")


@dataclass(frozen=True)
class Binned:
    """Binned coincidences: bins of width ``delta`` hit by both trains."""

    delta: float

    def __post_init__(self):
        if not (np.isfinite(self.delta) and self.delta > 0.0):
            raise ValueError(f"delta must be positive, got {self.delta}")


CoincidenceKind = Union[Delayed, Binned]


@dataclass
class OpCounter:
    """Operation tally accumulated over one or more counting calls.

    ``comparisons`` counts spike-time comparisons actually evaluated;
    ``total`` follows the fixed accounting described in the module
    docstring.
    """

    comparisons: int = 0
    total: int = 0

    def add(self, comparisons: int, total: int) -> None:
        if comparisons < 0 or total < 0:
            raise ValueError("operation tallies only ever increase")
        self.comparisons += comparisons
        self.total += total


def _times(train) -> np.ndarray:
    if isinstance(train, SpikeTrain):
        return train.times
    return np.asarray(train, dtype=np.float64)


def delayed_count(x1, x2, delta: float, counter: OpCounter | None = None) -> int:
    """Count pairs ``(u, v)`` of ``x1`` x ``x2`` with ``|u - v| <= delta``.

    Both trains must be sorted ascending (spike trains always are).  The
    sweep keeps a single pointer into ``x2``: for each ``u`` it first
    discards right spikes below ``u - delta`` (they can never match a
    later ``u`` either), then counts forward while ``v <= u + delta``.

    Parameters
    ----------
    x1, x2 : SpikeTrain or array-like
        Sorted spike times, already restricted to the window of interest.
    delta : float
        Coincidence half-width in seconds, > 0.
    counter : OpCounter, optional
        If given, receives the comparison and operation tallies.

    Returns
    -------
    int
        The delayed coincidence count.
    """
    if not (np.isfinite(delta) and delta > 0.0):
        raise ValueError(f"delta must be positive, got {delta}")
    t1 = _times(x1).tolist()
    t2 = _times(x2).tolist()
    n2 = len(t2)
    c = 0
    j = 0
    comparisons = 0
    processed = 0
    for u in t1:
        processed += 1
        lo = u - delta
        while j < n2:
            comparisons += 1
            if t2[j] < lo:
                j += 1
            else:
                break
        if j == n2:
            break
        hi = u + delta
        k = j
        while k < n2:
            comparisons += 1
            if t2[k] <= hi:
                c += 1
                k += 1
            else:
                break
    if counter is not None:
        counter.add(comparisons, 2 * processed + comparisons)
    return c


def bin_count(window: Window, delta: float) -> int:
    """Number of bins of width ``delta`` tiling ``window``; must be an integer >= 2."""
    if not (np.isfinite(delta) and delta > 0.0):
        raise ValueError(f"delta must be positive, got {delta}")
    ratio = window.length / delta
    m = int(round(ratio))
    if m < 2 or abs(m * delta - window.length) > 1e-9 * max(window.length, delta):
        raise ValueError(
            f"window length {window.length} must be an integer multiple (>= 2) of delta {delta}"
        )
    return m


def bin_occupancy(times: np.ndarray, window: Window, delta: float, m: int) -> np.ndarray:
    """Boolean vector marking bins of ``window`` hit by at least one spike.

    Bins are ``[a + (l-1) delta, a + l delta)`` for ``l = 1..m``, except
    that the last bin also includes its right endpoint ``b`` so that the
    bins partition the closed window.
    """
    occ = np.zeros(m, dtype=bool)
    if times.size == 0:
        return occ
    if times[0] < window.a or times[-1] > window.b:
        raise ValueError("spikes outside the window; restrict the train first")
    idx = np.floor((times - window.a) / delta).astype(np.int64)
    np.clip(idx, 0, m - 1, out=idx)
    occ[idx] = True
    return occ


def binned_count(x1, x2, window: Window, delta: float, counter: OpCounter | None = None) -> int:
    """Count bins of width ``delta`` in ``window`` hit by both trains.

    The window length must be an integer multiple (>= 2) of ``delta``.
    Both trains must already be restricted to the window.
    """
    m = bin_count(window, delta)
    occ1 = bin_occupancy(_times(x1), window, delta, m)
    occ2 = bin_occupancy(_times(x2), window, delta, m)
    if counter is not None:
        counter.add(2 * m, 2 * m)
    return int(np.count_nonzero(occ1 & occ2))


def count(
    kind: CoincidenceKind,
    x1,
    x2,
    window: Window,
    counter: OpCounter | None = None,
) -> int:
    """Dispatch to :func:`delayed_count` or :func:`binned_count` by ``kind``."""
    if isinstance(kind, Delayed):
        return delayed_count(x1, x2, kind.delta, counter=counter)
    if isinstance(kind, Binned):
        return binned_count(x1, x2, window, kind.delta, counter=counter)
    raise TypeError(f"unknown coincidence kind: {kind!r}")
