"""Window statistics over the trial-pair coincidence matrix.

For a sample of n trials and one window, the coincidence matrix ``a``
holds at entry ``(i, j)`` the coincidence count between the left train
of trial i and the right train of trial j.  Everything downstream (the
centering estimate, the U-statistic, its variance, and every resampling
scheme) is a function of this matrix alone, so it is computed once per
window.

The observed total is the diagonal trace ``C = sum_i a[i, i]``; the
independence baseline is estimated from the off-diagonal block,
``C0 = (sum_{i != j} a[i, j]) / (n - 1)``; their difference ``U = C - C0``
is a centered two-sample U-statistic whose variance is estimated from
the symmetric kernel ``h(i, j) = (a[i,i] + a[j,j] - a[i,j] - a[j,i]) / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coincidence import Binned, CoincidenceKind, Delayed, bin_count, bin_occupancy
from .core import TrialSample, Window

__all__ = [
    "CoincidenceMatrix",
    "DegenerateVariance",
    "WindowStats",
    "coincidence_matrix",
    "total_count",
    "c0_hat",
    "u_stat",
    "h_kernel",
    "sigma2_hat",
    "z_stat",
    "window_stats",
]


class DegenerateVariance(ValueError):
    """The variance estimate is zero, so no standardized statistic exists."""


@dataclass(frozen=True)
class CoincidenceMatrix:
    """Coincidence counts for every ordered pair of trials on one window."""

    a: np.ndarray
    kind: CoincidenceKind | None = None
    window: Window | None = None

    def __post_init__(self):
        arr = np.array(self.a, dtype=np.float64, copy=True)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"matrix must be square, got shape {arr.shape}")
        if arr.shape[0] < 2:
            raise ValueError("matrix needs at least 2 trials")
        if not np.all(np.isfinite(arr)):
            raise ValueError("matrix entries must be finite")
        if np.any(arr < 0.0):
            raise ValueError("coincidence counts cannot be negative")
        arr.flags.writeable = False
        object.__setattr__(self, "a", arr)

    @property
    def n(self) -> int:
        return self.a.shape[0]


def _restricted(times: np.ndarray, window: Window) -> np.ndarray:
    lo = np.searchsorted(times, window.a, side="left")
    hi = np.searchsorted(times, window.b, side="right")
    return times[lo:hi]


def _delayed_matrix(left: list[np.ndarray], right: list[np.ndarray], delta: float) -> np.ndarray:
    """All-pairs delayed counts via one merged sort of the right trains.

    The merged right spikes are sorted once; a per-trial prefix-count
    table then converts each interval query ``[u - delta, u + delta]``
    (located with two binary searches) into a count per right trial.
    Entry by entry this matches the sweep in ``delayed_count`` exactly:
    both count right spikes ``v`` with ``u - delta <= v <= u + delta``.
    """
    n = len(left)
    sizes = np.array([t.size for t in right], dtype=np.int64)
    out = np.zeros((n, n), dtype=np.float64)
    if sizes.sum() == 0:
        return out
    merged = np.concatenate(right)
    owner = np.repeat(np.arange(n), sizes)
    order = np.argsort(merged, kind="stable")
    merged = merged[order]
    owner = owner[order]
    # prefix[p, j] = number of the first p merged spikes belonging to right trial j
    prefix = np.zeros((merged.size + 1, n), dtype=np.int64)
    onehot = np.zeros((merged.size, n), dtype=np.int64)
    onehot[np.arange(merged.size), owner] = 1
    np.cumsum(onehot, axis=0, out=prefix[1:])
    for i, u in enumerate(left):
        if u.size == 0:
            continue
        hi = np.searchsorted(merged, u + delta, side="right")
        lo = np.searchsorted(merged, u - delta, side="left")
        out[i] = (prefix[hi] - prefix[lo]).sum(axis=0)
    return out


def _binned_matrix(
    left: list[np.ndarray], right: list[np.ndarray], window: Window, delta: float
) -> np.ndarray:
    m = bin_count(window, delta)
    occ1 = np.stack([bin_occupancy(t, window, delta, m) for t in left])
    occ2 = np.stack([bin_occupancy(t, window, delta, m) for t in right])
    return occ1.astype(np.float64) @ occ2.astype(np.float64).T


def coincidence_matrix(sample: TrialSample, window: Window, kind: CoincidenceKind) -> CoincidenceMatrix:
    """Build the n x n coincidence matrix of ``sample`` on ``window``.

    Requires at least 2 trials.  Trains are restricted to the closed
    window before counting.
    """
    if sample.n < 2:
        raise ValueError("coincidence matrix needs at least 2 trials")
    sample.check_window(window)
    left = [_restricted(trial.x1.times, window) for trial in sample.trials]
    right = [_restricted(trial.x2.times, window) for trial in sample.trials]
    if isinstance(kind, Delayed):
        a = _delayed_matrix(left, right, kind.delta)
    elif isinstance(kind, Binned):
        a = _binned_matrix(left, right, window, kind.delta)
    else:
        raise TypeError(f"unknown coincidence kind: {kind!r}")
    return CoincidenceMatrix(a=a, kind=kind, window=window)


def total_count(m: CoincidenceMatrix) -> float:
    """Observed coincidence total ``C``: the diagonal sum of the matrix."""
    return float(np.trace(m.a))


def c0_hat(m: CoincidenceMatrix) -> float:
    """Mean off-diagonal estimate of the independence expectation of ``C``.

    Each off-diagonal entry pairs trains from different trials, which
    are independent by the trial structure, so their mean estimates the
    per-trial expectation under independence; the sum over the n(n-1)
    entries divided by (n - 1) scales it back to an n-trial total.
    """
    a = m.a
    rows = a.sum(axis=1) - np.diag(a)
    return math.fsum(rows.tolist()) / (m.n - 1)


def u_stat(m: CoincidenceMatrix) -> float:
    """Centered statistic ``U = C - C0``."""
    return total_count(m) - c0_hat(m)


def h_kernel(m: CoincidenceMatrix, i: int, j: int) -> float:
    """Symmetric kernel ``h(i, j) = (a[i,i] + a[j,j] - a[i,j] - a[j,i]) / 2``.

    Grouped as ``((a[i,i] - a[i,j]) + (a[j,j] - a[j,i])) / 2`` so that
    swapping ``i`` and ``j`` adds the exact same two floats and the
    symmetry holds bit-for-bit.
    """
    a = m.a
    return 0.5 * ((a[i, i] - a[i, j]) + (a[j, j] - a[j, i]))


def _h_matrix(a: np.ndarray) -> np.ndarray:
    p = np.diag(a)[:, None] - a
    return 0.5 * (p + p.T)


def sigma2_hat(m: CoincidenceMatrix) -> float:
    """Jackknife-style variance estimate of the centered statistic.

    Computes ``4 / (n (n-1) (n-2)) * sum_{i} sum_{j != i, k != i, j != k}
    h(i,j) h(i,k)`` through the row sums ``S_i = sum_{j != i} h(i, j)``
    and row square sums ``Q_i = sum_{j != i} h(i, j)^2``, using the
    identity ``sum_{j != k} h(i,j) h(i,k) = S_i^2 - Q_i``.  The sum of
    products of kernel values is not a square, so the estimate itself
    can come out negative (typically for small n on noise-only
    matrices); non-positive values are clamped to zero, which callers
    treat as degenerate.
    """
    n = m.n
    if n < 3:
        raise ValueError("variance estimate needs at least 3 trials")
    h = _h_matrix(m.a)
    s = h.sum(axis=1)
    q = (h * h).sum(axis=1)
    acc = math.fsum((s * s - q).tolist())
    value = 4.0 * acc / (n * (n - 1) * (n - 2))
    return max(value, 0.0)


def z_stat(m: CoincidenceMatrix) -> float:
    """Standardized statistic ``Z = U / sqrt(n * sigma2)``.

    Raises
    ------
    DegenerateVariance
        If the variance estimate is zero (for example a constant matrix).
    """
    s2 = sigma2_hat(m)
    if s2 <= 0.0:
        raise DegenerateVariance("zero variance estimate; Z is undefined")
    return u_stat(m) / math.sqrt(m.n * s2)


@dataclass(frozen=True)
class WindowStats:
    """All observed statistics of one window.  ``z_obs`` is None when degenerate."""

    c_obs: float
    c0: float
    u_obs: float
    sigma2: float
    z_obs: float | None

    @property
    def degenerate(self) -> bool:
        return self.z_obs is None


def window_stats(m: CoincidenceMatrix) -> WindowStats:
    """Compute ``C``, ``C0``, ``U``, ``sigma2`` and ``Z`` for one matrix."""
    c = total_count(m)
    c0 = c0_hat(m)
    s2 = sigma2_hat(m)
    z = None
    if s2 > 0.0:
        z = (c - c0) / math.sqrt(m.n * s2)
    return WindowStats(c_obs=c, c0=c0, u_obs=c - c0, sigma2=s2, z_obs=z)
