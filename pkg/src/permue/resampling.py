"""Resampling schemes over a fixed coincidence matrix.

Each scheme redraws the pairing between left and right trials and
re-evaluates the coincidence total ``C`` and the centered statistic
``U`` on the redrawn pairing.  No spike data is touched: a replicate is
a function of matrix entries only, so B replicates cost B matrix
gathers rather than B recounting passes.

Schemes
-------
- trial shuffle: n index pairs drawn i.i.d. uniformly over the n(n-1)
  off-diagonal cells.  The expected replicate ``U`` given the data is
  ``-U_obs / n``, so replicate ``U`` values are recentered by adding
  ``U_obs / n`` before use.
- full bootstrap: left and right indices drawn independently uniformly
  over all n^2 cells.
- permutation: a uniform permutation ``pi`` pairs left trial i with
  right trial ``pi(i)``.  Under permutation the centered statistic is an
  affine function of the permuted total with positive slope,
  ``U = (n/(n-1)) C - A/(n-1)`` with ``A`` the full matrix sum: each row
  and column is picked exactly once, so the cross sum collapses to
  ``A - C``.

Replicates are generated in fixed-size chunks, each chunk on its own
derived substream, so results depend only on ``(matrix, scheme, B,
seed)`` and not on threading or call order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .rng import substream
from .stats import CoincidenceMatrix, u_stat

__all__ = [
    "ResampleScheme",
    "ReplicateSet",
    "draw_trial_shuffle",
    "replicate_C",
    "replicate_U",
    "u_from_pairs",
    "empirical_quantile",
]

_CHUNK = 4096


class ResampleScheme(Enum):
    TRIAL_SHUFFLE = "trial-shuffle"
    FULL_BOOTSTRAP = "full-bootstrap"
    PERMUTATION = "permutation"


@dataclass(frozen=True)
class ReplicateSet:
    """B resampled values of ``C`` (and optionally ``U``) for one matrix."""

    scheme: ResampleScheme
    B: int
    seed: int
    c: np.ndarray
    u: np.ndarray | None = None

    def __post_init__(self):
        if self.B < 2:
            raise ValueError("need at least 2 replicates")
        if self.c.shape != (self.B,):
            raise ValueError("c must hold exactly B replicates")
        if self.u is not None and self.u.shape != (self.B,):
            raise ValueError("u must hold exactly B replicates")


def draw_trial_shuffle(n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n index pairs i.i.d. uniform over the off-diagonal cells.

    Returns an (n, 2) integer array of (left, right) trial indices with
    left != right in every row.
    """
    if n < 2:
        raise ValueError("need at least 2 trials")
    i = rng.integers(0, n, size=n)
    j = rng.integers(0, n - 1, size=n)
    j = j + (j >= i)
    return np.column_stack([i, j])


def _shuffle_block(rng: np.random.Generator, rows: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    i = rng.integers(0, n, size=(rows, n))
    j = rng.integers(0, n - 1, size=(rows, n))
    j = j + (j >= i)
    return i, j


def _bootstrap_block(rng: np.random.Generator, rows: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    i = rng.integers(0, n, size=(rows, n))
    j = rng.integers(0, n, size=(rows, n))
    return i, j


def _permutation_block(rng: np.random.Generator, rows: int, n: int) -> np.ndarray:
    return rng.permuted(np.tile(np.arange(n), (rows, 1)), axis=1)


def _column_counts(j: np.ndarray, n: int) -> np.ndarray:
    rows = j.shape[0]
    flat = (np.arange(rows)[:, None] * n + j).ravel()
    return np.bincount(flat, minlength=rows * n).reshape(rows, n).astype(np.float64)


def _replicates(
    m: CoincidenceMatrix, scheme: ResampleScheme, B: int, seed: int, want_u: bool
) -> tuple[np.ndarray, np.ndarray | None]:
    a = m.a
    n = m.n
    if B < 2:
        raise ValueError("need at least 2 replicates")
    c = np.empty(B, dtype=np.float64)
    u = np.empty(B, dtype=np.float64) if want_u and scheme is not ResampleScheme.PERMUTATION else None
    rows_idx = np.arange(n)
    for chunk, start in enumerate(range(0, B, _CHUNK)):
        stop = min(start + _CHUNK, B)
        rows = stop - start
        rng = substream(seed, chunk)
        if scheme is ResampleScheme.PERMUTATION:
            perms = _permutation_block(rng, rows, n)
            c[start:stop] = a[rows_idx[None, :], perms].sum(axis=1)
            continue
        if scheme is ResampleScheme.TRIAL_SHUFFLE:
            i, j = _shuffle_block(rng, rows, n)
        else:
            i, j = _bootstrap_block(rng, rows, n)
        cc = a[i, j].sum(axis=1)
        c[start:stop] = cc
        if u is not None:
            # cross sum over all k, k' pairs: D = w_i' a w_j with pick counts,
            # evaluated as V = W_j a^T gathered at the left indices.
            w = _column_counts(j, n)
            v = w @ a.T
            d = np.take_along_axis(v, i, axis=1).sum(axis=1)
            u[start:stop] = cc - (d - cc) / (n - 1)
    if scheme is ResampleScheme.PERMUTATION and want_u:
        total = float(np.sum(a))
        u = (n / (n - 1)) * c - total / (n - 1)
    elif scheme is ResampleScheme.TRIAL_SHUFFLE and want_u:
        u = u + u_stat(m) / n
    return c, u


def replicate_C(m: CoincidenceMatrix, scheme: ResampleScheme, B: int, seed: int) -> ReplicateSet:
    """Draw B replicates of the coincidence total under ``scheme``."""
    c, _ = _replicates(m, scheme, B, seed, want_u=False)
    return ReplicateSet(scheme=scheme, B=B, seed=seed, c=c)


def replicate_U(m: CoincidenceMatrix, scheme: ResampleScheme, B: int, seed: int) -> ReplicateSet:
    """Draw B replicates of ``C`` and of the centered statistic under ``scheme``.

    For the trial shuffle the stored ``u`` is already recentered (the
    raw replicate mean sits at ``-U_obs / n``); for the permutation it
    is the exact affine image of ``c``.
    """
    c, u = _replicates(m, scheme, B, seed, want_u=True)
    return ReplicateSet(scheme=scheme, B=B, seed=seed, c=c, u=u)


def u_from_pairs(a: np.ndarray, left: np.ndarray, right: np.ndarray) -> float:
    """Evaluate one replicate ``U`` directly from its index pairs.

    ``U = sum_k a[l_k, r_k] - (1/(n-1)) sum_{k != k'} a[l_k, r_{k'}]``.
    Mostly useful as a slow cross-check of the batched evaluation.
    """
    left = np.asarray(left)
    right = np.asarray(right)
    n = left.size
    diag = float(a[left, right].sum())
    full = float(a[np.ix_(left, right)].sum())
    return diag - (full - diag) / (n - 1)


def empirical_quantile(values: np.ndarray, t: float) -> float:
    """Order-statistic quantile: the ``ceil(t * B)``-th smallest value.

    ``t`` must lie in (0, 1).  A small tolerance guards the ceiling
    against float rounding of ``t * B`` (0.95 * 100 evaluates above 95).
    """
    if not 0.0 < t < 1.0:
        raise ValueError(f"quantile level must be in (0, 1), got {t}")
    values = np.asarray(values, dtype=np.float64).ravel()
    b = values.size
    if b == 0:
        raise ValueError("need at least one value")
    tb = t * b
    k = math.ceil(tb - 1e-9 * max(1.0, tb))
    k = min(max(k, 1), b)
    return float(np.partition(values, k - 1)[k - 1])
