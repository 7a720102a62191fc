"""Sliding-window detection with permutation p-values and FDR control.

A window family slides a fixed-width window along the recording.  Each
window gets a two-sided pair of permutation p-values (excess and
deficit of coincidences), the pooled 2K p-values are screened with the
Benjamini-Hochberg step-up rule at level q, and the selected windows
are reported with the sign of their departure from independence.

Because ``p_upper + p_lower >= 1 + 1/(B+1)`` for the permutation test,
a window can never be selected on both sides at any q < 1/2.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .coincidence import Delayed
from .core import TrialSample, Window
from .resampling import ResampleScheme, replicate_C
from .rng import derive_seed
from .stats import CoincidenceMatrix, coincidence_matrix, total_count

__all__ = [
    "WindowFamily",
    "WindowResult",
    "Detection",
    "DetectionSet",
    "sliding_windows",
    "bh_select",
    "window_pvalues",
    "permutation_ue",
]


@dataclass(frozen=True)
class WindowFamily:
    """An ordered collection of analysis windows."""

    windows: tuple[Window, ...]

    def __post_init__(self):
        object.__setattr__(self, "windows", tuple(self.windows))
        if not self.windows:
            raise ValueError("window family must not be empty")

    def __len__(self) -> int:
        return len(self.windows)

    def __iter__(self):
        return iter(self.windows)


def sliding_windows(span: float, width: float, step: float) -> WindowFamily:
    """Windows ``[k step, k step + width]`` for all k with ``k step + width <= span``.

    The right edge test uses a relative float tolerance so that spans
    which are exact multiples of the step keep their final window (with
    width 0.1, step 0.01 and span 2.0 the family has 191 windows, the
    last one ending exactly at 2.0).
    """
    if not (width > 0.0 and step > 0.0):
        raise ValueError("width and step must be positive")
    if width > span:
        raise ValueError(f"window width {width} exceeds the recording span {span}")
    tol = 1e-9 * max(1.0, span)
    windows = []
    k = 0
    while True:
        a = k * step
        b = a + width
        if b > span + tol:
            break
        windows.append(Window(a, min(b, span)))
        k += 1
    return WindowFamily(tuple(windows))


def bh_select(pvals, q: float) -> tuple[int, float | None]:
    """Benjamini-Hochberg step-up selection.

    Sorts the m p-values increasingly and returns ``k = max{l : p(l) <=
    l q / m}`` together with the selection threshold ``p(k)``; ``(0,
    None)`` when no l qualifies.  Requires ``0 < q < 1/2`` (the two-sided
    pooling below is only anti-symmetric in that range).
    """
    if not 0.0 < q < 0.5:
        raise ValueError(f"q must lie in (0, 1/2), got {q}")
    p = np.sort(np.asarray(pvals, dtype=np.float64))
    m = p.size
    if m == 0:
        raise ValueError("need at least one p-value")
    if np.any(p <= 0.0) or np.any(p > 1.0) or np.any(np.isnan(p)):
        raise ValueError("p-values must lie in (0, 1]")
    ranks = np.arange(1, m + 1)
    ok = p <= ranks * (q / m)
    if not ok.any():
        return 0, None
    k = int(ranks[ok][-1])
    return k, float(p[k - 1])


@dataclass(frozen=True)
class WindowResult:
    """Two-sided permutation p-values of one window."""

    window: Window
    p_plus: float
    p_minus: float


@dataclass(frozen=True)
class Detection:
    """A selected window with the sign of its dependence."""

    window: Window
    epsilon: int
    p: float


@dataclass(frozen=True)
class DetectionSet:
    """Full outcome of a multi-window detection run."""

    q: float
    B: int
    seed: int
    delta: float
    windows: tuple[WindowResult, ...]
    k: int
    threshold: float | None
    detections: tuple[Detection, ...]

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "B": self.B,
            "seed": self.seed,
            "delta": self.delta,
            "windows": [
                {"a": w.window.a, "b": w.window.b, "p_plus": w.p_plus, "p_minus": w.p_minus}
                for w in self.windows
            ],
            "k": self.k,
            "threshold": self.threshold,
            "detections": [
                {"a": d.window.a, "b": d.window.b, "epsilon": d.epsilon, "p": d.p}
                for d in self.detections
            ],
        }

    def csv_rows(self) -> list[dict]:
        """One flat row per window (epsilon 0 when not selected)."""
        by_key = {(d.window.a, d.window.b): d.epsilon for d in self.detections}
        return [
            {
                "a": w.window.a,
                "b": w.window.b,
                "p_plus": w.p_plus,
                "p_minus": w.p_minus,
                "epsilon": by_key.get((w.window.a, w.window.b), 0),
            }
            for w in self.windows
        ]


def window_pvalues(
    sample: TrialSample, window: Window, delta: float, B: int, seed: int
) -> WindowResult:
    """Two-sided permutation p-values for one window.

    A window whose coincidence matrix is identically zero (no spike pair
    anywhere near coincident in any trial pairing) reports p = 1 on both
    sides; the permutation distribution is degenerate at the observed
    value there, so this equals the counting formula without the draws.
    """
    mat = coincidence_matrix(sample, window, Delayed(delta))
    if not mat.a.any():
        return WindowResult(window=window, p_plus=1.0, p_minus=1.0)
    rep = replicate_C(mat, ResampleScheme.PERMUTATION, B, seed)
    obs = total_count(mat)
    p_plus = (1 + int((rep.c >= obs).sum())) / (B + 1)
    p_minus = (1 + int((rep.c <= obs).sum())) / (B + 1)
    return WindowResult(window=window, p_plus=p_plus, p_minus=p_minus)


def permutation_ue(
    sample: TrialSample,
    family: WindowFamily,
    delta: float,
    q: float,
    B: int,
    seed: int,
    threads: int = 1,
    sides: str = "both",
) -> DetectionSet:
    """Detect dependent windows by permutation p-values under BH at level q.

    With ``sides="both"`` (the default) the excess and deficit p-values
    of all K windows are pooled into one BH pass over 2K tests, so both
    directions of dependence are detectable; ``sides="upper"`` screens
    only the K excess p-values.  Each window consumes its own derived
    substream, so the result is independent of ``threads`` and of window
    evaluation order.
    """
    if sides not in ("both", "upper"):
        raise ValueError(f"sides must be 'both' or 'upper', got {sides}")
    if threads < 1:
        raise ValueError("threads must be >= 1")

    def one(idx_window):
        idx, window = idx_window
        return window_pvalues(sample, window, delta, B, derive_seed(seed, idx))

    indexed = list(enumerate(family))
    if threads == 1:
        results = [one(iw) for iw in indexed]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, indexed))

    if sides == "both":
        pooled = [r.p_plus for r in results] + [r.p_minus for r in results]
    else:
        pooled = [r.p_plus for r in results]
    k, threshold = bh_select(pooled, q)

    detections = []
    if k > 0:
        for r in results:
            if r.p_plus <= threshold:
                detections.append(Detection(window=r.window, epsilon=+1, p=r.p_plus))
            elif sides == "both" and r.p_minus <= threshold:
                detections.append(Detection(window=r.window, epsilon=-1, p=r.p_minus))

    return DetectionSet(
        q=q,
        B=B,
        seed=seed,
        delta=delta,
        windows=tuple(results),
        k=k,
        threshold=threshold,
        detections=tuple(detections),
    )
