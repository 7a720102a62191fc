"""Simulation experiments: detection error rates and p-value studies.

``estimate_rates`` re-runs a full multi-window analysis on freshly
simulated samples and scores the detections against the configured
ground-truth dependence regions, reporting the empirical false
discovery rate FDR = E[(V / R) 1{R > 0}] and false non-discovery rate
FNDR = E[(T / (m - R)) 1{m - R > 0}] over runs.  Three analysis methods
are supported:

- "P": two-sided permutation p-values pooled over 2K tests under BH.
- "TSC": per-window trial-shuffle counting test, excess side only,
  thresholded at a fixed level 0.05 with no multiplicity correction.
- "TSC+BH": the same K excess p-values under BH at level q.

``pvalue_cdf_study`` draws repeated samples from one configuration and
records the upper-tail p-value of each requested method on the full
recording window, yielding the empirical p-value distributions used to
compare level and power across methods.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .coincidence import Delayed
from .core import Window
from .multiwindow import WindowFamily, bh_select, permutation_ue
from .rng import derive_seed
from .sigtest import TestMethod, run_test
from .simulate import SimConfig, simulate_sample
from .stats import coincidence_matrix

__all__ = [
    "ConfusionCounts",
    "RateEstimates",
    "ground_truth",
    "estimate_rates",
    "pvalue_cdf_study",
    "TSC_LEVEL",
]

# fixed per-window level of the uncorrected TSC baseline
TSC_LEVEL = 0.05


@dataclass(frozen=True)
class ConfusionCounts:
    """Per-run test counts split by ground truth and decision.

    ``v``/``s`` are rejected tests on independent/dependent windows;
    ``u``/``t`` are accepted tests on independent/dependent windows;
    ``m`` is the total number of tests, ``m0`` of those on independent
    windows, and ``r`` the number of rejections.
    """

    v: int
    s: int
    u: int
    t: int
    m: int
    m0: int

    @property
    def r(self) -> int:
        return self.v + self.s

    def __post_init__(self):
        if min(self.v, self.s, self.u, self.t) < 0:
            raise ValueError("counts cannot be negative")
        if self.v + self.s + self.u + self.t != self.m:
            raise ValueError("counts must partition the m tests")
        if self.v + self.u != self.m0:
            raise ValueError("independent-window tests must sum to m0")


@dataclass(frozen=True)
class RateEstimates:
    """Averaged error rates over simulation runs."""

    method: str
    runs: int
    fdr: float
    fndr: float
    mean_r: float

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "runs": self.runs,
            "fdr": self.fdr,
            "fndr": self.fndr,
            "mean_rejections": self.mean_r,
        }


def ground_truth(config: SimConfig, family: WindowFamily) -> np.ndarray:
    """Boolean label per window: does it meet any configured dependence region?

    A window counts as dependent as soon as it intersects a region under
    closed-interval intersection, so a window exactly abutting a region
    boundary is labeled dependent too.
    """
    labels = np.zeros(len(family), dtype=bool)
    for idx, window in enumerate(family):
        for region in config.dependence:
            if window.a <= region.b and window.b >= region.a:
                labels[idx] = True
                break
    return labels


def _confusion(rejected_dep: int, rejected_ind: int, tests_dep: int, tests_ind: int) -> ConfusionCounts:
    return ConfusionCounts(
        v=rejected_ind,
        s=rejected_dep,
        u=tests_ind - rejected_ind,
        t=tests_dep - rejected_dep,
        m=tests_dep + tests_ind,
        m0=tests_ind,
    )


def _run_p(sample, family, dep, delta, q, B, seed, threads) -> ConfusionCounts:
    ds = permutation_ue(sample, family, delta, q, B, seed, threads=threads)
    k = len(family)
    rejected_ind = 0
    rejected_dep = 0
    for det in ds.detections:
        if dep[_window_index(family, det.window)]:
            rejected_dep += 1
        else:
            rejected_ind += 1
    return _confusion(rejected_dep, rejected_ind, 2 * int(dep.sum()), 2 * (k - int(dep.sum())))


def _window_index(family: WindowFamily, window: Window) -> int:
    # windows are unique by construction; linear scan is fine at K ~ 200
    for idx, w in enumerate(family):
        if w.a == window.a and w.b == window.b:
            return idx
    raise KeyError(f"window [{window.a}, {window.b}] not in family")


def _tsc_pvalues(sample, family, delta, B, seed, threads) -> np.ndarray:
    from concurrent.futures import ThreadPoolExecutor

    def one(idx_window):
        idx, window = idx_window
        mat = coincidence_matrix(sample, window, Delayed(delta))
        if not mat.a.any():
            return 1.0
        return run_test(mat, TestMethod.TSC, B, derive_seed(seed, idx)).p_upper

    indexed = list(enumerate(family))
    if threads == 1:
        return np.array([one(iw) for iw in indexed])
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return np.array(list(pool.map(one, indexed)))


def _run_tsc(sample, family, dep, delta, q, B, seed, threads, corrected) -> ConfusionCounts:
    pvals = _tsc_pvalues(sample, family, delta, B, seed, threads)
    if corrected:
        k, threshold = bh_select(pvals, q)
        rejected = pvals <= threshold if k > 0 else np.zeros(len(pvals), dtype=bool)
    else:
        rejected = pvals <= TSC_LEVEL
    rejected_dep = int(np.sum(rejected & dep))
    rejected_ind = int(np.sum(rejected & ~dep))
    return _confusion(rejected_dep, rejected_ind, int(dep.sum()), int((~dep).sum()))


def estimate_rates(
    config: SimConfig,
    family: WindowFamily,
    method: str,
    runs: int,
    q: float,
    B: int,
    seed: int,
    delta: float,
    threads: int = 1,
) -> RateEstimates:
    """Average FDR and FNDR of ``method`` over fresh simulation runs.

    Each run simulates a new sample from ``config`` and analyzes every
    window of ``family``; run r uses the derived seed (seed, r), so the
    estimate is reproducible and runs may be recomputed independently.
    """
    if method not in ("P", "TSC", "TSC+BH"):
        raise ValueError(f"method must be 'P', 'TSC' or 'TSC+BH', got {method!r}")
    if runs < 1:
        raise ValueError("need at least one run")
    dep = ground_truth(config, family)
    fdr_terms = []
    fndr_terms = []
    r_values = []
    for run in range(runs):
        run_seed = derive_seed(seed, run)
        sample = simulate_sample(config, seed=derive_seed(run_seed, 0))
        analysis_seed = derive_seed(run_seed, 1)
        if method == "P":
            counts = _run_p(sample, family, dep, delta, q, B, analysis_seed, threads)
        else:
            counts = _run_tsc(
                sample, family, dep, delta, q, B, analysis_seed, threads,
                corrected=(method == "TSC+BH"),
            )
        r = counts.r
        fdr_terms.append(counts.v / r if r > 0 else 0.0)
        accepted = counts.m - r
        fndr_terms.append(counts.t / accepted if accepted > 0 else 0.0)
        r_values.append(r)
    return RateEstimates(
        method=method,
        runs=runs,
        fdr=math.fsum(fdr_terms) / runs,
        fndr=math.fsum(fndr_terms) / runs,
        mean_r=math.fsum(r_values) / runs,
    )


def pvalue_cdf_study(
    config: SimConfig,
    n: int,
    reps: int,
    methods: list[TestMethod],
    B: int,
    seed: int,
    delta: float,
) -> list[dict]:
    """Upper-tail p-value samples of each method over repeated simulations.

    Every repetition simulates a fresh n-trial sample on the full
    recording window and evaluates all requested methods on the same
    coincidence matrix, so method comparisons are paired.  Returns long
    rows ``{"method", "rep", "p_upper"}`` ready for CSV or plotting.
    """
    if reps < 0:
        raise ValueError("reps cannot be negative")
    cfg = replace(config, n=n)
    window = Window(0.0, cfg.T)
    rows = []
    for rep in range(reps):
        rep_seed = derive_seed(seed, rep)
        sample = simulate_sample(cfg, seed=derive_seed(rep_seed, 0))
        mat = coincidence_matrix(sample, window, Delayed(delta))
        for m_idx, method in enumerate(methods):
            report = run_test(mat, method, B, derive_seed(rep_seed, 1 + m_idx))
            rows.append({"method": method.value, "rep": rep, "p_upper": report.p_upper})
    return rows
