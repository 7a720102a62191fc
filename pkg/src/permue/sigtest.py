"""Single-window independence tests.

Five tests of "no dependence between the paired trains" are provided,
all driven by the coincidence matrix of the window under test:

- naive: Gaussian tail of the standardized statistic Z.
- tsc: Monte Carlo tail of the trial-shuffled coincidence total.
- tsu: Monte Carlo tail of the recentered trial-shuffled U statistic.
- fbu: Monte Carlo tail of the full-bootstrap U statistic.
- permutation: exact permutation tail of the coincidence total, with
  the (1 + count) / (B + 1) correction that makes the test valid at
  finite B.

Every report carries both the upper and the lower tail.  Ties between a
replicate and the observed value count toward rejection in both tails,
which keeps the tests conservative rather than anti-conservative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .resampling import ResampleScheme, replicate_C, replicate_U
from .stats import CoincidenceMatrix, total_count, u_stat, window_stats

__all__ = [
    "TestMethod",
    "TestReport",
    "naive_test",
    "mc_test",
    "permutation_test",
    "run_test",
]


class TestMethod(Enum):
    __test__ = False  # "Test" here means hypothesis test, not a pytest case

    NAIVE = "naive"
    TSC = "tsc"
    TSU = "tsu"
    FBU = "fbu"
    PERMUTATION = "permutation"


@dataclass(frozen=True)
class TestReport:
    """Outcome of one independence test on one window."""

    __test__ = False  # "Test" here means hypothesis test, not a pytest case

    method: TestMethod
    statistic: float
    p_upper: float
    p_lower: float
    B: int
    seed: int | None
    degenerate: bool = False

    def __post_init__(self):
        for p in (self.p_upper, self.p_lower):
            if not (0.0 < p <= 1.0) or math.isnan(p):
                raise ValueError(f"p-values must lie in (0, 1], got {p}")

    def to_dict(self) -> dict:
        return {
            "method": self.method.value,
            "statistic": self.statistic,
            "p_upper": self.p_upper,
            "p_lower": self.p_lower,
            "B": self.B,
            "seed": self.seed,
            "degenerate": self.degenerate,
        }


def _phi(z: float) -> float:
    """Standard normal CDF."""
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def naive_test(m: CoincidenceMatrix) -> TestReport:
    """Gaussian test on ``Z = U / sqrt(n sigma2)``.

    ``p_upper = 1 - Phi(Z)`` and ``p_lower = Phi(Z)``.  When the
    variance estimate degenerates to zero there is no Z; both p-values
    are reported as 1 with the ``degenerate`` flag set.
    """
    ws = window_stats(m)
    if ws.z_obs is None:
        return TestReport(
            method=TestMethod.NAIVE,
            statistic=0.0,
            p_upper=1.0,
            p_lower=1.0,
            B=0,
            seed=None,
            degenerate=True,
        )
    z = ws.z_obs
    return TestReport(
        method=TestMethod.NAIVE,
        statistic=z,
        p_upper=1.0 - _phi(z),
        p_lower=_phi(z),
        B=0,
        seed=None,
    )


def mc_test(m: CoincidenceMatrix, method: TestMethod, B: int, seed: int) -> TestReport:
    """Monte Carlo counting test for the tsc, tsu and fbu variants.

    ``p_upper = #{replicate >= observed} / B`` (and the mirrored count
    for ``p_lower``), floored at ``1 / B`` so a zero count reports the
    test's resolution rather than an exact zero.
    """
    if B < 2:
        raise ValueError("need at least 2 replicates")
    if method is TestMethod.TSC:
        rep = replicate_C(m, ResampleScheme.TRIAL_SHUFFLE, B, seed)
        obs = total_count(m)
        values = rep.c
    elif method is TestMethod.TSU:
        rep = replicate_U(m, ResampleScheme.TRIAL_SHUFFLE, B, seed)
        obs = u_stat(m)
        values = rep.u
    elif method is TestMethod.FBU:
        rep = replicate_U(m, ResampleScheme.FULL_BOOTSTRAP, B, seed)
        obs = u_stat(m)
        values = rep.u
    else:
        raise ValueError(f"mc_test handles tsc/tsu/fbu, not {method}")
    upper = int((values >= obs).sum())
    lower = int((values <= obs).sum())
    return TestReport(
        method=method,
        statistic=float(obs),
        p_upper=max(upper, 1) / B,
        p_lower=max(lower, 1) / B,
        B=B,
        seed=seed,
    )


def permutation_test(m: CoincidenceMatrix, B: int, seed: int) -> TestReport:
    """Permutation test on the coincidence total.

    ``p_upper = (1 + #{C_perm >= C_obs}) / (B + 1)`` and the mirrored
    form for ``p_lower``.  Both are valid p-values at any finite B, and
    they sum to at least ``1 + 1/(B+1)``, so the two tails can never both
    fall below one half.
    """
    rep = replicate_C(m, ResampleScheme.PERMUTATION, B, seed)
    obs = total_count(m)
    upper = int((rep.c >= obs).sum())
    lower = int((rep.c <= obs).sum())
    return TestReport(
        method=TestMethod.PERMUTATION,
        statistic=float(obs),
        p_upper=(1 + upper) / (B + 1),
        p_lower=(1 + lower) / (B + 1),
        B=B,
        seed=seed,
    )


def run_test(m: CoincidenceMatrix, method: TestMethod, B: int, seed: int) -> TestReport:
    """Dispatch one test by method."""
    if method is TestMethod.NAIVE:
        return naive_test(m)
    if method is TestMethod.PERMUTATION:
        return permutation_test(m, B, seed)
    return mc_test(m, method, B, seed)
