"""Distribution-free unitary events analysis for paired spike trains.

The package detects windows of time where two simultaneously recorded
neurons fire in coincidence more (or less) often than independence
allows: coincidence counts per trial pair, resampling tests built on
the trial-pair coincidence matrix, and multi-window detection with
false discovery rate control, plus point-process simulators and an
experiment harness to measure error rates of the whole pipeline.
"""

from .coincidence import (
    Binned,
    CoincidenceKind,
    Delayed,
    OpCounter,
    binned_count,
    count,
    delayed_count,
)
from .core import SpikeTrain, TrialPair, TrialSample, Window, restrict
from .harness import (
    TSC_LEVEL,
    ConfusionCounts,
    RateEstimates,
    estimate_rates,
    ground_truth,
    pvalue_cdf_study,
)
from .io import (
    SpikeFileError,
    format_spike_file,
    parse_spike_file,
    parse_spike_text,
    write_spike_file,
)
from .multiwindow import (
    Detection,
    DetectionSet,
    WindowFamily,
    WindowResult,
    bh_select,
    permutation_ue,
    sliding_windows,
    window_pvalues,
)
from .resampling import (
    ReplicateSet,
    ResampleScheme,
    draw_trial_shuffle,
    empirical_quantile,
    replicate_C,
    replicate_U,
    u_from_pairs,
)
from .rng import derive_seed, substream
from .sigtest import TestMethod, TestReport, mc_test, naive_test, permutation_test, run_test
from .simulate import (
    ConfigError,
    HawkesSpec,
    InjectionSpec,
    PoissonSpec,
    Region,
    SegmentedSpec,
    SimConfig,
    StepFunction,
    gen_hawkes,
    gen_injection,
    gen_pair,
    gen_poisson,
    load_config,
    simulate_sample,
    with_trials,
)
from .stats import (
    CoincidenceMatrix,
    DegenerateVariance,
    WindowStats,
    c0_hat,
    coincidence_matrix,
    h_kernel,
    sigma2_hat,
    total_count,
    u_stat,
    window_stats,
    z_stat,
)

__version__ = "0.1.0"

__all__ = [
    "TSC_LEVEL",
    "Binned",
    "CoincidenceKind",
    "CoincidenceMatrix",
    "ConfigError",
    "ConfusionCounts",
    "DegenerateVariance",
    "Detection",
    "DetectionSet",
    "Delayed",
    "HawkesSpec",
    "InjectionSpec",
    "OpCounter",
    "PoissonSpec",
    "RateEstimates",
    "Region",
    "ReplicateSet",
    "ResampleScheme",
    "SegmentedSpec",
    "SimConfig",
    "SpikeFileError",
    "SpikeTrain",
    "StepFunction",
    "TestMethod",
    "TestReport",
    "TrialPair",
    "TrialSample",
    "Window",
    "WindowFamily",
    "WindowResult",
    "WindowStats",
    "bh_select",
    "binned_count",
    "c0_hat",
    "coincidence_matrix",
    "count",
    "delayed_count",
    "derive_seed",
    "draw_trial_shuffle",
    "empirical_quantile",
    "estimate_rates",
    "format_spike_file",
    "gen_hawkes",
    "gen_injection",
    "gen_pair",
    "gen_poisson",
    "ground_truth",
    "h_kernel",
    "load_config",
    "mc_test",
    "naive_test",
    "parse_spike_file",
    "parse_spike_text",
    "permutation_test",
    "permutation_ue",
    "pvalue_cdf_study",
    "replicate_C",
    "replicate_U",
    "restrict",
    "run_test",
    "sigma2_hat",
    "simulate_sample",
    "sliding_windows",
    "substream",
    "total_count",
    "u_from_pairs",
    "u_stat",
    "window_pvalues",
    "window_stats",
    "with_trials",
    "write_spike_file",
    "z_stat",
]
