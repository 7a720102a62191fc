"""End-to-end acceptance checks.

Each test asserts one numbered criterion and prints a single PASS/FAIL
line with the measured quantities (the lines are echoed again in the
terminal summary, so they survive output capture).  Heavy shared
studies -- the p-value distribution studies, the 200-run error-rate
study -- are module-scoped fixtures so several criteria read the same
simulation.

The whole module takes several minutes; run it on its own with

    pytest tests/test_acceptance.py -v -s
"""

import math
import pathlib
import time

import numpy as np
import pytest
from scipy import stats as sps

from permue import (
    DegenerateVariance,
    Delayed,
    OpCounter,
    ResampleScheme,
    TestMethod,
    Window,
    bh_select,
    binned_count,
    coincidence_matrix,
    delayed_count,
    estimate_rates,
    load_config,
    permutation_ue,
    pvalue_cdf_study,
    replicate_U,
    sigma2_hat,
    simulate_sample,
    sliding_windows,
    total_count,
    u_from_pairs,
    u_stat,
    with_trials,
    z_stat,
)
from permue.resampling import _permutation_block
from permue.rng import derive_seed, substream

from conftest import (
    random_count_matrix,
    random_matrix,
    record_acceptance,
    sigma2_triple_sum,
)

CONFIGS = pathlib.Path(__file__).resolve().parent.parent / "configs"
DELTA = 0.01


def check(num, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {num:2d}: {detail}"
    record_acceptance(line)
    print()
    print(line)
    assert ok, line


# ---------------------------------------------------------------------------
# shared studies


@pytest.fixture(scope="module")
def family():
    return sliding_windows(2.0, 0.1, 0.01)


def _pvalue_study(config_name, seed):
    cfg = load_config(CONFIGS / config_name)
    rows = pvalue_cdf_study(
        cfg,
        n=20,
        reps=2000,
        methods=[TestMethod.PERMUTATION, TestMethod.TSC],
        B=1000,
        seed=seed,
        delta=DELTA,
    )
    return {
        method.value: np.array(
            [r["p_upper"] for r in rows if r["method"] == method.value]
        )
        for method in (TestMethod.PERMUTATION, TestMethod.TSC)
    }


@pytest.fixture(scope="module")
def h0_pvals():
    return _pvalue_study("h0_poisson.json", seed=95001)


@pytest.fixture(scope="module")
def h1_pvals():
    return _pvalue_study("h1_injection.json", seed=95002)


@pytest.fixture(scope="module")
def null_rates(family):
    cfg = load_config(CONFIGS / "null_60hz_2s.json")
    common = dict(family=family, runs=200, q=0.05, B=2000, seed=97001, delta=DELTA)
    return (
        estimate_rates(cfg, method="P", **common),
        estimate_rates(cfg, method="TSC", **common),
    )


# ---------------------------------------------------------------------------
# criteria


def test_criterion_01_delayed_count_matches_brute_force():
    rng = np.random.default_rng(9101)
    deltas = [0.001, 0.002, 0.004, 0.005, 0.008, 0.01, 0.02, 0.04]
    span = 0.3
    start = time.perf_counter()
    bad = 0
    for trial in range(1000):
        rate1, rate2 = rng.uniform(10.0, 100.0, size=2)
        t1 = np.sort(rng.uniform(0.0, span, rng.poisson(rate1 * span)))
        t2 = np.sort(rng.uniform(0.0, span, rng.poisson(rate2 * span)))
        delta = deltas[trial % len(deltas)]
        brute = int((np.abs(t1[:, None] - t2[None, :]) <= delta).sum())
        if delayed_count(t1, t2, delta) != brute:
            bad += 1
    elapsed = time.perf_counter() - start
    check(
        1,
        bad == 0 and elapsed < 10.0,
        "sweep count equals the pairwise double loop on 1000 random train pairs "
        f"(rates 10-100 Hz, delta 0.001-0.04): {bad} mismatches, {elapsed:.2f}s < 10s",
    )


def test_criterion_02_variance_reduction_matches_triple_sum():
    rng = np.random.default_rng(9202)
    start = time.perf_counter()
    worst = 0.0
    clamped = 0
    clamp_ok = True
    for _ in range(200):
        n = int(rng.integers(3, 26))
        m = random_matrix(rng, n)
        direct = sigma2_triple_sum(m.a)
        fast = sigma2_hat(m)
        if fast == 0.0 and direct < 0.0:
            # the estimator clamps non-positive values; the clamp may only
            # fire when the literal sum itself is non-positive
            clamped += 1
            clamp_ok = clamp_ok and direct <= 1e-9
            continue
        worst = max(worst, abs(fast - direct) / max(abs(direct), 1e-12))
    elapsed = time.perf_counter() - start
    check(
        2,
        worst <= 1e-9 and clamp_ok and elapsed < 30.0,
        "pairwise variance reduction equals the literal triple sum on 200 random "
        f"matrices (n <= 25): worst relative deviation {worst:.2e} <= 1e-9 "
        f"({clamped} negative estimates correctly clamped to 0), {elapsed:.2f}s < 30s",
    )


def test_criterion_03_permutation_affine_identity():
    rng = np.random.default_rng(9303)
    start = time.perf_counter()
    worst = 0.0
    weakest_refutation = math.inf
    rank_ok = True
    obs_ok = True
    for idx in range(100):
        n = int(rng.integers(3, 31))
        m = random_count_matrix(rng, n)
        seed = derive_seed(940001, idx)
        rep = replicate_U(m, ResampleScheme.PERMUTATION, B=100, seed=seed)
        perms = _permutation_block(substream(seed, 0), 100, n)
        left = np.arange(n)
        direct = np.array([u_from_pairs(m.a, left, perms[b]) for b in range(100)])
        scale = np.maximum(np.abs(direct), 1.0)
        worst = max(worst, float(np.max(np.abs(rep.u - direct) / scale)))
        # the same data refute the flatter slope (n-2)/(n-1): it misses the
        # per-permutation U by 2C*/(n-1), far above float noise
        a_sum = float(np.sum(m.a))
        u_flat = ((n - 2) / (n - 1)) * rep.c - a_sum / (n - 1)
        weakest_refutation = min(
            weakest_refutation, float(np.max(np.abs(u_flat - direct)))
        )
        c_obs = total_count(m)
        u_obs = (n / (n - 1)) * c_obs - a_sum / (n - 1)
        obs_ok = obs_ok and abs(u_stat(m) - u_obs) <= 1e-12 * max(abs(u_obs), 1.0)
        rank_ok = rank_ok and int((rep.c >= c_obs).sum()) == int((rep.u >= u_obs).sum())
    elapsed = time.perf_counter() - start
    check(
        3,
        worst <= 1e-12 and weakest_refutation > 1e-6 and rank_ok and obs_ok
        and elapsed < 10.0,
        "permutation replicates obey U = (n/(n-1)) C - A/(n-1) on 100 matrices x "
        f"100 permutations: worst relative deviation {worst:.2e} <= 1e-12 "
        f"(slope (n-2)/(n-1) is off by >= {weakest_refutation:.3g}); C-ranked and "
        f"U-ranked p-value counts agree; {elapsed:.2f}s < 10s",
    )


def test_criterion_04_trial_shuffle_centering():
    rng = np.random.default_rng(9404)
    B = 100_000
    bad_raw = 0
    bad_centered = 0
    worst_raw = 0.0
    for idx in range(50):
        m = random_count_matrix(rng, 20)
        rep = replicate_U(m, ResampleScheme.TRIAL_SHUFFLE, B=B, seed=derive_seed(950001, idx))
        u_obs = u_stat(m)
        raw = rep.u - u_obs / 20.0
        se = float(raw.std(ddof=1)) / math.sqrt(B)
        dev_raw = abs(float(raw.mean()) - (-u_obs / 20.0)) / se
        dev_centered = abs(float(rep.u.mean())) / se
        worst_raw = max(worst_raw, dev_raw)
        if dev_raw > 3.0:
            bad_raw += 1
        if dev_centered > 3.0:
            bad_centered += 1
    check(
        4,
        bad_raw == 0 and bad_centered == 0,
        "trial-shuffle replicate means on 50 matrices (n=20, B=1e5): raw mean "
        f"within 3 se of -U/n on {50 - bad_raw}/50, recentered mean within 3 se "
        f"of 0 on {50 - bad_centered}/50 (worst deviation {worst_raw:.2f} se)",
    )


def test_criterion_05_permutation_level(h0_pvals):
    p = h0_pvals["permutation"]
    parts = []
    ok = True
    for alpha in (0.01, 0.05, 0.10):
        hit = float((p <= alpha).mean())
        bound = alpha + 3.0 * math.sqrt(alpha * (1.0 - alpha) / p.size)
        ok = ok and hit <= bound
        parts.append(f"P(p<={alpha:g}) = {hit:.4f} <= {bound:.4f}")
    check(
        5,
        ok,
        "permutation test holds its level over 2000 independent-Poisson samples "
        "(n=20, 30 Hz, 0.1 s, B=1000): " + "; ".join(parts),
    )


def test_criterion_06_conservativeness_ordering(h0_pvals, h1_pvals):
    h0_perm = float((h0_pvals["permutation"] <= 0.05).mean())
    h0_tsc = float((h0_pvals["tsc"] <= 0.05).mean())
    h1_perm = float((h1_pvals["permutation"] <= 0.05).mean())
    h1_tsc = float((h1_pvals["tsc"] <= 0.05).mean())
    reps = h1_pvals["permutation"].size
    se = math.sqrt(h1_perm * (1 - h1_perm) / reps + h1_tsc * (1 - h1_tsc) / reps)
    ok = h0_tsc < h0_perm and (h1_perm - h1_tsc) > 2.0 * se
    check(
        6,
        ok,
        f"empirical cdf at 0.05: counting {h0_tsc:.4f} < permutation {h0_perm:.4f} "
        f"under independence; under injection the permutation test leads by "
        f"{h1_perm:.4f} - {h1_tsc:.4f} = {h1_perm - h1_tsc:.4f} > 2 se = {2 * se:.4f}",
    )


def test_criterion_07_null_error_rates(null_rates):
    perm, tsc = null_rates
    bound = 0.05 + 3.0 * math.sqrt(0.05 * 0.95 / 200)
    ok = perm.fdr <= bound and perm.fndr == 0.0 and tsc.fdr > 0.10
    check(
        7,
        ok,
        "200 runs of 50 independent 60 Hz trials on [0, 2], 191 windows, B=2000, "
        f"q=0.05: permutation+BH FDR {perm.fdr:.4f} <= {bound:.4f} and FNDR "
        f"{perm.fndr:.4f} == 0; uncorrected per-window counting FDR {tsc.fdr:.4f} > 0.10",
    )


def _z_sample(cfg, n, sims, seed):
    cfg_n = with_trials(cfg, n)
    window = Window(0.0, cfg.T)
    kind = Delayed(DELTA)
    zs = []
    skipped = 0
    for sim in range(sims):
        sample = simulate_sample(cfg_n, seed=derive_seed(seed, sim))
        m = coincidence_matrix(sample, window, kind)
        try:
            zs.append(z_stat(m))
        except DegenerateVariance:
            skipped += 1
    return np.array(zs), skipped


def test_criterion_08_z_convergence():
    cfg = load_config(CONFIGS / "h0_poisson.json")
    z200, _ = _z_sample(cfg, 200, 2000, seed=96001)
    z20, skip20 = _z_sample(cfg, 20, 2000, seed=96002)
    ks200 = float(sps.kstest(z200, "norm").statistic)
    ks20 = float(sps.kstest(z20, "norm").statistic)
    ok = ks200 < 0.05 and ks20 > ks200
    check(
        8,
        ok,
        f"KS distance of Z to the standard normal over 2000 simulations: "
        f"{ks200:.4f} < 0.05 at n=200, {ks20:.4f} at n=20 (strictly larger; "
        f"{skip20} degenerate runs skipped)",
    )


def test_criterion_09_operation_counts():
    reps = 10_000
    length, delta = 0.1, 0.005
    window = Window(0.0, length)
    delayed_total = 0.0
    binned_total = 0.0
    for rep in range(reps):
        rng = substream(9905, rep)
        t1 = np.sort(rng.uniform(0.0, length, rng.poisson(50.0 * length)))
        t2 = np.sort(rng.uniform(0.0, length, rng.poisson(50.0 * length)))
        counter = OpCounter()
        delayed_count(t1, t2, delta, counter=counter)
        delayed_total += counter.total
        counter = OpCounter()
        binned_count(t1, t2, window, delta, counter=counter)
        binned_total += counter.total
    delayed_mean = delayed_total / reps
    binned_mean = binned_total / reps
    ok = 20.0 <= delayed_mean <= 30.0 and 32.0 <= binned_mean <= 48.0
    check(
        9,
        ok,
        "mean operations per call at 50 Hz / 0.1 s / delta 0.005 over 1e4 reps: "
        f"delayed {delayed_mean:.2f} in [20, 30], binned {binned_mean:.2f} in [32, 48]",
    )


def test_criterion_10_bh_worked_examples():
    k1, t1 = bh_select(np.array([0.001, 0.01, 0.02, 0.2]), 0.05)
    k2, t2 = bh_select(np.ones(8), 0.05)
    m = 8
    k3, t3 = bh_select(np.full(m, 0.05 / m), 0.05)
    ok = (k1, t1) == (3, 0.02) and (k2, t2) == (0, None) and (k3, t3) == (m, 0.05 / m)
    check(
        10,
        ok,
        f"step-up selection: [0.001, 0.01, 0.02, 0.2] at q=0.05 -> k={k1}, "
        f"threshold={t1}; all-ones -> k={k2}; all p = q/m -> k={k3} (= m)",
    )


def test_criterion_11_dependence_recovery(family):
    cfg = load_config(CONFIGS / "mixed_segments_2s.json")
    positive = [r for r in cfg.dependence if r.sign == 1]
    negative = [r for r in cfg.dependence if r.sign == -1]
    runs = 50
    hits = 0
    neg_hits = 0
    for run in range(runs):
        run_seed = derive_seed(98001, run)
        sample = simulate_sample(cfg, seed=derive_seed(run_seed, 0))
        ds = permutation_ue(sample, family, DELTA, q=0.05, B=2000,
                            seed=derive_seed(run_seed, 1))
        if all(
            any(d.epsilon == 1 and d.window.a <= r.b and d.window.b >= r.a
                for d in ds.detections)
            for r in positive
        ):
            hits += 1
        if all(
            any(d.epsilon == -1 and d.window.a <= r.b and d.window.b >= r.a
                for d in ds.detections)
            for r in negative
        ):
            neg_hits += 1
    ok = hits / runs >= 0.90
    check(
        11,
        ok,
        "mixed excitation/suppression recording, 50 detection runs: every "
        f"positive-dependence region flagged with epsilon=+1 in {hits}/50 runs "
        f"(need >= 90%); suppressed region flagged with epsilon=-1 in {neg_hits}/50",
    )
