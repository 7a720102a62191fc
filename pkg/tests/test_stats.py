import math

import numpy as np
import pytest
from scipy import stats as sps

from permue import (
    Binned,
    CoincidenceMatrix,
    DegenerateVariance,
    Delayed,
    SpikeTrain,
    TrialPair,
    TrialSample,
    Window,
    binned_count,
    c0_hat,
    coincidence_matrix,
    delayed_count,
    h_kernel,
    restrict,
    sigma2_hat,
    total_count,
    u_stat,
    window_stats,
    z_stat,
)

from conftest import poisson_sample, random_matrix, sigma2_triple_sum


class TestMatrixBuilder:
    def test_two_trials_match_direct_counts(self):
        trials = (
            TrialPair(SpikeTrain([0.010, 0.020]), SpikeTrain([0.015, 0.050])),
            TrialPair(SpikeTrain([0.030]), SpikeTrain([0.011, 0.031])),
        )
        sample = TrialSample(trials, span=0.1)
        w = Window(0.0, 0.1)
        m = coincidence_matrix(sample, w, Delayed(0.01))
        for i in range(2):
            for j in range(2):
                expected = delayed_count(trials[i].x1, trials[j].x2, 0.01)
                assert m.a[i, j] == expected

    def test_identical_trials_give_constant_matrix(self):
        pair = TrialPair(SpikeTrain([0.01, 0.05]), SpikeTrain([0.02, 0.06]))
        sample = TrialSample((pair,) * 4, span=0.1)
        m = coincidence_matrix(sample, Window(0.0, 0.1), Delayed(0.01))
        assert np.all(m.a == m.a[0, 0])

    def test_delayed_entries_match_scalar_sweep(self, rng):
        for _ in range(10):
            sample = poisson_sample(rng, n=6, rate=80.0)
            w = Window(0.02, 0.08)
            m = coincidence_matrix(sample, w, Delayed(0.01))
            for i in range(6):
                for j in range(6):
                    x1 = restrict(sample.trials[i].x1, w)
                    x2 = restrict(sample.trials[j].x2, w)
                    assert m.a[i, j] == delayed_count(x1, x2, 0.01)

    def test_binned_entries_match_scalar_kernel(self, rng):
        sample = poisson_sample(rng, n=5, rate=100.0)
        w = Window(0.0, 0.1)
        m = coincidence_matrix(sample, w, Binned(0.01))
        for i in range(5):
            for j in range(5):
                x1 = restrict(sample.trials[i].x1, w)
                x2 = restrict(sample.trials[j].x2, w)
                assert m.a[i, j] == binned_count(x1, x2, w, 0.01)

    def test_empty_window_gives_zero_matrix(self, rng):
        pair = TrialPair(SpikeTrain([0.9]), SpikeTrain([0.95]))
        sample = TrialSample((pair, pair), span=1.0)
        m = coincidence_matrix(sample, Window(0.0, 0.5), Delayed(0.01))
        assert not m.a.any()

    def test_needs_two_trials(self):
        pair = TrialPair(SpikeTrain([0.1]), SpikeTrain([0.2]))
        sample = TrialSample((pair,), span=1.0)
        with pytest.raises(ValueError, match="at least 2 trials"):
            coincidence_matrix(sample, Window(0.0, 1.0), Delayed(0.01))


class TestMatrixType:
    def test_rejects_negative_entries(self):
        with pytest.raises(ValueError, match="negative"):
            CoincidenceMatrix(np.array([[1.0, -1.0], [0.0, 2.0]]))

    def test_rejects_non_square(self):
        with pytest.raises(ValueError, match="square"):
            CoincidenceMatrix(np.zeros((2, 3)))

    def test_rejects_n1(self):
        with pytest.raises(ValueError, match="at least 2"):
            CoincidenceMatrix(np.ones((1, 1)))


class TestObservedStats:
    def test_total_is_trace(self):
        m = CoincidenceMatrix(np.diag([1.0, 2.0, 3.0]))
        assert total_count(m) == 6.0

    def test_total_zero_matrix(self):
        assert total_count(CoincidenceMatrix(np.zeros((3, 3)))) == 0.0

    def test_c0_two_trials(self):
        m = CoincidenceMatrix(np.array([[1.0, 3.0], [5.0, 1.0]]))
        assert c0_hat(m) == 8.0

    def test_c0_constant_matrix(self):
        n, c = 7, 2.5
        m = CoincidenceMatrix(np.full((n, n), c))
        assert c0_hat(m) == pytest.approx(n * c, rel=1e-12)

    def test_c0_matches_double_sum(self, rng):
        m = random_matrix(rng, 15)
        expected = math.fsum(
            m.a[i, j] for i in range(15) for j in range(15) if i != j
        ) / 14
        assert c0_hat(m) == pytest.approx(expected, rel=1e-12)

    def test_u_constant_matrix_is_zero(self):
        m = CoincidenceMatrix(np.full((5, 5), 3.0))
        assert u_stat(m) == pytest.approx(0.0, abs=1e-12)

    def test_u_two_trials(self):
        m = CoincidenceMatrix(np.array([[1.0, 3.0], [5.0, 1.0]]))
        assert u_stat(m) == -6.0

    def test_u_affine_rewrite(self, rng):
        # U = (n/(n-1)) C - A/(n-1): collecting C terms in C - (A - C)/(n-1)
        for n in (2, 3, 10, 25):
            m = random_matrix(rng, n)
            rewritten = (n / (n - 1)) * total_count(m) - m.a.sum() / (n - 1)
            assert u_stat(m) == pytest.approx(rewritten, rel=1e-12)

    def test_u_exactness(self, rng):
        m = random_matrix(rng, 12)
        assert u_stat(m) == total_count(m) - c0_hat(m)


class TestHKernel:
    def test_diagonal_is_zero(self, rng):
        m = random_matrix(rng, 6)
        for i in range(6):
            assert h_kernel(m, i, i) == 0.0

    def test_symmetry(self, rng):
        m = random_matrix(rng, 6)
        for i in range(6):
            for j in range(6):
                assert h_kernel(m, i, j) == h_kernel(m, j, i)

    def test_two_trials_value(self):
        m = CoincidenceMatrix(np.array([[1.0, 3.0], [5.0, 1.0]]))
        assert h_kernel(m, 0, 1) == -3.0

    def test_degenerate_shared_left_train(self):
        # trials 0 and 1 share the same left train, so the kernel collapses:
        # a[0,1] = a[1,1] and a[1,0] = a[0,0], hence h(0,1) = (a[1,1]-a[0,1])/2 = 0
        shared = SpikeTrain([0.01, 0.04])
        trials = (
            TrialPair(shared, SpikeTrain([0.012])),
            TrialPair(shared, SpikeTrain([0.045, 0.08])),
            TrialPair(SpikeTrain([0.07]), SpikeTrain([0.071])),
        )
        sample = TrialSample(trials, span=0.1)
        m = coincidence_matrix(sample, Window(0.0, 0.1), Delayed(0.01))
        assert m.a[0, 1] == m.a[1, 1]
        assert h_kernel(m, 0, 1) == 0.5 * (m.a[1, 1] - m.a[0, 1])
        assert h_kernel(m, 0, 1) == 0.0


class TestSigma2:
    def test_constant_matrix_is_zero(self):
        m = CoincidenceMatrix(np.full((6, 6), 4.0))
        assert sigma2_hat(m) == 0.0

    def test_hand_matrix_matches_triple_sum(self):
        a = np.array([[2.0, 0.0, 1.0], [3.0, 5.0, 0.0], [1.0, 1.0, 4.0]])
        m = CoincidenceMatrix(a)
        assert sigma2_hat(m) == pytest.approx(sigma2_triple_sum(a), rel=1e-12)

    def test_reduction_matches_triple_sum(self, rng):
        for _ in range(20):
            n = int(rng.integers(3, 21))
            m = random_matrix(rng, n)
            assert sigma2_hat(m) == pytest.approx(sigma2_triple_sum(m.a), rel=1e-9)

    def test_relabeling_invariance(self, rng):
        m = random_matrix(rng, 12)
        perm = rng.permutation(12)
        relabeled = CoincidenceMatrix(m.a[np.ix_(perm, perm)])
        assert sigma2_hat(relabeled) == pytest.approx(sigma2_hat(m), rel=1e-12)

    def test_never_negative(self, rng):
        for _ in range(50):
            assert sigma2_hat(random_matrix(rng, 5)) >= 0.0

    def test_needs_three_trials(self):
        m = CoincidenceMatrix(np.array([[1.0, 2.0], [3.0, 4.0]]))
        with pytest.raises(ValueError, match="at least 3"):
            sigma2_hat(m)


def zero_u_matrix():
    # blocked off-diagonals (one strong pair, one weak clique) keep the
    # variance estimate positive; the diagonal is set to the off-diagonal
    # mean so that U = 0
    a = np.full((5, 5), 2.0)
    a[0, 1] = a[1, 0] = 4.0
    a[2:, 2:] = 1.0
    mean = (a.sum() - np.trace(a)) / 20.0
    np.fill_diagonal(a, mean)
    return CoincidenceMatrix(a)


class TestZStat:
    def test_zero_u_gives_zero_z(self):
        m = zero_u_matrix()
        assert u_stat(m) == pytest.approx(0.0, abs=1e-12)
        assert z_stat(m) == pytest.approx(0.0, abs=1e-9)

    def test_scale_invariance(self, rng):
        m = random_matrix(rng, 10)
        doubled = CoincidenceMatrix(2.0 * m.a)
        assert u_stat(doubled) == pytest.approx(2.0 * u_stat(m), rel=1e-12)
        assert sigma2_hat(doubled) == pytest.approx(4.0 * sigma2_hat(m), rel=1e-12)
        assert z_stat(doubled) == pytest.approx(z_stat(m), rel=1e-12)

    def test_degenerate_raises(self):
        with pytest.raises(DegenerateVariance):
            z_stat(CoincidenceMatrix(np.full((4, 4), 1.0)))


class TestWindowStats:
    def test_u_identity_exact(self, rng):
        m = random_matrix(rng, 8)
        ws = window_stats(m)
        assert ws.u_obs == ws.c_obs - ws.c0
        assert ws.sigma2 >= 0.0
        assert not ws.degenerate

    def test_degenerate_flag(self):
        ws = window_stats(CoincidenceMatrix(np.full((4, 4), 2.0)))
        assert ws.degenerate
        assert ws.z_obs is None


class TestCenteringIdentity:
    def test_c0_and_c_share_expectation_under_independence(self, rng):
        # both the diagonal total and the off-diagonal estimate target the
        # same independence expectation; Welch's t-test must not separate
        # their means over many simulated samples
        reps = 10000
        c_vals = np.empty(reps)
        c0_vals = np.empty(reps)
        for rep in range(reps):
            sample = poisson_sample(rng, n=5, rate=30.0)
            m = coincidence_matrix(sample, Window(0.0, 0.1), Delayed(0.01))
            c_vals[rep] = total_count(m)
            c0_vals[rep] = c0_hat(m)
        result = sps.ttest_ind(c_vals, c0_vals, equal_var=False)
        assert result.pvalue > 0.01
