"""Shared helpers for the test suite."""

import numpy as np
import pytest

from permue import CoincidenceMatrix, SpikeTrain, TrialPair, TrialSample

# One outcome line per acceptance criterion, echoed in the terminal
# summary so the PASS/FAIL lines survive output capturing.
ACCEPTANCE_LINES = []


def record_acceptance(line):
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def sigma2_triple_sum(a):
    """Literal O(n^3) oracle: 4/(n(n-1)(n-2)) sum over distinct (i, j, k)."""
    n = a.shape[0]
    d = np.diag(a)

    def h(i, j):
        return 0.5 * (d[i] + d[j] - a[i, j] - a[j, i])

    acc = 0.0
    for i in range(n):
        for j in range(n):
            if j == i:
                continue
            for k in range(n):
                if k == i or k == j:
                    continue
                acc += h(i, j) * h(i, k)
    return 4.0 * acc / (n * (n - 1) * (n - 2))


def poisson_train(rng, rate, span=0.1, start=0.0):
    """A sorted homogeneous Poisson train on [start, start + span]."""
    k = rng.poisson(rate * span)
    return np.sort(rng.uniform(start, start + span, size=k))


def poisson_sample(rng, n, rate, span=0.1):
    """An independent-Poisson trial sample (test-local generator)."""
    trials = tuple(
        TrialPair(SpikeTrain(poisson_train(rng, rate, span)),
                  SpikeTrain(poisson_train(rng, rate, span)))
        for _ in range(n)
    )
    return TrialSample(trials, span)


def random_matrix(rng, n, scale=5.0):
    """A random non-negative CoincidenceMatrix."""
    return CoincidenceMatrix(rng.uniform(0.0, scale, size=(n, n)))


def random_count_matrix(rng, n, lam=3.0):
    """A random integer-valued CoincidenceMatrix (Poisson counts)."""
    return CoincidenceMatrix(rng.poisson(lam, size=(n, n)).astype(float))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
