"""Point-process simulators for paired spike trains.

Three trial-pair mechanisms are provided:

- injection: two independent Poisson trains plus a third Poisson train
  injected into both, so the pair shares exactly coincident spikes.
  With injection rate 0 this degenerates to an independent pair, which
  is how plain Poisson configurations are expressed.
- Hawkes: a bivariate linear Hawkes pair with piecewise-constant
  interaction kernels (self and cross, possibly negative), simulated by
  thinning.  Negative kernel values inhibit; intensities are clipped at
  zero before acceptance.
- segments: a concatenation of the above on consecutive sub-spans, for
  recordings whose dependence structure changes over time.

Rates may be constants or step functions of time.  All generators are
sequential in a single ``Generator``; ``simulate_sample`` hands every
trial its own derived substream so samples are reproducible regardless
of how trials are scheduled.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .core import SpikeTrain, TrialPair, TrialSample
from .rng import substream

__all__ = [
    "ConfigError",
    "StepFunction",
    "PoissonSpec",
    "InjectionSpec",
    "HawkesSpec",
    "SegmentedSpec",
    "Region",
    "SimConfig",
    "gen_poisson",
    "gen_injection",
    "gen_hawkes",
    "gen_pair",
    "simulate_sample",
    "load_config",
    "with_trials",
]


class ConfigError(ValueError):
    """Malformed simulation configuration."""


@dataclass(frozen=True)
class StepFunction:
    """Piecewise-constant function: ``values[i]`` on ``[knots[i], knots[i+1])``, 0 outside."""

    knots: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        knots = np.array(self.knots, dtype=np.float64, copy=True)
        values = np.array(self.values, dtype=np.float64, copy=True)
        if knots.ndim != 1 or values.ndim != 1 or knots.size != values.size + 1:
            raise ValueError("need k+1 knots for k values")
        if values.size == 0:
            raise ValueError("need at least one piece")
        if not np.all(np.isfinite(knots)) or not np.all(np.isfinite(values)):
            raise ValueError("knots and values must be finite")
        if not np.all(np.diff(knots) > 0.0):
            raise ValueError("knots must be strictly increasing")
        knots.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "values", values)
        # suffix maxima of the positive part, for thinning bounds
        pos = np.maximum(values, 0.0)
        suffix = np.maximum.accumulate(pos[::-1])[::-1]
        suffix.flags.writeable = False
        object.__setattr__(self, "_suffix_sup", suffix)

    @property
    def support_end(self) -> float:
        return float(self.knots[-1])

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        idx = np.searchsorted(self.knots, t, side="right") - 1
        inside = (idx >= 0) & (idx < self.values.size)
        out = np.zeros(t.shape, dtype=np.float64)
        out[inside] = self.values[idx[inside]]
        return out

    def positive_integral(self) -> float:
        return float(np.sum(np.maximum(self.values, 0.0) * np.diff(self.knots)))

    def sup_after(self, lags) -> np.ndarray:
        """Upper bound on the positive part over all lags >= the given lag."""
        lags = np.asarray(lags, dtype=np.float64)
        idx = np.searchsorted(self.knots, lags, side="right") - 1
        out = np.zeros(lags.shape, dtype=np.float64)
        before = idx < 0
        inside = (idx >= 0) & (idx < self.values.size)
        out[before] = self._suffix_sup[0]
        out[inside] = self._suffix_sup[idx[inside]]
        return out


def _validate_rate(rate, what: str):
    if isinstance(rate, StepFunction):
        if np.any(rate.values < 0.0):
            raise ValueError(f"{what} must be non-negative")
        return rate
    rate = float(rate)
    if not (np.isfinite(rate) and rate >= 0.0):
        raise ValueError(f"{what} must be a non-negative rate, got {rate}")
    return rate


def _validate_span(span) -> tuple[float, float]:
    a, b = (float(span[0]), float(span[1]))
    if not (np.isfinite(a) and np.isfinite(b) and 0.0 <= a < b):
        raise ValueError(f"span must satisfy 0 <= a < b, got {span}")
    return (a, b)


@dataclass(frozen=True)
class PoissonSpec:
    """One Poisson train on ``span`` with a constant or piecewise rate (Hz)."""

    rate: object
    span: tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "rate", _validate_rate(self.rate, "rate"))
        object.__setattr__(self, "span", _validate_span(self.span))


@dataclass(frozen=True)
class InjectionSpec:
    """Two independent base trains plus a common injected train.

    With an injection rate of 0 the pair is independent.
    """

    base1: PoissonSpec
    base2: PoissonSpec
    inject: PoissonSpec

    def __post_init__(self):
        spans = {self.base1.span, self.base2.span, self.inject.span}
        if len(spans) != 1:
            raise ValueError("base and injection spans must agree")

    @property
    def span(self) -> tuple[float, float]:
        return self.base1.span


def _zero_kernel() -> StepFunction:
    return StepFunction(np.array([0.0, 1.0]), np.array([0.0]))


@dataclass(frozen=True)
class HawkesSpec:
    """Bivariate Hawkes pair with piecewise-constant signed kernels.

    ``k[j][i]`` is the influence of a process-j spike on the intensity
    of process i after the given lag.  Stability requires, for each
    target, that the positive mass arriving from both sources sums below
    one expected child per parent spike.
    """

    mu1: float
    mu2: float
    k11: StepFunction = field(default_factory=_zero_kernel)
    k12: StepFunction = field(default_factory=_zero_kernel)
    k21: StepFunction = field(default_factory=_zero_kernel)
    k22: StepFunction = field(default_factory=_zero_kernel)
    span: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        for name in ("mu1", "mu2"):
            mu = float(getattr(self, name))
            if not (np.isfinite(mu) and mu >= 0.0):
                raise ValueError(f"{name} must be non-negative, got {mu}")
            object.__setattr__(self, name, mu)
        object.__setattr__(self, "span", _validate_span(self.span))
        into1 = self.k11.positive_integral() + self.k21.positive_integral()
        into2 = self.k12.positive_integral() + self.k22.positive_integral()
        if into1 >= 1.0 or into2 >= 1.0:
            raise ValueError(
                "unstable Hawkes kernels: positive mass into each process must be < 1 "
                f"(got {into1:.3f} into 1, {into2:.3f} into 2)"
            )


@dataclass(frozen=True)
class SegmentedSpec:
    """Consecutive pair mechanisms on non-overlapping, increasing spans."""

    segments: tuple

    def __post_init__(self):
        segments = tuple(self.segments)
        if not segments:
            raise ValueError("need at least one segment")
        for prev, cur in zip(segments, segments[1:]):
            if cur.span[0] < prev.span[1]:
                raise ValueError("segment spans must be non-overlapping and increasing")
        object.__setattr__(self, "segments", segments)

    @property
    def span(self) -> tuple[float, float]:
        return (self.segments[0].span[0], self.segments[-1].span[1])


def gen_poisson(spec: PoissonSpec, rng: np.random.Generator) -> SpikeTrain:
    """Draw one Poisson train on ``spec.span``.

    Homogeneous pieces are drawn as a Poisson count plus uniform
    locations.  Exactly tied times (a measure-zero event) are dropped so
    the result is strictly increasing.
    """
    a, b = spec.span
    if isinstance(spec.rate, StepFunction):
        pieces = []
        edges = np.concatenate([[a], np.clip(spec.rate.knots, a, b), [b]])
        for lo, hi in zip(edges[:-1], edges[1:]):
            if hi <= lo:
                continue
            rate = float(spec.rate(np.array([lo]))[0])
            if rate > 0.0:
                k = rng.poisson(rate * (hi - lo))
                pieces.append(rng.uniform(lo, hi, size=k))
        times = np.concatenate(pieces) if pieces else np.empty(0)
    else:
        k = rng.poisson(spec.rate * (b - a))
        times = rng.uniform(a, b, size=k)
    return SpikeTrain(np.unique(times))


def _merge_trains(x: SpikeTrain, y: SpikeTrain) -> SpikeTrain:
    return SpikeTrain(np.unique(np.concatenate([x.times, y.times])))


def gen_injection(spec: InjectionSpec, rng: np.random.Generator) -> TrialPair:
    """Draw an injection pair from three independent substreams."""
    r1, r2, ri = rng.spawn(3)
    base1 = gen_poisson(spec.base1, r1)
    base2 = gen_poisson(spec.base2, r2)
    injected = gen_poisson(spec.inject, ri)
    return TrialPair(_merge_trains(base1, injected), _merge_trains(base2, injected))


def _hawkes_rate_and_bound(
    t: float,
    mu: float,
    pts1: np.ndarray,
    pts2: np.ndarray,
    k_from1: StepFunction,
    k_from2: StepFunction,
) -> tuple[float, float]:
    lag1 = t - pts1
    lag2 = t - pts2
    rate = mu + float(np.sum(k_from1(lag1))) + float(np.sum(k_from2(lag2)))
    bound = mu + float(np.sum(k_from1.sup_after(lag1))) + float(np.sum(k_from2.sup_after(lag2)))
    return max(rate, 0.0), bound


def gen_hawkes(spec: HawkesSpec, rng: np.random.Generator) -> TrialPair:
    """Draw one bivariate Hawkes pair by thinning.

    Candidate events arrive at the dominating rate ``B(t)`` built from
    the suffix suprema of the positive kernel parts over all points
    still inside their kernel support; since that bound can only fall
    until the next accepted point, it dominates both intensities on the
    whole inter-candidate interval.
    """
    a, b = spec.span
    pts1: list[float] = []
    pts2: list[float] = []
    horizon = max(
        spec.k11.support_end, spec.k12.support_end, spec.k21.support_end, spec.k22.support_end
    )
    t = a
    start1 = 0
    start2 = 0
    while True:
        # only points within the kernel horizon can still contribute
        while start1 < len(pts1) and pts1[start1] < t - horizon:
            start1 += 1
        while start2 < len(pts2) and pts2[start2] < t - horizon:
            start2 += 1
        active1 = np.array(pts1[start1:], dtype=np.float64)
        active2 = np.array(pts2[start2:], dtype=np.float64)
        _, bound1 = _hawkes_rate_and_bound(t, spec.mu1, active1, active2, spec.k11, spec.k21)
        _, bound2 = _hawkes_rate_and_bound(t, spec.mu2, active1, active2, spec.k12, spec.k22)
        bound = bound1 + bound2
        if bound <= 0.0:
            break
        t = t + rng.exponential(1.0 / bound)
        if t > b:
            break
        active1 = np.array(pts1[start1:], dtype=np.float64)
        active2 = np.array(pts2[start2:], dtype=np.float64)
        lam1, _ = _hawkes_rate_and_bound(t, spec.mu1, active1, active2, spec.k11, spec.k21)
        lam2, _ = _hawkes_rate_and_bound(t, spec.mu2, active1, active2, spec.k12, spec.k22)
        if lam1 + lam2 > bound + 1e-9:
            raise RuntimeError("thinning bound violated; this is a bug")
        x = rng.uniform(0.0, bound)
        if x < lam1:
            pts1.append(t)
        elif x < lam1 + lam2:
            pts2.append(t)
    return TrialPair(SpikeTrain(np.array(pts1)), SpikeTrain(np.array(pts2)))


def gen_pair(spec, rng: np.random.Generator) -> TrialPair:
    """Draw one trial pair from any pair mechanism."""
    if isinstance(spec, InjectionSpec):
        return gen_injection(spec, rng)
    if isinstance(spec, HawkesSpec):
        return gen_hawkes(spec, rng)
    if isinstance(spec, SegmentedSpec):
        parts = [gen_pair(seg, rng) for seg in spec.segments]
        x1 = SpikeTrain(np.concatenate([p.x1.times for p in parts]))
        x2 = SpikeTrain(np.concatenate([p.x2.times for p in parts]))
        return TrialPair(x1, x2)
    raise TypeError(f"unknown pair mechanism: {spec!r}")


@dataclass(frozen=True)
class Region:
    """A time interval labeled with the sign of the dependence inside it."""

    a: float
    b: float
    sign: int

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError("region requires a < b")
        if self.sign not in (-1, 1):
            raise ValueError("region sign must be -1 or +1")


@dataclass(frozen=True)
class SimConfig:
    """A full sample-level simulation: n trials of one pair mechanism on [0, T]."""

    n: int
    T: float
    pair: object
    dependence: tuple[Region, ...] = ()
    seed: int | None = None
    name: str = ""

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one trial")
        if not (np.isfinite(self.T) and self.T > 0.0):
            raise ValueError("T must be positive")
        span = self.pair.span
        if span[0] < 0.0 or span[1] > self.T + 1e-9 * max(1.0, self.T):
            raise ValueError(f"pair mechanism span {span} exceeds [0, {self.T}]")
        object.__setattr__(self, "dependence", tuple(self.dependence))


def simulate_sample(config: SimConfig, seed: int | None = None) -> TrialSample:
    """Draw the n trials of ``config`` on per-trial substreams of ``seed``.

    ``seed`` falls back to ``config.seed``; one of the two must be set.
    """
    root = seed if seed is not None else config.seed
    if root is None:
        raise ValueError("no seed given and the configuration has none")
    trials = [gen_pair(config.pair, substream(root, i)) for i in range(config.n)]
    return TrialSample(tuple(trials), config.T)


# ---------------------------------------------------------------------------
# JSON configuration


def _rate_from_json(node, what: str):
    if isinstance(node, dict):
        try:
            return StepFunction(np.asarray(node["knots"]), np.asarray(node["values"]))
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad step function for {what}: {exc}") from exc
    try:
        return float(node)
    except (TypeError, ValueError):
        raise ConfigError(f"{what} must be a number or a knots/values object") from None


def _kernel_from_json(node, what: str) -> StepFunction:
    if node is None:
        return _zero_kernel()
    if not isinstance(node, dict) or "knots" not in node or "values" not in node:
        raise ConfigError(f"{what} must be a knots/values object")
    try:
        return StepFunction(np.asarray(node["knots"]), np.asarray(node["values"]))
    except ValueError as exc:
        raise ConfigError(f"bad kernel {what}: {exc}") from exc


def _pair_from_json(node, span: tuple[float, float]):
    if not isinstance(node, dict) or "type" not in node:
        raise ConfigError("process must be an object with a 'type' field")
    kind = node["type"]
    try:
        if kind == "poisson":
            zero = PoissonSpec(0.0, span)
            return InjectionSpec(
                base1=PoissonSpec(_rate_from_json(node["rate1"], "rate1"), span),
                base2=PoissonSpec(_rate_from_json(node["rate2"], "rate2"), span),
                inject=zero,
            )
        if kind == "injection":
            return InjectionSpec(
                base1=PoissonSpec(_rate_from_json(node["rate1"], "rate1"), span),
                base2=PoissonSpec(_rate_from_json(node["rate2"], "rate2"), span),
                inject=PoissonSpec(_rate_from_json(node["inject"], "inject"), span),
            )
        if kind == "hawkes":
            return HawkesSpec(
                mu1=float(node["mu1"]),
                mu2=float(node["mu2"]),
                k11=_kernel_from_json(node.get("k11"), "k11"),
                k12=_kernel_from_json(node.get("k12"), "k12"),
                k21=_kernel_from_json(node.get("k21"), "k21"),
                k22=_kernel_from_json(node.get("k22"), "k22"),
                span=span,
            )
        if kind == "segments":
            segments = []
            for seg in node["segments"]:
                seg_span = (float(seg["a"]), float(seg["b"]))
                segments.append(_pair_from_json(seg["process"], seg_span))
            return SegmentedSpec(tuple(segments))
    except KeyError as exc:
        raise ConfigError(f"process type {kind!r} is missing field {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown process type {kind!r}")


def load_config(source) -> SimConfig:
    """Load a simulation configuration from a path, an open file, or a dict."""
    if isinstance(source, dict):
        doc = source
    elif hasattr(source, "read"):
        doc = json.load(source)
    else:
        with open(os.fspath(source), "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    try:
        n = int(doc["n"])
        span_t = float(doc["T"])
    except (KeyError, TypeError, ValueError):
        raise ConfigError("configuration needs integer 'n' and float 'T'") from None
    pair = _pair_from_json(doc.get("process"), (0.0, span_t))
    regions = []
    for node in doc.get("dependence", []):
        try:
            regions.append(Region(float(node["a"]), float(node["b"]), int(node["sign"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad dependence region {node!r}: {exc}") from exc
    seed = doc.get("seed")
    try:
        return SimConfig(
            n=n,
            T=span_t,
            pair=pair,
            dependence=tuple(regions),
            seed=None if seed is None else int(seed),
            name=str(doc.get("name", "")),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def with_trials(config: SimConfig, n: int) -> SimConfig:
    """The same configuration with a different number of trials."""
    return replace(config, n=n)
