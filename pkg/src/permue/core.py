"""Domain types for paired spike-train samples.

A spike train is a strictly increasing sequence of spike times in
seconds.  A trial pairs one train per neuron; a sample stacks n
independent trials recorded over a common span ``[0, T]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["SpikeTrain", "TrialPair", "TrialSample", "Window", "restrict"]


def _as_times(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True).reshape(-1)
    if arr.size:
        if not np.all(np.isfinite(arr)):
            raise ValueError("spike times must be finite")
        if arr[0] < 0.0:
            raise ValueError("spike times must be non-negative")
        if arr.size > 1 and not np.all(np.diff(arr) > 0.0):
            raise ValueError("spike times must be strictly increasing")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class SpikeTrain:
    """Sorted spike times (seconds) of one neuron in one trial."""

    times: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "times", _as_times(self.times))

    def __len__(self) -> int:
        return self.times.size


@dataclass(frozen=True)
class Window:
    """A closed time interval ``[a, b]`` with ``a < b``, in seconds."""

    a: float
    b: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)):
            raise ValueError("window bounds must be finite")
        if not self.a < self.b:
            raise ValueError(f"window requires a < b, got [{self.a}, {self.b}]")

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def center(self) -> float:
        return 0.5 * (self.a + self.b)


@dataclass(frozen=True)
class TrialPair:
    """The two simultaneously recorded trains of one trial."""

    x1: SpikeTrain
    x2: SpikeTrain


@dataclass(frozen=True)
class TrialSample:
    """An i.i.d. stack of trial pairs over the recording span ``[0, span]``."""

    trials: tuple[TrialPair, ...]
    span: float

    def __post_init__(self):
        object.__setattr__(self, "trials", tuple(self.trials))
        if not self.trials:
            raise ValueError("sample must contain at least one trial")
        if not (np.isfinite(self.span) and self.span > 0.0):
            raise ValueError("recording span must be positive and finite")
        for idx, trial in enumerate(self.trials):
            for train in (trial.x1, trial.x2):
                if train.times.size and train.times[-1] > self.span:
                    raise ValueError(
                        f"trial {idx + 1} has a spike beyond the recording span {self.span}"
                    )

    @property
    def n(self) -> int:
        return len(self.trials)

    def check_window(self, window: Window) -> None:
        """Raise if ``window`` is not contained in ``[0, span]``."""
        if window.a < 0.0 or window.b > self.span:
            raise ValueError(
                f"window [{window.a}, {window.b}] not contained in [0, {self.span}]"
            )


def restrict(train: SpikeTrain, window: Window) -> SpikeTrain:
    """Return the spikes of ``train`` falling in the closed interval ``[a, b]``."""
    times = train.times
    lo = np.searchsorted(times, window.a, side="left")
    hi = np.searchsorted(times, window.b, side="right")
    return SpikeTrain(times[lo:hi])
