"""Reading and writing the plain-text spike data format.

The format is UTF-8 text.  Blank lines and lines starting with ``#`` are
ignored.  The first remaining line must read ``T=<float>`` (recording
span in seconds) and every following line is one spike record::

    <trial> <neuron> <time>

with ``trial`` an integer (ids must cover 1..n once all records are
read), ``neuron`` 1 or 2, and ``time`` a float in ``[0, T]``.  Records
may appear in any order.  A trial may have no spikes on one neuron, but
a trial id missing entirely is an error (the stack would be ambiguous).
"""

from __future__ import annotations

import os
from typing import IO

import numpy as np

from .core import SpikeTrain, TrialPair, TrialSample

__all__ = [
    "SpikeFileError",
    "parse_spike_text",
    "parse_spike_file",
    "format_spike_file",
    "write_spike_file",
]


class SpikeFileError(ValueError):
    """Malformed spike data input; carries the offending 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def parse_spike_text(text: str) -> TrialSample:
    """Parse spike data from a string.  See the module docstring for the format."""
    span = None
    records: dict[tuple[int, int], list[float]] = {}
    seen: dict[tuple[int, int], set[float]] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if span is None:
            if not line.startswith("T="):
                raise SpikeFileError("expected header 'T=<float>' before records", lineno)
            try:
                span = float(line[2:])
            except ValueError:
                raise SpikeFileError(f"invalid recording span {line[2:]!r}", lineno) from None
            if not (np.isfinite(span) and span > 0.0):
                raise SpikeFileError(f"recording span must be positive, got {span}", lineno)
            continue
        fields = line.split()
        if len(fields) != 3:
            raise SpikeFileError(
                f"expected '<trial> <neuron> <time>', got {line!r}", lineno
            )
        try:
            trial = int(fields[0])
            neuron = int(fields[1])
            time = float(fields[2])
        except ValueError:
            raise SpikeFileError(
                f"expected '<trial> <neuron> <time>', got {line!r}", lineno
            ) from None
        if trial < 1:
            raise SpikeFileError(f"trial id must be >= 1, got {trial}", lineno)
        if neuron not in (1, 2):
            raise SpikeFileError(f"neuron id must be 1 or 2, got {neuron}", lineno)
        if not np.isfinite(time) or time < 0.0:
            raise SpikeFileError(f"spike time must be >= 0, got {fields[2]}", lineno)
        if time > span:
            raise SpikeFileError(
                f"spike time {fields[2]} exceeds recording span {span}", lineno
            )
        key = (trial, neuron)
        bucket = seen.setdefault(key, set())
        if time in bucket:
            raise SpikeFileError(
                f"duplicate spike time {fields[2]} for trial {trial} neuron {neuron}",
                lineno,
            )
        bucket.add(time)
        records.setdefault(key, []).append(time)

    if span is None:
        raise SpikeFileError("missing header 'T=<float>'")
    if not records:
        raise SpikeFileError("no spike records found")

    n = max(trial for trial, _ in records)
    present = {trial for trial, _ in records}
    missing = sorted(set(range(1, n + 1)) - present)
    if missing:
        raise SpikeFileError(f"trial ids must cover 1..{n}; missing {missing}")

    trials = []
    for trial in range(1, n + 1):
        x1 = SpikeTrain(np.sort(records.get((trial, 1), [])))
        x2 = SpikeTrain(np.sort(records.get((trial, 2), [])))
        trials.append(TrialPair(x1, x2))
    return TrialSample(tuple(trials), span)


def parse_spike_file(source: str | os.PathLike | IO[str]) -> TrialSample:
    """Parse spike data from a path or an open text file."""
    if hasattr(source, "read"):
        return parse_spike_text(source.read())
    with open(source, "r", encoding="utf-8") as fh:
        return parse_spike_text(fh.read())


def format_spike_file(sample: TrialSample) -> str:
    """Serialize ``sample`` so that parsing the result reproduces it exactly."""
    lines = [f"T={sample.span!r}"]
    for trial_idx, trial in enumerate(sample.trials, start=1):
        for neuron, train in ((1, trial.x1), (2, trial.x2)):
            for t in train.times:
                lines.append(f"{trial_idx} {neuron} {float(t)!r}")
    return "\n".join(lines) + "\n"


def write_spike_file(sample: TrialSample, dest: str | os.PathLike | IO[str]) -> None:
    """Write ``sample`` to a path or an open text file."""
    text = format_spike_file(sample)
    if hasattr(dest, "write"):
        dest.write(text)
        return
    with open(dest, "w", encoding="utf-8") as fh:
        fh.write(text)
