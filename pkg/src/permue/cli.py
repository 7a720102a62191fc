"""Command line interface.

Subcommands
-----------
- ``simulate``    draw a sample from a configuration and write spike data
- ``test``        run one independence test on a window of a spike file
- ``ue``          sliding-window detection with BH-controlled permutation tests
- ``experiment``  FDR/FNDR estimation over repeated simulated analyses
- ``pvals``       p-value distribution study across test methods
- ``bench``       operation counts of the coincidence kernels

Exit status is 0 on success and 2 on invalid input (bad flags, malformed
spike data or configuration files).
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import sys

import numpy as np

from .coincidence import Binned, Delayed, OpCounter, binned_count, delayed_count
from .core import Window
from .harness import estimate_rates, pvalue_cdf_study
from .io import SpikeFileError, parse_spike_file, write_spike_file
from .multiwindow import permutation_ue, sliding_windows
from .rng import substream
from .sigtest import TestMethod, run_test
from .simulate import ConfigError, load_config, simulate_sample, with_trials
from .stats import coincidence_matrix

__all__ = ["main"]


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _rows_to_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = _io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _emit(args, payload: dict, rows: list[dict]) -> None:
    if args.format == "csv":
        _write_text(args.out, _rows_to_csv(rows))
    else:
        _write_text(args.out, json.dumps(payload, indent=2))


def _cmd_simulate(args) -> int:
    config = load_config(args.config)
    if args.n is not None:
        config = with_trials(config, args.n)
    seed = args.seed if args.seed is not None else config.seed
    if seed is None:
        raise ConfigError("no --seed given and the configuration has none")
    sample = simulate_sample(config, seed=seed)
    if args.out is None or args.out == "-":
        write_spike_file(sample, sys.stdout)
    else:
        write_spike_file(sample, args.out)
    return 0


def _window_from_args(args, span: float) -> Window:
    if args.window_bounds is not None:
        return Window(args.window_bounds[0], args.window_bounds[1])
    return Window(0.0, span)


def _cmd_test(args) -> int:
    sample = parse_spike_file(args.data)
    window = _window_from_args(args, sample.span)
    sample.check_window(window)
    kind = Binned(args.delta) if args.binned else Delayed(args.delta)
    matrix = coincidence_matrix(sample, window, kind)
    method = TestMethod(args.method)
    report = run_test(matrix, method, args.B, args.seed)
    payload = report.to_dict()
    payload["window"] = {"a": window.a, "b": window.b}
    payload["delta"] = args.delta
    row = report.to_dict()
    row.update({"window_a": window.a, "window_b": window.b, "delta": args.delta})
    _emit(args, payload, [row])
    return 0


def _cmd_ue(args) -> int:
    sample = parse_spike_file(args.data)
    family = sliding_windows(sample.span, args.window, args.step)
    ds = permutation_ue(
        sample,
        family,
        delta=args.delta,
        q=args.q,
        B=args.B,
        seed=args.seed,
        threads=args.threads,
        sides=args.sides,
    )
    _emit(args, ds.to_dict(), ds.csv_rows())
    if args.figure:
        from .plotting import detection_figure, save_figure

        save_figure(detection_figure(ds, title=args.data), args.figure)
    return 0


def _cmd_experiment(args) -> int:
    config = load_config(args.config)
    if args.runs_n is not None:
        config = with_trials(config, args.runs_n)
    family = sliding_windows(config.T, args.window, args.step)
    est = estimate_rates(
        config,
        family,
        method=args.method,
        runs=args.runs,
        q=args.q,
        B=args.B,
        seed=args.seed,
        delta=args.delta,
        threads=args.threads,
    )
    payload = est.to_dict()
    payload.update({"q": args.q, "B": args.B, "seed": args.seed, "delta": args.delta,
                    "windows": len(family)})
    _emit(args, payload, [payload])
    return 0


def _cmd_pvals(args) -> int:
    config = load_config(args.config)
    methods = []
    for name in args.methods.split(","):
        name = name.strip()
        if not name:
            continue
        try:
            methods.append(TestMethod(name))
        except ValueError:
            raise ConfigError(
                f"unknown method {name!r}; choose from "
                + ", ".join(m.value for m in TestMethod)
            ) from None
    if not methods:
        raise ConfigError("no methods given")
    n = args.n if args.n is not None else config.n
    rows = pvalue_cdf_study(
        config, n=n, reps=args.reps, methods=methods, B=args.B, seed=args.seed,
        delta=args.delta,
    )
    payload = {
        "config": args.config,
        "n": n,
        "reps": args.reps,
        "B": args.B,
        "seed": args.seed,
        "delta": args.delta,
        "samples": rows,
    }
    _emit(args, payload, rows)
    if args.figure:
        from .plotting import pvalue_cdf_figure, save_figure

        save_figure(pvalue_cdf_figure(rows), args.figure)
    return 0


def _cmd_bench(args) -> int:
    if args.length / args.delta < 2:
        raise ConfigError("window length must be at least twice delta")
    window = Window(0.0, args.length)
    delayed_ops = np.empty(args.reps)
    delayed_cmps = np.empty(args.reps)
    binned_ops = np.empty(args.reps)
    for rep in range(args.reps):
        rng = substream(args.seed, rep)
        t1 = np.sort(rng.uniform(0.0, args.length, rng.poisson(args.rate1 * args.length)))
        t2 = np.sort(rng.uniform(0.0, args.length, rng.poisson(args.rate2 * args.length)))
        counter = OpCounter()
        delayed_count(t1, t2, args.delta, counter=counter)
        delayed_ops[rep] = counter.total
        delayed_cmps[rep] = counter.comparisons
        counter = OpCounter()
        binned_count(t1, t2, window, args.delta, counter=counter)
        binned_ops[rep] = counter.total
    payload = {
        "rate1": args.rate1,
        "rate2": args.rate2,
        "delta": args.delta,
        "length": args.length,
        "reps": args.reps,
        "seed": args.seed,
        "delayed_mean_ops": float(delayed_ops.mean()),
        "delayed_mean_comparisons": float(delayed_cmps.mean()),
        "binned_mean_ops": float(binned_ops.mean()),
    }
    _emit(args, payload, [payload])
    return 0


def _add_common(parser: argparse.ArgumentParser, *, b_default: int = 10000) -> None:
    parser.add_argument("--delta", type=float, default=0.01,
                        help="coincidence half-width / bin width in seconds")
    parser.add_argument("--B", type=int, default=b_default, help="number of replicates")
    parser.add_argument("--seed", type=int, default=1, help="root seed")
    parser.add_argument("--format", choices=("json", "csv"), default="json",
                        help="output format")
    parser.add_argument("--out", default=None, help="output path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="permue",
        description="Distribution-free unitary events analysis for paired spike trains.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="draw a sample and write spike data")
    p.add_argument("--config", required=True, help="simulation configuration (JSON)")
    p.add_argument("--n", type=int, default=None, help="override the number of trials")
    p.add_argument("--seed", type=int, default=None, help="override the configured seed")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("test", help="one independence test on one window")
    p.add_argument("--data", required=True, help="spike data file")
    p.add_argument("--method", choices=[m.value for m in TestMethod], default="permutation")
    p.add_argument("--window", dest="window_bounds", type=float, nargs=2,
                   metavar=("A", "B"), default=None,
                   help="window bounds (default: the full recording)")
    p.add_argument("--binned", action="store_true",
                   help="use binned instead of delayed coincidences")
    _add_common(p)
    p.set_defaults(func=_cmd_test)

    p = sub.add_parser("ue", help="sliding-window detection under BH")
    p.add_argument("--data", required=True, help="spike data file")
    p.add_argument("--window", type=float, default=0.1, help="window width in seconds")
    p.add_argument("--step", type=float, default=0.01, help="window step in seconds")
    p.add_argument("--q", type=float, default=0.05, help="BH level in (0, 1/2)")
    p.add_argument("--threads", type=int, default=1, help="worker threads")
    p.add_argument("--sides", choices=("both", "upper"), default="both",
                   help="pool both one-sided p-values or the excess side only")
    p.add_argument("--figure", default=None, help="also render a detection map to this path")
    _add_common(p)
    p.set_defaults(func=_cmd_ue)

    p = sub.add_parser("experiment", help="FDR/FNDR over repeated simulated analyses")
    p.add_argument("--config", required=True, help="simulation configuration (JSON)")
    p.add_argument("--method", choices=("P", "TSC", "TSC+BH"), default="P")
    p.add_argument("--runs", type=int, default=100, help="number of simulation runs")
    p.add_argument("--n", dest="runs_n", type=int, default=None,
                   help="override the number of trials per run")
    p.add_argument("--window", type=float, default=0.1, help="window width in seconds")
    p.add_argument("--step", type=float, default=0.01, help="window step in seconds")
    p.add_argument("--q", type=float, default=0.05, help="BH level in (0, 1/2)")
    p.add_argument("--threads", type=int, default=1, help="worker threads")
    _add_common(p, b_default=2000)
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("pvals", help="p-value distribution study")
    p.add_argument("--config", required=True, help="simulation configuration (JSON)")
    p.add_argument("--n", type=int, default=None, help="trials per repetition")
    p.add_argument("--reps", type=int, default=1000, help="number of repetitions")
    p.add_argument("--methods", default="permutation,tsc",
                   help="comma-separated test methods")
    p.add_argument("--figure", default=None, help="also render the p-value CDFs to this path")
    _add_common(p, b_default=1000)
    p.set_defaults(func=_cmd_pvals)

    p = sub.add_parser("bench", help="operation counts of the coincidence kernels")
    p.add_argument("--rate1", type=float, default=50.0, help="left train rate (Hz)")
    p.add_argument("--rate2", type=float, default=50.0, help="right train rate (Hz)")
    p.add_argument("--length", type=float, default=0.1, help="window length (s)")
    p.add_argument("--reps", type=int, default=10000, help="number of repetitions")
    _add_common(p)
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SpikeFileError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
