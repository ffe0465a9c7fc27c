"""Command-line harness around the library.

Subcommands: simulate (benchmark data), train (fit the transport chain),
sample (generate coupled snapshots), interpolate (transport splines between
snapshot times), evaluate (generalized MMD between two snapshot sets).

All randomness flows from explicit --seed flags, so every command is
byte-reproducible. Exit codes: 0 success, 2 invalid input or usage, 1
runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .core import (
    Snapshot,
    SnapshotSeries,
    read_snapshot_csv,
    read_snapshot_dir,
    write_snapshot_dir,
)
from .dynamic import fit_transport_splines, generate, interpolate, train_dppmm
from .metrics import BandwidthGrid, choose_estimator, gmmd2
from .modelio import load_model, reports_to_list, save_model
from .ot1d import KdeConfig
from .sde import make_benchmark

__all__ = ["main"]

_SYSTEM_DEFAULT_DIM = {"vdp": 2, "ou": 2, "lorenz96": 4}


def _emit(doc: dict) -> None:
    print(json.dumps(doc, separators=(", ", ": ")))


def _parse_bandwidth(text: str):
    if text in ("scott", "isj"):
        return text
    if text.startswith("fixed:"):
        try:
            value = float(text[len("fixed:"):])
        except ValueError:
            raise ValueError(f"invalid fixed bandwidth {text!r}") from None
        if not value > 0:
            raise ValueError(f"fixed bandwidth must be positive, got {value}")
        return value
    raise ValueError(
        f"bandwidth must be 'scott', 'isj' or 'fixed:<h>', got {text!r}"
    )


def _read_samples(path_text: str) -> SnapshotSeries:
    path = Path(path_text)
    if path.is_dir():
        return read_snapshot_dir(path)
    if path.is_file():
        return SnapshotSeries((read_snapshot_csv(path),))
    raise ValueError(f"no snapshot directory or CSV file at {path}")


def cmd_simulate(args) -> int:
    d = args.d if args.d is not None else _SYSTEM_DEFAULT_DIM[args.system]
    started = time.perf_counter()
    train, test = make_benchmark(
        args.system, d, args.n, args.seed, m=args.m, dt=args.dt
    )
    out = Path(args.out)
    write_snapshot_dir(train, out / "train")
    write_snapshot_dir(test, out / "test")
    _emit(
        {
            "command": "simulate",
            "system": args.system,
            "d": d,
            "n": args.n,
            "m": args.m,
            "seed": args.seed,
            "train": str(out / "train"),
            "test": str(out / "test"),
            "seconds": round(time.perf_counter() - started, 3),
        }
    )
    return 0


def cmd_train(args) -> int:
    series = read_snapshot_dir(args.data)
    cfg = KdeConfig(
        bandwidth=_parse_bandwidth(args.bandwidth),
        bins=args.bins,
        margin=args.margin,
        floor=args.floor,
    )
    parallel = args.parallel or (args.threads is not None and args.threads > 1)
    started = time.perf_counter()
    model, reports = train_dppmm(
        series,
        alpha=args.alpha,
        cfg=cfg,
        seed=args.seed,
        parallel=parallel,
        workers=args.threads,
        max_iter=args.max_iter,
    )
    seconds = time.perf_counter() - started
    provenance = {
        "seed": args.seed,
        "alpha": args.alpha,
        "cfg": {
            "bandwidth": cfg.bandwidth,
            "bins": cfg.bins,
            "margin": cfg.margin,
            "floor": cfg.floor,
        },
        "max_iter": args.max_iter,
        "reports": reports_to_list(reports),
    }
    save_model(args.out, model, provenance)
    for j, report in enumerate(reports):
        _emit(
            {
                "pair": j,
                "k_final": report.k_final,
                "w2": report.w2_history[-1] if report.w2_history else 0.0,
                "stop_reason": report.stop_reason,
            }
        )
    _emit(
        {
            "command": "train",
            "maps": len(model.maps),
            "out": args.out,
            "seconds": round(seconds, 3),
        }
    )
    return 0


def cmd_sample(args) -> int:
    model, _ = load_model(args.model)
    started = time.perf_counter()
    matrices = generate(model, args.n, args.seed, rescaled=args.keep_rescaled)
    times = (
        model.times
        if args.keep_rescaled
        else model.rescaler.invert_time(model.times)
    )
    series = SnapshotSeries(
        tuple(
            Snapshot(float(t), mat) for t, mat in zip(times, matrices)
        )
    )
    write_snapshot_dir(series, args.out)
    _emit(
        {
            "command": "sample",
            "snapshots": len(series),
            "n": args.n,
            "out": args.out,
            "seconds": round(time.perf_counter() - started, 3),
        }
    )
    return 0


def cmd_interpolate(args) -> int:
    model, _ = load_model(args.model)
    knots = model.rescaler.invert_time(model.times)
    lo, hi = float(knots[0]), float(knots[-1])
    requested = [float(t) for t in args.times]
    for t in requested:
        if not lo <= t <= hi:
            raise ValueError(
                f"time {t} outside the interpolation range [{lo}, {hi}]"
            )
    if np.any(np.diff(requested) <= 0) and len(requested) > 1:
        raise ValueError("requested times must be strictly increasing")

    started = time.perf_counter()
    coupled = generate(model, args.n, args.seed, rescaled=True)
    bundle = fit_transport_splines(model.times, coupled)
    snaps = []
    for t in requested:
        ts = float(model.rescaler.apply_time(t))
        # float noise from the unit round trip must not trip the range check
        ts = min(max(ts, bundle.t_min), bundle.t_max)
        mat = interpolate(bundle, ts)
        if not args.keep_rescaled:
            mat = model.rescaler.invert(mat)
        snaps.append(Snapshot(t, mat))
    write_snapshot_dir(SnapshotSeries(tuple(snaps)), args.out)
    _emit(
        {
            "command": "interpolate",
            "times": requested,
            "n": args.n,
            "out": args.out,
            "seconds": round(time.perf_counter() - started, 3),
        }
    )
    return 0


def cmd_evaluate(args) -> int:
    series_a = _read_samples(args.a)
    series_b = _read_samples(args.b)
    if len(series_a) != len(series_b):
        raise ValueError(
            f"snapshot counts differ: {len(series_a)} vs {len(series_b)}"
        )
    grid = BandwidthGrid(
        np.logspace(np.log10(args.grid_min), np.log10(args.grid_max), args.grid_size)
    )
    started = time.perf_counter()
    per_snapshot = []
    for snap_a, snap_b in zip(series_a, series_b):
        if abs(snap_a.time - snap_b.time) > 1e-9:
            raise ValueError(
                f"snapshot times differ: {snap_a.time!r} vs {snap_b.time!r}"
            )
        estimator = (
            args.estimator
            if args.estimator != "auto"
            else choose_estimator(snap_a.n, snap_b.n)
        )
        value = gmmd2(snap_a.samples, snap_b.samples, grid, estimator)
        per_snapshot.append(
            {"time": snap_a.time, "gmmd2": value, "estimator": estimator}
        )
    report = {
        "command": "evaluate",
        "a": args.a,
        "b": args.b,
        "grid": grid.values.tolist(),
        "per_snapshot": per_snapshot,
        "average_gmmd2": float(np.mean([e["gmmd2"] for e in per_snapshot])),
        "seconds": round(time.perf_counter() - started, 3),
    }
    text = json.dumps(report, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dppmm",
        description=(
            "Generative modeling of a time-varying density from snapshots "
            "via chained projection-pursuit transport maps"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a benchmark system into train/test snapshots")
    p.add_argument("--system", required=True, choices=sorted(_SYSTEM_DEFAULT_DIM))
    p.add_argument("--d", type=int, default=None, help="state dimension (system default if omitted)")
    p.add_argument("--n", type=int, default=10_000, help="trajectories per split")
    p.add_argument("--m", type=int, default=11, help="snapshots per split")
    p.add_argument("--dt", type=float, default=1e-3, help="integrator step size")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory (train/ and test/ inside)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", help="fit the transport chain on a snapshot directory")
    p.add_argument("--data", required=True, help="snapshot directory")
    p.add_argument("--out", required=True, help="model JSON path")
    p.add_argument("--alpha", type=float, default=1e-3, help="relative stopping tolerance")
    p.add_argument("--bins", type=int, default=500, help="KDE grid cells")
    p.add_argument("--margin", type=float, default=0.1, help="KDE domain padding")
    p.add_argument("--floor", type=float, default=1e-8, help="KDE density floor")
    p.add_argument(
        "--bandwidth",
        default="scott",
        help="bandwidth rule: scott, isj, or fixed:<h>",
    )
    p.add_argument("--max-iter", type=int, default=None, help="iteration cap per map (default 10*d)")
    p.add_argument("--seed", type=int, default=0, help="seed for the base draw")
    p.add_argument("--parallel", action="store_true", help="fit snapshot pairs concurrently")
    p.add_argument("--threads", type=int, default=None, help="worker count (default: all cores)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sample", help="generate coupled snapshots from a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=int, default=10_000, help="trajectories to generate")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output snapshot directory")
    p.add_argument(
        "--keep-rescaled",
        action="store_true",
        help="write model-space units instead of original units",
    )
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("interpolate", help="evaluate transport splines at requested times")
    p.add_argument("--model", required=True)
    p.add_argument(
        "--times",
        required=True,
        nargs="+",
        type=float,
        help="strictly increasing times in original units",
    )
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output snapshot directory")
    p.add_argument("--keep-rescaled", action="store_true")
    p.set_defaults(func=cmd_interpolate)

    p = sub.add_parser("evaluate", help="generalized MMD between two snapshot sets")
    p.add_argument("--a", required=True, help="snapshot directory or CSV file")
    p.add_argument("--b", required=True, help="snapshot directory or CSV file")
    p.add_argument(
        "--estimator", choices=("auto", "quadratic", "linear"), default="auto"
    )
    p.add_argument("--grid-min", type=float, default=1e-2)
    p.add_argument("--grid-max", type=float, default=1e2)
    p.add_argument("--grid-size", type=int, default=15)
    p.add_argument("--out", default=None, help="also write the JSON report here")
    p.set_defaults(func=cmd_evaluate)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
