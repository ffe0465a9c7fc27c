"""Time-varying generative model built from chained transport maps.

Training fits one projection-pursuit transport map per consecutive snapshot
pair, anchored by a map from a small isotropic Gaussian base onto the first
snapshot. Generation pushes fresh base draws through the chain cumulatively,
so row n of every returned snapshot is one continuous trajectory. Between
snapshot times, trajectories are interpolated per coordinate with cubic
splines, which keeps the generated paths C^2 where the snapshots allow it.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .core import AffineRescaler, SnapshotSeries, fit_rescaler
from .ot1d import KdeConfig
from .ppmm import PPMMFitReport, PPMMMap, eval_ppmm, fit_ppmm

__all__ = [
    "DPPMMModel",
    "SplineBundle",
    "train_dppmm",
    "generate",
    "fit_transport_splines",
    "interpolate",
]

DEFAULT_BASE_VARIANCE = 0.01

_TIME_SLACK = 1e-9


@dataclass(frozen=True)
class DPPMMModel:
    """Trained chain: base Gaussian, per-pair transport maps, rescaler.

    ``maps[0]`` sends base samples onto the first snapshot; ``maps[j]``
    sends snapshot j onto snapshot j+1. ``times`` are the snapshot times in
    rescaled units, so they live in [0, 1].
    """

    base_mean: np.ndarray
    base_var: np.ndarray
    rescaler: AffineRescaler
    times: np.ndarray
    maps: tuple[PPMMMap, ...]

    def __post_init__(self):
        mean = np.asarray(self.base_mean, dtype=np.float64).reshape(-1)
        var = np.asarray(self.base_var, dtype=np.float64).reshape(-1)
        times = np.asarray(self.times, dtype=np.float64).reshape(-1)
        d = mean.shape[0]
        if var.shape[0] != d:
            raise ValueError("base_mean and base_var must share length")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(var))):
            raise ValueError("base parameters contain non-finite entries")
        if np.any(var <= 0):
            raise ValueError("base variances must be positive")
        if self.rescaler.dim != d:
            raise ValueError("rescaler dimension does not match the base")
        if times.shape[0] != len(self.maps):
            raise ValueError("need exactly one map per snapshot time")
        if times.shape[0] < 1:
            raise ValueError("model needs at least one snapshot time")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        if times[0] < -_TIME_SLACK or times[-1] > 1.0 + _TIME_SLACK:
            raise ValueError("times must lie in [0, 1] (rescaled units)")
        maps = tuple(self.maps)
        for j, ppmm_map in enumerate(maps):
            if ppmm_map.dim != d:
                raise ValueError(
                    f"map {j} has dimension {ppmm_map.dim}, expected {d}"
                )
        mean.setflags(write=False)
        var.setflags(write=False)
        times.setflags(write=False)
        object.__setattr__(self, "base_mean", mean)
        object.__setattr__(self, "base_var", var)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "maps", maps)

    @property
    def dim(self) -> int:
        return self.base_mean.shape[0]


def _fit_pair(args):
    index, source, target, alpha, cfg, max_iter, ridge = args
    try:
        return fit_ppmm(
            source, target, alpha=alpha, max_iter=max_iter, cfg=cfg, ridge=ridge
        )
    except (ValueError, RuntimeError) as exc:
        raise type(exc)(f"transport fit for snapshot pair {index} failed: {exc}") from exc


def train_dppmm(
    series: SnapshotSeries,
    alpha: float = 1e-3,
    cfg: KdeConfig | None = KdeConfig(),
    seed: int = 0,
    parallel: bool = False,
    workers: int | None = None,
    rescaler: AffineRescaler | None = None,
    base_mean=None,
    base_var=None,
    max_iter: int | None = None,
    ridge: float = 1e-8,
) -> tuple[DPPMMModel, tuple[PPMMFitReport, ...]]:
    """Fit the full chain of transport maps over a snapshot series.

    With ``rescaler`` None the series is treated as raw data: a rescaler is
    fitted on it and applied before training. Passing a rescaler asserts the
    series is already in that rescaler's units and uses it as-is. The base
    draw count matches the first snapshot's sample count; ``seed`` controls
    only that draw. ``cfg`` selects the 1D map variant per fit (None for the
    exact sorted maps, a KdeConfig for the regularized maps).

    ``parallel`` runs the per-pair fits concurrently; each fit is pure and
    deterministic, so the assembled model is bit-identical to a sequential
    run. Returns the model plus one fit report per map.
    """
    if len(series) < 2:
        raise ValueError("training requires at least 2 snapshots")
    if rescaler is None:
        rescaler = fit_rescaler(series)
        series = rescaler.apply_series(series)
    elif rescaler.dim != series.dim:
        raise ValueError("rescaler dimension does not match the series")

    d = series.dim
    mean = (
        np.zeros(d)
        if base_mean is None
        else np.asarray(base_mean, dtype=np.float64).reshape(-1)
    )
    var = (
        np.full(d, DEFAULT_BASE_VARIANCE)
        if base_var is None
        else np.asarray(base_var, dtype=np.float64).reshape(-1)
    )
    rng = np.random.default_rng(seed)
    base = mean + np.sqrt(var) * rng.standard_normal((series[0].n, d))

    sources = [base] + [snap.samples for snap in series[:-1]]
    targets = [snap.samples for snap in series]
    jobs = [
        (j, src, tgt, alpha, cfg, max_iter, ridge)
        for j, (src, tgt) in enumerate(zip(sources, targets))
    ]
    if parallel:
        if workers is None:
            workers = min(len(jobs), os.cpu_count() or 1)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_fit_pair, jobs))
    else:
        results = [_fit_pair(job) for job in jobs]

    maps = tuple(fitted for fitted, _ in results)
    reports = tuple(report for _, report in results)
    model = DPPMMModel(
        base_mean=mean,
        base_var=var,
        rescaler=rescaler,
        times=series.times,
        maps=maps,
    )
    return model, reports


def generate(
    model: DPPMMModel, n: int, seed: int, rescaled: bool = False
) -> list[np.ndarray]:
    """Draw n coupled trajectories: one sample matrix per snapshot time.

    Fresh base samples are pushed through the map chain cumulatively, so row
    k of snapshot j and row k of snapshot j+1 belong to the same trajectory.
    Output is mapped back to original data units unless ``rescaled`` is set.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    current = model.base_mean + np.sqrt(model.base_var) * rng.standard_normal(
        (n, model.dim)
    )
    snapshots = []
    for ppmm_map in model.maps:
        current = eval_ppmm(ppmm_map, current)
        snapshots.append(current)
    if rescaled:
        return snapshots
    return [model.rescaler.invert(s) for s in snapshots]


@dataclass(frozen=True)
class SplineBundle:
    """Per-trajectory, per-coordinate cubic interpolant between snapshots.

    boundary_rule records the effective rule for the knot count: not-a-knot
    for 4 or more knots, the unique quadratic through 3 knots, linear for 2.
    ``values`` keeps the (M, N, d) knot matrices so evaluation at a knot
    time can return them verbatim.
    """

    times: np.ndarray
    n: int
    dim: int
    boundary_rule: str
    values: np.ndarray = field(repr=False)
    _spline: CubicSpline = field(repr=False)

    @property
    def t_min(self) -> float:
        return float(self.times[0])

    @property
    def t_max(self) -> float:
        return float(self.times[-1])


def fit_transport_splines(times, coupled) -> SplineBundle:
    """Interpolate coupled snapshot rows with cubic splines in time.

    ``coupled`` is a sequence of M sample matrices with shared shape whose
    row identity encodes trajectory identity. Builds one cubic interpolant
    per trajectory per coordinate (not-a-knot ends; 3 knots degrade to the
    unique quadratic, 2 knots to the connecting line).
    """
    times = np.asarray(times, dtype=np.float64).reshape(-1)
    m = times.shape[0]
    if m < 2:
        raise ValueError("spline fitting requires at least 2 snapshots")
    if np.any(np.diff(times) <= 0) or not np.all(np.isfinite(times)):
        raise ValueError("times must be finite and strictly increasing")
    matrices = [np.asarray(c, dtype=np.float64) for c in coupled]
    if len(matrices) != m:
        raise ValueError(f"expected {m} snapshot matrices, got {len(matrices)}")
    shape = matrices[0].shape
    if len(shape) != 2:
        raise ValueError("snapshot matrices must be 2-D")
    for j, mat in enumerate(matrices):
        if mat.shape != shape:
            raise ValueError(
                f"snapshot {j} has shape {mat.shape}, expected {shape}"
            )
        if not np.all(np.isfinite(mat)):
            raise ValueError(f"snapshot {j} contains non-finite entries")

    values = np.stack(matrices, axis=0)
    spline = CubicSpline(times, values, axis=0, bc_type="not-a-knot", extrapolate=False)
    rule = "not-a-knot" if m >= 4 else ("quadratic" if m == 3 else "linear")
    return SplineBundle(
        times=times,
        n=shape[0],
        dim=shape[1],
        boundary_rule=rule,
        values=values,
        _spline=spline,
    )


def interpolate(bundle: SplineBundle, t: float) -> np.ndarray:
    """Evaluate every trajectory at one time inside the knot range.

    A time equal to a knot returns that knot's matrix verbatim; between
    knots the cubic interpolant is evaluated.
    """
    t = float(t)
    if not bundle.t_min <= t <= bundle.t_max:
        raise ValueError(
            f"t = {t} outside the interpolation range "
            f"[{bundle.t_min}, {bundle.t_max}]"
        )
    hit = np.nonzero(bundle.times == t)[0]
    if hit.size:
        return bundle.values[hit[0]].copy()
    return np.asarray(bundle._spline(t), dtype=np.float64)
