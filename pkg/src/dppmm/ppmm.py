"""Projection-pursuit construction of a high-dimensional transport map.

A PPMM map is a chain of rank-one updates: each step projects the current
samples onto a direction where their distribution still differs most from
the target (per SAVE), fits a monotone 1D transport map along it, and moves
every sample along that direction by the 1D displacement. The chain stops
when the root-mean-square displacement of the original source stabilizes in
relative terms, when SAVE finds no informative direction, or at the
iteration cap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ot1d import (
    KdeConfig,
    RegularizedMap1D,
    SortedMap1D,
    fit_regularized_map,
    fit_sorted_map,
)
from .projection import Direction, save_direction

__all__ = [
    "PPMMStep",
    "PPMMMap",
    "PPMMFitReport",
    "fit_ppmm",
    "eval_ppmm",
    "approx_w2",
    "converged",
]


@dataclass(frozen=True)
class PPMMStep:
    """One rank-one transport update: a direction and the 1D map along it."""

    direction: Direction
    map1d: SortedMap1D | RegularizedMap1D


@dataclass(frozen=True)
class PPMMMap:
    """An ordered chain of PPMM steps acting on d-dimensional samples."""

    steps: tuple[PPMMStep, ...]
    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        object.__setattr__(self, "steps", tuple(self.steps))
        for i, step in enumerate(self.steps):
            if step.direction.dim != self.dim:
                raise ValueError(
                    f"step {i} direction has dimension {step.direction.dim}, "
                    f"expected {self.dim}"
                )

    @property
    def iterations(self) -> int:
        return len(self.steps)

    def __call__(self, x):
        return eval_ppmm(self, x)


@dataclass(frozen=True)
class PPMMFitReport:
    """Fit trace: rms-displacement history, stop reason, iteration count.

    stop_reason is one of "tolerance", "max_iter" or
    "no_informative_direction".
    """

    w2_history: tuple[float, ...]
    stop_reason: str
    k_final: int

    def __post_init__(self):
        object.__setattr__(self, "w2_history", tuple(self.w2_history))
        if self.stop_reason not in (
            "tolerance",
            "max_iter",
            "no_informative_direction",
        ):
            raise ValueError(f"unknown stop_reason {self.stop_reason!r}")
        if len(self.w2_history) != self.k_final:
            raise ValueError("w2_history length must equal k_final")


def converged(previous_w2: float, current_w2: float, alpha: float) -> bool:
    """Relative-stabilization stopping rule between consecutive rms displacements.

    A zero current displacement counts as converged (identity-like maps);
    otherwise stop when |current - previous| / |current| <= alpha.
    """
    if current_w2 == 0.0:
        return True
    return abs(current_w2 - previous_w2) / abs(current_w2) <= alpha


def _validate_matrix(x, name: str, dim: int | None = None) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"{name} must be a 2-D sample matrix")
    if dim is not None and x.shape[1] != dim:
        raise ValueError(f"{name} has {x.shape[1]} columns, expected {dim}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite entries")
    return x


def eval_ppmm(ppmm_map: PPMMMap, x) -> np.ndarray:
    """Push sample rows through the chain of rank-one transport updates.

    Rows are independent; components orthogonal to every step direction are
    untouched. An empty chain is the identity.
    """
    x = _validate_matrix(x, "x", ppmm_map.dim)
    out = x.copy()
    for step in ppmm_map.steps:
        p = step.direction.components
        proj = out @ p
        out += np.outer(step.map1d(proj) - proj, p)
    return out


def approx_w2(ppmm_map: PPMMMap, x) -> float:
    """Root-mean-square displacement of x under the full chain."""
    x = _validate_matrix(x, "x", ppmm_map.dim)
    disp = eval_ppmm(ppmm_map, x) - x
    return float(np.sqrt(np.mean(np.sum(disp * disp, axis=1))))


def fit_ppmm(
    x,
    y,
    alpha: float = 1e-3,
    max_iter: int | None = None,
    cfg: KdeConfig | None = None,
    ridge: float = 1e-8,
) -> tuple[PPMMMap, PPMMFitReport]:
    """Fit a projection-pursuit transport map from x-samples to y-samples.

    Each iteration takes the SAVE direction between the current samples and
    the target, fits a 1D map along it (exact sorted map when ``cfg`` is
    None, KDE-regularized map otherwise), and displaces the samples. After
    every iteration the rms displacement of the original x is recorded;
    from the second iteration on, a relative change of at most ``alpha``
    stops the fit (a zero displacement also counts as converged). SAVE
    reporting no informative direction or hitting ``max_iter`` (default
    10 * d) are the other exits.

    Returns the fitted map and a report whose w2_history has one entry per
    completed iteration.
    """
    x = _validate_matrix(x, "x")
    y = _validate_matrix(y, "y", x.shape[1])
    if x.shape[0] < 2 or y.shape[0] < 2:
        raise ValueError("both sample sets need at least 2 rows")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    d = x.shape[1]
    if max_iter is None:
        max_iter = 10 * d
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")

    original = x
    current = x.copy()
    steps: list[PPMMStep] = []
    history: list[float] = []
    stop_reason = "max_iter"

    for k in range(1, max_iter + 1):
        direction, diag = save_direction(current, y, ridge=ridge)
        if not diag.informative:
            stop_reason = "no_informative_direction"
            break
        p = direction.components
        proj = current @ p
        target_proj = y @ p
        if cfg is None:
            map1d = fit_sorted_map(proj, target_proj)
        else:
            map1d = fit_regularized_map(proj, target_proj, cfg)
        current += np.outer(map1d(proj) - proj, p)
        steps.append(PPMMStep(direction, map1d))

        disp = current - original
        w2 = float(np.sqrt(np.mean(np.sum(disp * disp, axis=1))))
        history.append(w2)
        if k >= 2 and converged(history[-2], history[-1], alpha):
            stop_reason = "tolerance"
            break

    report = PPMMFitReport(
        w2_history=tuple(history), stop_reason=stop_reason, k_final=len(steps)
    )
    return PPMMMap(tuple(steps), d), report
