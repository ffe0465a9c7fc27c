"""Most-informative projection direction between two sample sets via SAVE.

Two-slice sliced average variance estimation: whiten both sets with the
pooled covariance, form M = ((I - S_x)^2 + (I - S_y)^2) / 2 from the whitened
within-group covariances, and back-transform the top eigenvector. The top
eigenvalue measures the second-moment discrepancy the direction captures; a
value at numerical zero means the sets are indistinguishable to SAVE.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Direction", "SaveDiagnostics", "save_direction"]

# Below this top eigenvalue the SAVE matrix is numerically zero and the
# direction carries no information.
INFORMATIVE_EIGENVALUE = 1e-10


@dataclass(frozen=True)
class Direction:
    """A unit-norm projection direction in R^d."""

    components: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.components, dtype=np.float64).reshape(-1)
        norm = np.linalg.norm(v)
        if not np.isfinite(norm) or abs(norm - 1.0) > 1e-12:
            raise ValueError(f"direction must have unit norm, got {norm!r}")
        v.setflags(write=False)
        object.__setattr__(self, "components", v)

    @property
    def dim(self) -> int:
        return self.components.shape[0]


@dataclass(frozen=True)
class SaveDiagnostics:
    top_eigenvalue: float
    informative: bool


def _fix_sign(v: np.ndarray) -> np.ndarray:
    """Make the first non-negligible component positive (reproducible sign)."""
    for c in v:
        if abs(c) > 1e-14:
            return -v if c < 0 else v
    return v


def save_direction(
    x: np.ndarray, y: np.ndarray, ridge: float = 1e-8
) -> tuple[Direction, SaveDiagnostics]:
    """Direction along which the two samples' projected variances differ most.

    Parameters
    ----------
    x, y : (N1, d), (N2, d) arrays with N1, N2 >= 2 and finite entries.
    ridge : nonnegative Tikhonov term added to the pooled covariance before
        inversion; guards against directions already flattened to zero spread.

    Returns
    -------
    (Direction, SaveDiagnostics). The direction is unit-norm with its first
    nonzero component positive; ``informative`` is False when the SAVE matrix
    is numerically zero (caller should treat the pair as already matched).
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 2:
        raise ValueError("inputs must be 2-D sample matrices")
    if x.shape[1] != y.shape[1]:
        raise ValueError(f"dimension mismatch: {x.shape[1]} vs {y.shape[1]}")
    if x.shape[0] < 2 or y.shape[0] < 2:
        raise ValueError("both sample sets need at least 2 rows")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("inputs contain non-finite entries")
    if ridge < 0:
        raise ValueError("ridge must be nonnegative")

    d = x.shape[1]
    pooled = np.vstack([x, y])
    mu = pooled.mean(axis=0)
    # MLE normalization (ddof=0) throughout: with ddof=1 the pooled and
    # within-group denominators disagree and identical inputs would produce
    # a spurious O(1/N^2) top eigenvalue instead of numerical zero.
    sigma = np.cov(pooled, rowvar=False, ddof=0).reshape(d, d)

    try:
        evals, evecs = np.linalg.eigh(sigma + ridge * np.eye(d))
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(
            f"pooled covariance eigendecomposition failed "
            f"(condition number {np.linalg.cond(sigma):.3e})"
        ) from exc
    # symmetric inverse square root of the ridged pooled covariance
    w = (evecs / np.sqrt(evals)) @ evecs.T

    xw = (x - mu) @ w
    yw = (y - mu) @ w
    sx = np.cov(xw, rowvar=False, ddof=0).reshape(d, d)
    sy = np.cov(yw, rowvar=False, ddof=0).reshape(d, d)

    eye = np.eye(d)
    m = 0.5 * ((eye - sx) @ (eye - sx) + (eye - sy) @ (eye - sy))
    try:
        m_evals, m_evecs = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(
            f"SAVE matrix eigendecomposition failed "
            f"(condition number {np.linalg.cond(m):.3e})"
        ) from exc

    # argmax returns the first index on exact ties, fixing the tie-break order
    top = int(np.argmax(m_evals))
    top_eigenvalue = float(m_evals[top])
    v = m_evecs[:, top]

    direction = w @ v
    direction = direction / np.linalg.norm(direction)
    direction = _fix_sign(direction)

    diagnostics = SaveDiagnostics(
        top_eigenvalue=top_eigenvalue,
        informative=top_eigenvalue >= INFORMATIVE_EIGENVALUE,
    )
    return Direction(direction), diagnostics
