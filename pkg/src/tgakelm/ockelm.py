"""One-class kernel extreme learning machine.

Trains on target-class rows only, with the constant target 1: the dual
coefficients solve (I/C + K) a = 1 in closed form, every instance is
scored by how far its kernel-weighted output drifts from 1, and the
decision threshold is the error quantile that writes off a ``theta``
fraction of the training rows as outliers.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .dataset import Dataset
from .kernels import KernelSpec, gram


@dataclass
class OckelmModel:
    """Fitted state: frozen training rows plus the closed-form solution."""

    train_rows: np.ndarray
    spec: KernelSpec
    C: float
    theta: float
    a: np.ndarray
    delta: float


@dataclass
class ScoreVector:
    outputs: np.ndarray
    errors: np.ndarray


def _solve_spd(matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Cholesky solve with escalating diagonal jitter before giving up."""
    scale = max(abs(float(np.trace(matrix))) / matrix.shape[0], np.finfo(np.float64).tiny)
    jitter = 0.0
    while True:
        try:
            factor = cho_factor(
                matrix if jitter == 0.0 else matrix + jitter * np.eye(matrix.shape[0]),
                lower=True,
            )
            return cho_solve(factor, rhs)
        except LinAlgError:
            if jitter == 0.0:
                jitter = 1e-12 * scale
            elif jitter < 1e-6 * scale:
                jitter *= 10.0
            else:
                cond = float(np.linalg.cond(matrix))
                raise RuntimeError(
                    f"linear system stayed non-positive-definite after jitter "
                    f"escalation (condition estimate {cond:.3e})"
                ) from None
        if jitter > 0.0:
            warnings.warn(
                f"added diagonal jitter {jitter:.3e} to stabilize the solve",
                RuntimeWarning,
                stacklevel=3,
            )


def threshold(errors_desc: np.ndarray, theta: float, n: int) -> float:
    """k-th largest training error with k = max(1, ceil(theta * n))."""
    errors_desc = np.asarray(errors_desc, dtype=np.float64)
    if errors_desc.size == 0:
        raise ValueError("empty error vector")
    if not 0.0 < theta < 1.0:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")
    # The small backoff keeps ceil exact when theta * n is an integer that
    # float rounding nudged upward (0.01 * 100 -> 1.0000000000000002).
    k = max(1, math.ceil(theta * n - 1e-9))
    if k > errors_desc.size:
        raise ValueError(f"rank {k} exceeds {errors_desc.size} errors")
    return float(errors_desc[k - 1])


def fit_gram(
    omega: np.ndarray,
    rows: np.ndarray,
    spec: KernelSpec,
    C: float,
    theta: float,
) -> OckelmModel:
    """Closed-form fit from a precomputed training kernel matrix."""
    n = omega.shape[0]
    if not C > 0:
        raise ValueError(f"C must be positive, got {C}")
    if not 0.0 < theta < 1.0:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")
    a = _solve_spd(np.eye(n) / C + omega, np.ones(n))
    outputs = omega @ a
    errors = np.abs(outputs - 1.0)
    delta = threshold(np.sort(errors)[::-1], theta, n)
    return OckelmModel(
        train_rows=np.array(rows, dtype=np.float64, copy=True),
        spec=spec,
        C=float(C),
        theta=float(theta),
        a=a,
        delta=delta,
    )


def fit(train: Dataset, spec: KernelSpec, C: float, theta: float) -> OckelmModel:
    """Fit on target-class rows (assumed already preprocessed)."""
    if train.n_rows < 2:
        raise ValueError(f"need at least 2 training rows, got {train.n_rows}")
    omega = gram(train.rows, train.rows, spec)
    return fit_gram(omega, train.rows, spec, C, theta)


def score(model: OckelmModel, batch: Dataset) -> ScoreVector:
    """Model outputs and |output - 1| errors for a batch."""
    if batch.n_features != model.train_rows.shape[1]:
        raise ValueError(
            f"batch has {batch.n_features} features, model expects "
            f"{model.train_rows.shape[1]}"
        )
    k = gram(batch.rows, model.train_rows, model.spec)
    outputs = k @ model.a
    return ScoreVector(outputs=outputs, errors=np.abs(outputs - 1.0))


def predict(model: OckelmModel, batch: Dataset) -> np.ndarray:
    """+1 where the batch error stays below the threshold, else -1.

    Ties at the threshold count as outliers, keeping the share of flagged
    training rows consistent with theta.
    """
    sv = score(model, batch)
    return np.where(sv.errors < model.delta, 1, -1).astype(np.int64)
