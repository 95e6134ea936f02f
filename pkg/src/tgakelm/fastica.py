"""Fixed-point ICA: centering, eigenvalue whitening with optional
dimension reduction, parallel unmixing updates with symmetric
decorrelation, and transform of new batches."""

import warnings
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .seeding import derive_seed

_CONTRASTS = ("logcosh", "exp")
_CONVERGENCE = ("cosine", "matrix_norm")


@dataclass(frozen=True)
class IcaConfig:
    """Fit settings; n_components None keeps the full dimension.

    convergence "cosine" stops on the sign-invariant row criterion
    max_r (1 - |<w_new, w_old>|) < epsilon; "matrix_norm" uses the raw
    update norm ||W_new - W_old||, which never settles when a row keeps
    flipping sign between equivalent fixed points.
    """

    n_components: int | None = None
    max_iter: int = 200
    epsilon: float = 1e-4
    seed: int = 0
    contrast: str = "logcosh"
    convergence: str = "cosine"

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        if self.contrast not in _CONTRASTS:
            raise ValueError(f"unknown contrast {self.contrast!r}")
        if self.convergence not in _CONVERGENCE:
            raise ValueError(f"unknown convergence test {self.convergence!r}")


@dataclass
class IcaTransform:
    """Frozen fit result; maps raw rows to independent components."""

    mean: np.ndarray
    whiten: np.ndarray
    W: np.ndarray
    n_components: int
    iterations_used: int
    converged: bool


def contrast_eval(kind: str, u):
    """First and second derivatives of the non-quadratic contrast at u."""
    u = np.asarray(u, dtype=np.float64)
    if kind == "logcosh":
        th = np.tanh(u)
        return th, 1.0 - th * th
    if kind == "exp":
        e = np.exp(-0.5 * u * u)
        return u * e, (1.0 - u * u) * e
    raise ValueError(f"unknown contrast {kind!r}")


def _sym_decorrelate(W: np.ndarray) -> np.ndarray:
    # W <- (W W^T)^{-1/2} W keeps rows mutually orthogonal so they cannot
    # all collapse onto the single strongest component.
    s, u = np.linalg.eigh(W @ W.T)
    if s[0] <= 1e-12:
        raise RuntimeError("degenerate unmixing matrix during decorrelation")
    return (u * (1.0 / np.sqrt(s))) @ u.T @ W


def ica_fit(train: Dataset, config: IcaConfig) -> IcaTransform:
    """Fit the unmixing transform on training rows.

    Whitening keeps the n_components largest covariance eigenvalues, which
    is also the dimension-reduction mechanism. Non-convergence within
    max_iter is reported through the converged flag, not raised.
    """
    X = train.rows
    n_samples, d = X.shape
    if n_samples < 2:
        raise ValueError("need at least 2 rows to fit")
    n = d if config.n_components is None else int(config.n_components)
    if not 1 <= n <= d:
        raise ValueError(f"n_components must lie in [1, {d}], got {n}")
    mean = X.mean(axis=0)
    Xc = X - mean
    cov = (Xc.T @ Xc) / n_samples
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1][:n]
    kept = evals[order]
    if kept[-1] <= 1e-12:
        raise RuntimeError(
            f"covariance is rank deficient: eigenvalue {kept[-1]:.3e} among the "
            f"{n} kept components"
        )
    whiten = (evecs[:, order] / np.sqrt(kept)).T
    Xw = whiten @ Xc.T  # components x samples

    rng = np.random.default_rng(derive_seed(config.seed, "ica"))
    W = _sym_decorrelate(rng.standard_normal((n, n)))
    converged = False
    iterations = 0
    for iterations in range(1, config.max_iter + 1):
        U = W @ Xw
        g, g_prime = contrast_eval(config.contrast, U)
        W_new = (g @ Xw.T) / n_samples - g_prime.mean(axis=1)[:, None] * W
        if not np.all(np.isfinite(W_new)):
            raise RuntimeError("unmixing update diverged to non-finite values")
        W_new = _sym_decorrelate(W_new)
        if config.convergence == "cosine":
            drift = float(np.max(1.0 - np.abs(np.sum(W_new * W, axis=1))))
        else:
            drift = float(np.linalg.norm(W_new - W))
        W = W_new
        if drift < config.epsilon:
            converged = True
            break
    if not converged:
        warnings.warn(
            f"ICA did not converge within {config.max_iter} iterations",
            RuntimeWarning,
            stacklevel=2,
        )
    W = W / np.linalg.norm(W, axis=1, keepdims=True)
    return IcaTransform(
        mean=mean,
        whiten=whiten,
        W=W,
        n_components=n,
        iterations_used=iterations,
        converged=converged,
    )


def ica_transform(transform: IcaTransform, batch: Dataset) -> Dataset:
    """Project rows onto the learned components."""
    if batch.n_features != transform.mean.shape[0]:
        raise ValueError(
            f"batch has {batch.n_features} features, transform expects "
            f"{transform.mean.shape[0]}"
        )
    comps = (transform.W @ (transform.whiten @ (batch.rows - transform.mean).T)).T
    names = [f"ic{i + 1}" for i in range(transform.n_components)]
    return Dataset(comps, batch.labels, names)
