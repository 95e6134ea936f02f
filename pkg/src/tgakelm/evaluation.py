"""Metrics and the one-class evaluation protocol: F1 from counts, report
assembly, and seeded k-fold grid search over the kernel/regularization
grids with a reserved outlier pool for validation."""

import csv
import io
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import ockelm
from .dataset import Dataset, atomic_write_text, zscore_apply, zscore_fit
from .fastica import IcaConfig, ica_fit, ica_transform
from .kernels import RBF, TGAK, KernelSpec, gram
from .seeding import derive_seed


def _default_T():
    return tuple(2.0 ** (0.5 * i) for i in range(17))


def _default_C():
    return tuple(10.0**e for e in range(-5, 6))


def _default_sigma():
    return tuple(2.0**e for e in range(-6, 7))


@dataclass(frozen=True)
class GridSpec:
    """Hyperparameter grid; defaults are the full search ranges."""

    T_values: tuple = field(default_factory=_default_T)
    C_values: tuple = field(default_factory=_default_C)
    sigma_values: tuple = field(default_factory=_default_sigma)
    theta: float = 0.01
    folds: int = 5

    def __post_init__(self):
        for name in ("T_values", "C_values", "sigma_values"):
            vals = getattr(self, name)
            if not vals or any(not v > 0 for v in vals):
                raise ValueError(f"{name} must be nonempty and positive")
        if not 0.0 < self.theta < 1.0:
            raise ValueError("theta must lie in (0, 1)")
        if self.folds < 2:
            raise ValueError("folds must be >= 2")

    @classmethod
    def full(cls) -> "GridSpec":
        return cls()

    @classmethod
    def coarse(cls) -> "GridSpec":
        """Every other value on each axis; a strict subset of the full grid."""
        full = cls()
        return cls(
            T_values=full.T_values[::2],
            C_values=full.C_values[::2],
            sigma_values=full.sigma_values[::2],
        )


@dataclass
class EvalReport:
    tp: int
    fp: int
    fn: int
    tn: int
    precision: float
    recall: float
    f1: float
    hyperparameters: dict
    seed: int | None = None


def f1_from_counts(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    """Precision, recall and F1; any zero denominator yields 0."""
    if min(tp, fp, fn) < 0:
        raise ValueError("counts must be nonnegative")
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2.0 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def evaluate(
    model: ockelm.OckelmModel,
    test: Dataset,
    positive_label: int = 1,
    hyperparameters: dict | None = None,
    seed: int | None = None,
) -> EvalReport:
    """Predict over a labeled test set and tally, target class positive."""
    if test.labels is None:
        raise ValueError("evaluate requires a labeled test set")
    preds = ockelm.predict(model, test)
    pos_pred = preds == positive_label
    pos_true = test.labels == positive_label
    tp = int(np.sum(pos_pred & pos_true))
    fp = int(np.sum(pos_pred & ~pos_true))
    fn = int(np.sum(~pos_pred & pos_true))
    tn = int(np.sum(~pos_pred & ~pos_true))
    precision, recall, f1 = f1_from_counts(tp, fp, fn)
    if hyperparameters is None:
        hyperparameters = {
            "kernel": model.spec.kind,
            "sigma": model.spec.sigma,
            "T": model.spec.triangle,
            "normalize": model.spec.normalize,
            "C": model.C,
            "theta": model.theta,
            "ica": None,
        }
    return EvalReport(tp, fp, fn, tn, precision, recall, f1, hyperparameters, seed)


def _prepare_folds(train_targets, cv_outliers, grid, use_ica, ica_components, seed):
    rng = np.random.default_rng(derive_seed(seed, "folds"))
    order = rng.permutation(train_targets.n_rows)
    fold_idx = np.array_split(order, grid.folds)
    out_rows = cv_outliers.rows if cv_outliers.n_rows else None
    folds = []
    for f in range(grid.folds):
        fit_idx = np.concatenate([fold_idx[g] for g in range(grid.folds) if g != f])
        held_idx = fold_idx[f]
        fit_ds = Dataset(train_targets.rows[fit_idx], None, list(train_targets.feature_names))
        if out_rows is None:
            val_rows = train_targets.rows[held_idx]
            val_labels = np.ones(len(held_idx), dtype=np.int64)
        else:
            val_rows = np.vstack([train_targets.rows[held_idx], out_rows])
            val_labels = np.concatenate(
                [np.ones(len(held_idx), dtype=np.int64),
                 -np.ones(len(out_rows), dtype=np.int64)]
            )
        val_ds = Dataset(val_rows, val_labels, list(train_targets.feature_names))
        stats = zscore_fit(fit_ds)
        fit_n = zscore_apply(fit_ds, stats)
        val_n = zscore_apply(val_ds, stats)
        if use_ica:
            transform = ica_fit(
                fit_n,
                IcaConfig(n_components=ica_components, seed=derive_seed(seed, f"grid-ica-{f}")),
            )
            fit_n = ica_transform(transform, fit_n)
            val_n = ica_transform(transform, val_n)
        folds.append((fit_n.rows, val_n.rows, val_labels))
    return folds


def grid_search(
    train_targets: Dataset,
    cv_outliers: Dataset,
    grid: GridSpec,
    kind: str = TGAK,
    use_ica: bool = False,
    ica_components: int | None = None,
    seed: int = 0,
) -> tuple[dict, list[dict]]:
    """Mean cross-validated F1 for every grid cell; returns (best, cells).

    Folds are cut from the target rows only; each fold's model trains on
    the remaining targets (normalization and ICA refit per fold) and is
    validated on the held-out targets plus the whole outlier pool, which
    is never trained on. Ties on mean F1 break toward the smaller C, then
    sigma, then T. Cells whose solve fails score 0 and carry failed=True.
    """
    if train_targets.labels is not None and np.any(train_targets.labels == -1):
        raise ValueError("train_targets must contain target-class rows only")
    if cv_outliers.labels is not None and np.any(cv_outliers.labels == 1):
        raise ValueError("cv_outliers must contain outlier-class rows only")
    if cv_outliers.n_rows and cv_outliers.n_features != train_targets.n_features:
        raise ValueError("outlier pool feature count differs from targets")
    if grid.folds > train_targets.n_rows:
        raise ValueError(
            f"{grid.folds} folds need at least that many target rows, "
            f"got {train_targets.n_rows}"
        )
    if kind not in (RBF, TGAK):
        raise ValueError(f"unknown kernel kind {kind!r}")
    if cv_outliers.n_rows == 0:
        warnings.warn(
            "empty outlier pool: validation scores use held-out targets only",
            RuntimeWarning,
            stacklevel=2,
        )

    folds = _prepare_folds(
        train_targets, cv_outliers, grid, use_ica, ica_components, seed
    )
    t_axis = grid.T_values if kind == TGAK else (None,)

    scores: dict[tuple, list[float]] = {}
    failed: set[tuple] = set()
    for T in t_axis:
        for sigma in grid.sigma_values:
            spec = KernelSpec(kind, sigma, T, normalize=True)
            for fit_rows, val_rows, val_labels in folds:
                omega = gram(fit_rows, fit_rows, spec)
                kval = gram(val_rows, fit_rows, spec)
                for C in grid.C_values:
                    key = (T, C, sigma)
                    try:
                        model = ockelm.fit_gram(omega, fit_rows, spec, C, grid.theta)
                        errors = np.abs(kval @ model.a - 1.0)
                        preds = np.where(errors < model.delta, 1, -1)
                        tp = int(np.sum((preds == 1) & (val_labels == 1)))
                        fp = int(np.sum((preds == 1) & (val_labels == -1)))
                        fn = int(np.sum((preds == -1) & (val_labels == 1)))
                        f1 = f1_from_counts(tp, fp, fn)[2]
                    except RuntimeError:
                        f1 = 0.0
                        failed.add(key)
                    scores.setdefault(key, []).append(f1)

    cells = []
    for T in t_axis:
        for C in grid.C_values:
            for sigma in grid.sigma_values:
                key = (T, C, sigma)
                fold_f1s = scores[key]
                cells.append(
                    {
                        "T": T,
                        "C": C,
                        "sigma": sigma,
                        "fold_f1s": list(fold_f1s),
                        "mean_f1": float(np.mean(fold_f1s)),
                        "failed": key in failed,
                    }
                )
    best = min(
        cells,
        key=lambda c: (
            -c["mean_f1"],
            c["C"],
            c["sigma"],
            0.0 if c["T"] is None else c["T"],
        ),
    )
    return best, cells


def cells_to_csv_text(cells: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["T", "C", "sigma", "fold_f1s", "mean_f1"])
    for cell in cells:
        writer.writerow(
            [
                "" if cell["T"] is None else repr(float(cell["T"])),
                repr(float(cell["C"])),
                repr(float(cell["sigma"])),
                ";".join(repr(float(v)) for v in cell["fold_f1s"]),
                repr(float(cell["mean_f1"])),
            ]
        )
    return buf.getvalue()


def cells_to_csv(cells: list[dict], path) -> None:
    atomic_write_text(path, cells_to_csv_text(cells))
