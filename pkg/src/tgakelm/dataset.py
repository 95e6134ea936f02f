"""Row-matrix datasets: CSV ingestion, z-score normalization, one-class
splitting, and fixed-interval telemetry resampling."""

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .seeding import derive_seed

# Canonical telemetry schema: velocity, IMU state, and system status.
ALFA_FEATURES = (
    "velocity_x",
    "velocity_y",
    "velocity_z",
    "angular_velocity_x",
    "angular_velocity_y",
    "angular_velocity_z",
    "linear_acceleration_x",
    "linear_acceleration_y",
    "linear_acceleration_z",
    "magnetic_field_x",
    "magnetic_field_y",
    "magnetic_field_z",
    "fluid_pressure",
    "temperature",
    "altitude_error",
    "airspeed_error",
    "tracking_error_x",
    "wp_distance",
)


def _fmt(v: float) -> str:
    # repr of a Python float is the shortest string that parses back to
    # the same IEEE double, which makes CSV round-trips bit-exact.
    return repr(float(v))


@dataclass
class Dataset:
    """N instances by d features, optionally labeled +1 (target) / -1 (outlier)."""

    rows: np.ndarray
    labels: np.ndarray | None = None
    feature_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.rows = np.atleast_2d(np.asarray(self.rows, dtype=np.float64))
        if self.rows.ndim != 2 or self.rows.shape[1] < 1:
            raise ValueError(f"rows must be N x d with d >= 1, got {self.rows.shape}")
        if not np.all(np.isfinite(self.rows)):
            raise ValueError("rows contain non-finite values")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != (self.rows.shape[0],):
                raise ValueError("labels length does not match row count")
            if not np.all(np.isin(self.labels, (1, -1))):
                raise ValueError("labels must be +1 or -1")
        if not self.feature_names:
            self.feature_names = [f"x{i}" for i in range(self.rows.shape[1])]
        if len(self.feature_names) != self.rows.shape[1]:
            raise ValueError("feature_names length does not match feature count")

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    @property
    def n_features(self) -> int:
        return self.rows.shape[1]

    def subset(self, idx) -> "Dataset":
        labels = None if self.labels is None else self.labels[idx]
        return Dataset(self.rows[idx], labels, list(self.feature_names))

    def without_labels(self) -> "Dataset":
        return Dataset(self.rows.copy(), None, list(self.feature_names))


@dataclass
class NormStats:
    """Per-feature mean and population standard deviation."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float64)
        self.std = np.asarray(self.std, dtype=np.float64)
        if self.mean.shape != self.std.shape or self.mean.ndim != 1:
            raise ValueError("mean and std must be equal-length vectors")
        if np.any(self.std < 0):
            raise ValueError("std entries must be >= 0")


@dataclass
class TelemetrySeries:
    """One telemetry channel: strictly increasing timestamps and readings."""

    timestamps: np.ndarray
    values: np.ndarray
    feature_name: str

    def __post_init__(self):
        self.timestamps = np.asarray(self.timestamps, dtype=np.float64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.timestamps.shape != self.values.shape or self.timestamps.ndim != 1:
            raise ValueError(f"{self.feature_name}: timestamps/values shape mismatch")
        if self.timestamps.size and np.any(np.diff(self.timestamps) <= 0):
            raise ValueError(f"{self.feature_name}: timestamps must be strictly increasing")
        if not np.all(np.isfinite(self.values)) or not np.all(
            np.isfinite(self.timestamps)
        ):
            raise ValueError(f"{self.feature_name}: non-finite entries")


@dataclass
class SplitResult:
    """One-class split: unlabeled target train set, labeled test set, and
    the reserved outlier pool for cross-validated hyperparameter search."""

    train: Dataset
    test: Dataset
    cv_outliers: Dataset


def atomic_write_text(path: str, text: str) -> None:
    """Write a whole file via temp-and-rename so readers never see partials."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_csv(path, label_column: str | None = None, target: str | None = None) -> Dataset:
    """Load a headered CSV of finite reals.

    If label_column is given, that column is stripped from the features.
    Without a target value, its cells must already be +1 / -1; with one,
    cells equal to the target string map to +1 and everything else to -1.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise ValueError(f"{path}: missing header row")
        header = [h.strip() for h in header]
        label_idx = None
        if label_column is not None:
            if label_column not in header:
                raise ValueError(f"{path}: no column named {label_column!r}")
            label_idx = header.index(label_column)
        feature_names = [h for i, h in enumerate(header) if i != label_idx]
        rows: list[list[float]] = []
        labels: list[int] = []
        for lineno, record in enumerate(reader, start=2):
            if len(record) != len(header):
                raise ValueError(
                    f"{path}: row {lineno}: expected {len(header)} cells, got {len(record)}"
                )
            values = []
            for i, cell in enumerate(record):
                if i == label_idx:
                    labels.append(_parse_label(path, lineno, header[i], cell, target))
                    continue
                try:
                    v = float(cell)
                except ValueError:
                    raise ValueError(
                        f"{path}: row {lineno}, column {header[i]!r}: "
                        f"cannot parse {cell!r} as a number"
                    ) from None
                if not np.isfinite(v):
                    raise ValueError(
                        f"{path}: row {lineno}, column {header[i]!r}: "
                        f"non-finite value {cell!r}"
                    )
                values.append(v)
            rows.append(values)
        if not rows:
            raise ValueError(f"{path}: no data rows")
    return Dataset(
        np.array(rows, dtype=np.float64),
        np.array(labels, dtype=np.int64) if label_idx is not None else None,
        feature_names,
    )


def _parse_label(path, lineno, column, cell, target):
    if target is not None:
        return 1 if cell.strip() == target else -1
    try:
        v = float(cell)
    except ValueError:
        v = None
    if v not in (1.0, -1.0):
        raise ValueError(
            f"{path}: row {lineno}, column {column!r}: label {cell!r} is not +1/-1"
        )
    return int(v)


def dataset_to_csv(data: Dataset, label_column: str = "label") -> str:
    """Render a dataset as CSV text (labels included when present)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = list(data.feature_names)
    if data.labels is not None:
        header.append(label_column)
    writer.writerow(header)
    for i in range(data.n_rows):
        record = [_fmt(v) for v in data.rows[i]]
        if data.labels is not None:
            record.append(str(int(data.labels[i])))
        writer.writerow(record)
    return buf.getvalue()


def save_csv(data: Dataset, path, label_column: str = "label") -> None:
    atomic_write_text(path, dataset_to_csv(data, label_column))


def zscore_fit(data: Dataset) -> NormStats:
    """Per-feature mean and population (divide by N) standard deviation."""
    if data.n_rows < 1:
        raise ValueError("cannot fit normalization on an empty dataset")
    return NormStats(data.rows.mean(axis=0), data.rows.std(axis=0, ddof=0))


def zscore_apply(data: Dataset, stats: NormStats) -> Dataset:
    """Center and scale each feature; zero-variance features map to 0."""
    if stats.mean.shape[0] != data.n_features:
        raise ValueError(
            f"stats dimensioned for {stats.mean.shape[0]} features, "
            f"dataset has {data.n_features}"
        )
    safe = np.where(stats.std == 0.0, 1.0, stats.std)
    normed = (data.rows - stats.mean) / safe
    normed[:, stats.std == 0.0] = 0.0
    return Dataset(normed, data.labels, list(data.feature_names))


def one_class_split(data: Dataset, seed: int) -> SplitResult:
    """Shuffle-and-halve split for one-class evaluation.

    Half of the target rows (floor) become the unlabeled train set. The
    remaining targets plus half of the outliers (floor) form the labeled
    test set; the leftover outliers are reserved as the cross-validation
    pool and never reach the test set.
    """
    if data.labels is None:
        raise ValueError("one_class_split requires labels")
    pos = np.flatnonzero(data.labels == 1)
    neg = np.flatnonzero(data.labels == -1)
    if len(pos) < 2 or len(neg) < 2:
        raise ValueError(
            f"need at least 2 rows per class, got {len(pos)} targets / {len(neg)} outliers"
        )
    rng = np.random.default_rng(derive_seed(seed, "split"))
    pos = pos[rng.permutation(len(pos))]
    neg = neg[rng.permutation(len(neg))]
    n_train = len(pos) // 2
    n_test_out = len(neg) // 2
    train = data.subset(pos[:n_train]).without_labels()
    test_idx = np.concatenate([pos[n_train:], neg[:n_test_out]])
    test = data.subset(test_idx)
    cv_outliers = data.subset(neg[n_test_out:])
    return SplitResult(train, test, cv_outliers)


def _bucket_boundaries(t0: float, t1: float, fault_time: float | None, interval: float):
    eps = 1e-9 * interval
    cuts = [t1] if fault_time is None else [fault_time, t1]
    bounds = [t0]
    start = t0
    for end in cuts:
        k = 1
        while start + k * interval < end - eps:
            bounds.append(start + k * interval)
            k += 1
        bounds.append(end)
        start = end
    return np.array(bounds)


def resample_alfa(
    series: list[TelemetrySeries],
    fault_time: float | None,
    interval: float = 0.25,
    seed: int = 0,
) -> Dataset:
    """Bucket asynchronous telemetry channels onto one fixed-interval grid.

    The time axis is cut at fault_time and each segment is bucketed at
    ``interval`` (the final bucket of a segment may be shorter). Per bucket
    and per feature one reading is picked uniformly at random; empty
    buckets repeat the previous bucket's pick (a leading empty bucket
    takes the first later pick). Rows from buckets starting before
    fault_time are labeled +1, the rest -1.
    """
    if not series:
        raise ValueError("no telemetry series given")
    if not interval > 0:
        raise ValueError(f"interval must be positive, got {interval}")
    names = [s.feature_name for s in series]
    if len(set(names)) != len(names):
        raise ValueError("duplicate feature names in telemetry series")
    for s in series:
        if s.timestamps.size == 0:
            raise ValueError(f"feature {s.feature_name!r} has no data points")
    t0 = min(float(s.timestamps[0]) for s in series)
    t1 = max(float(s.timestamps[-1]) for s in series)
    if fault_time is not None and not (t0 < fault_time < t1):
        raise ValueError(
            f"fault_time {fault_time} outside the observed span [{t0}, {t1}]"
        )
    bounds = _bucket_boundaries(t0, t1, fault_time, interval)
    n_buckets = len(bounds) - 1
    rng = np.random.default_rng(derive_seed(seed, "resample"))
    columns = np.empty((n_buckets, len(series)))
    for col, s in enumerate(series):
        slot = np.searchsorted(bounds, s.timestamps, side="right") - 1
        np.clip(slot, 0, n_buckets - 1, out=slot)
        picks: list[float | None] = [None] * n_buckets
        for b in range(n_buckets):
            candidates = np.flatnonzero(slot == b)
            if candidates.size == 1:
                picks[b] = s.values[candidates[0]]
            elif candidates.size > 1:
                picks[b] = s.values[candidates[rng.integers(candidates.size)]]
        for b in range(1, n_buckets):
            if picks[b] is None:
                picks[b] = picks[b - 1]
        if picks[0] is None:
            picks[0] = next(v for v in picks if v is not None)
            for b in range(1, n_buckets):
                if picks[b] is None:
                    picks[b] = picks[b - 1]
                else:
                    break
        columns[:, col] = picks
    if fault_time is None:
        labels = np.ones(n_buckets, dtype=np.int64)
    else:
        labels = np.where(bounds[:-1] < fault_time, 1, -1)
    return Dataset(columns, labels, names)


def load_telemetry_export(manifest_path) -> tuple[list[TelemetrySeries], float | None]:
    """Read a telemetry export: a manifest naming one t,value CSV per feature.

    The manifest is JSON with keys "fault_time" (number or null) and
    "features" (mapping of every canonical feature name to a CSV path,
    relative paths resolved against the manifest). Missing schema features
    are an error.
    """
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    if "features" not in manifest:
        raise ValueError(f"{manifest_path}: manifest has no 'features' mapping")
    mapping = manifest["features"]
    for name in ALFA_FEATURES:
        if name not in mapping:
            raise ValueError(f"{manifest_path}: missing feature {name!r}")
    base = os.path.dirname(os.path.abspath(manifest_path))
    series = []
    for name in ALFA_FEATURES:
        csv_path = mapping[name]
        if not os.path.isabs(csv_path):
            csv_path = os.path.join(base, csv_path)
        ts, vals = _load_series_csv(csv_path)
        series.append(TelemetrySeries(ts, vals, name))
    fault_time = manifest.get("fault_time")
    return series, None if fault_time is None else float(fault_time)


def _load_series_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["t", "value"]:
            raise ValueError(f"{path}: expected header 't,value'")
        ts, vals = [], []
        for lineno, record in enumerate(reader, start=2):
            try:
                ts.append(float(record[0]))
                vals.append(float(record[1]))
            except (ValueError, IndexError):
                raise ValueError(f"{path}: row {lineno}: bad t,value record") from None
    return np.array(ts), np.array(vals)
