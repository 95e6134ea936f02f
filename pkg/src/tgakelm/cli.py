"""Command-line pipeline: one-class splitting, telemetry resampling,
model fitting with persisted preprocessing, scoring, evaluation, and
cross-validated grid search.

Exit codes: 0 success, 1 data/runtime error, 2 usage error.
"""

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import ockelm
from .dataset import (
    Dataset,
    NormStats,
    atomic_write_text,
    load_csv,
    load_telemetry_export,
    one_class_split,
    resample_alfa,
    save_csv,
    zscore_apply,
    zscore_fit,
)
from .evaluation import GridSpec, cells_to_csv, evaluate, grid_search
from .fastica import IcaConfig, IcaTransform, ica_fit, ica_transform
from .kernels import RBF, TGAK, KernelSpec

MODEL_FORMAT_VERSION = 1


@dataclass
class ModelFile:
    """Self-contained persisted pipeline: preprocessing transforms frozen at
    fit time, the kernel choice, and the dual solution with its training
    rows (kernel models cannot predict without them)."""

    format_version: int
    norm_stats: NormStats
    ica: IcaTransform | None
    kernel: KernelSpec
    C: float
    theta: float
    delta: float
    a: np.ndarray
    train_rows: np.ndarray
    provenance: dict


def _model_to_dict(mf: ModelFile) -> dict:
    ica = None
    if mf.ica is not None:
        ica = {
            "mean": mf.ica.mean.tolist(),
            "whiten": mf.ica.whiten.tolist(),
            "W": mf.ica.W.tolist(),
            "n_components": int(mf.ica.n_components),
            "iterations_used": int(mf.ica.iterations_used),
            "converged": bool(mf.ica.converged),
        }
    return {
        "format_version": mf.format_version,
        "norm_stats": {
            "mean": mf.norm_stats.mean.tolist(),
            "std": mf.norm_stats.std.tolist(),
        },
        "ica": ica,
        "kernel": {
            "kind": mf.kernel.kind,
            "sigma": float(mf.kernel.sigma),
            "triangle": None if mf.kernel.triangle is None else float(mf.kernel.triangle),
            "normalize": bool(mf.kernel.normalize),
        },
        "C": float(mf.C),
        "theta": float(mf.theta),
        "delta": float(mf.delta),
        "a": mf.a.tolist(),
        "train_rows": mf.train_rows.tolist(),
        "provenance": mf.provenance,
    }


def save_model(mf: ModelFile, path) -> None:
    atomic_write_text(path, json.dumps(_model_to_dict(mf), indent=2) + "\n")


def load_model(path) -> ModelFile:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    version = doc.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ValueError(
            f"{path}: model format version {version!r} unsupported "
            f"(expected {MODEL_FORMAT_VERSION})"
        )
    ica = None
    if doc["ica"] is not None:
        d = doc["ica"]
        ica = IcaTransform(
            mean=np.array(d["mean"], dtype=np.float64),
            whiten=np.array(d["whiten"], dtype=np.float64),
            W=np.array(d["W"], dtype=np.float64),
            n_components=int(d["n_components"]),
            iterations_used=int(d["iterations_used"]),
            converged=bool(d["converged"]),
        )
    k = doc["kernel"]
    return ModelFile(
        format_version=version,
        norm_stats=NormStats(
            np.array(doc["norm_stats"]["mean"], dtype=np.float64),
            np.array(doc["norm_stats"]["std"], dtype=np.float64),
        ),
        ica=ica,
        kernel=KernelSpec(
            kind=k["kind"],
            sigma=k["sigma"],
            triangle=k["triangle"],
            normalize=k["normalize"],
        ),
        C=float(doc["C"]),
        theta=float(doc["theta"]),
        delta=float(doc["delta"]),
        a=np.array(doc["a"], dtype=np.float64),
        train_rows=np.array(doc["train_rows"], dtype=np.float64),
        provenance=doc["provenance"],
    )


def _file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _apply_transforms(mf: ModelFile, data: Dataset) -> Dataset:
    data = zscore_apply(data, mf.norm_stats)
    if mf.ica is not None:
        data = ica_transform(mf.ica, data)
    return data


def _ockelm_model(mf: ModelFile) -> ockelm.OckelmModel:
    return ockelm.OckelmModel(
        train_rows=mf.train_rows,
        spec=mf.kernel,
        C=mf.C,
        theta=mf.theta,
        a=mf.a,
        delta=mf.delta,
    )


def fit_pipeline(
    train: Dataset,
    kind: str,
    sigma: float,
    triangle: float | None,
    C: float,
    theta: float,
    ica_components: int | None,
    seed: int,
    normalize_kernel: bool = True,
    fingerprint: str | None = None,
    grid_cell: dict | None = None,
) -> ModelFile:
    """Normalize, optionally reconstruct with ICA, fit, and package.

    ica_components None disables ICA; 0 keeps the full dimension.
    """
    stats = zscore_fit(train)
    staged = zscore_apply(train.without_labels(), stats)
    transform = None
    if ica_components is not None:
        n = None if ica_components == 0 else ica_components
        transform = ica_fit(staged, IcaConfig(n_components=n, seed=seed))
        staged = ica_transform(transform, staged)
    spec = KernelSpec(kind, sigma, triangle, normalize=normalize_kernel)
    model = ockelm.fit(staged, spec, C, theta)
    return ModelFile(
        format_version=MODEL_FORMAT_VERSION,
        norm_stats=stats,
        ica=transform,
        kernel=spec,
        C=model.C,
        theta=model.theta,
        delta=model.delta,
        a=model.a,
        train_rows=model.train_rows,
        provenance={
            "seed": seed,
            "dataset_sha256": fingerprint,
            "grid_cell": grid_cell,
        },
    )


def _report_to_dict(report) -> dict:
    return {
        "tp": report.tp,
        "fp": report.fp,
        "fn": report.fn,
        "tn": report.tn,
        "precision": report.precision,
        "recall": report.recall,
        "f1": report.f1,
        "hyperparameters": report.hyperparameters,
        "seed": report.seed,
    }


def cmd_split(args) -> None:
    data = load_csv(args.input, label_column=args.label_col, target=args.target)
    result = one_class_split(data, args.seed)
    os.makedirs(args.out_dir, exist_ok=True)
    save_csv(result.train, os.path.join(args.out_dir, "train.csv"))
    save_csv(result.test, os.path.join(args.out_dir, "test.csv"))
    save_csv(result.cv_outliers, os.path.join(args.out_dir, "cvpool.csv"))
    manifest = {
        "seed": args.seed,
        "label_column": args.label_col,
        "target": args.target,
        "counts": {
            "train": result.train.n_rows,
            "test": result.test.n_rows,
            "cv_outliers": result.cv_outliers.n_rows,
        },
    }
    atomic_write_text(
        os.path.join(args.out_dir, "split_manifest.json"),
        json.dumps(manifest, indent=2) + "\n",
    )
    print(
        f"train {result.train.n_rows} rows, test {result.test.n_rows} rows, "
        f"cvpool {result.cv_outliers.n_rows} rows -> {args.out_dir}"
    )


def cmd_resample(args) -> None:
    series, fault_time = load_telemetry_export(args.manifest)
    data = resample_alfa(series, fault_time, interval=args.interval, seed=args.seed)
    save_csv(data, args.out)
    print(f"{data.n_rows} rows x {data.n_features} features -> {args.out}")


def _ica_arg(args) -> int | None:
    # argparse maps a bare --ica to 0 (full dimension); absent stays None.
    if args.ica is not None and args.ica < 0:
        args.parser.error("--ica component count must be >= 1")
    return args.ica


def cmd_fit(args) -> None:
    if args.kernel == TGAK and args.T is None:
        args.parser.error("--kernel tgak requires --T")
    data = load_csv(args.train, label_column=args.label_col)
    if data.labels is not None and np.any(data.labels == -1):
        raise ValueError(
            f"{args.train}: training file contains outlier-labeled rows; "
            "run 'split' first and fit on its train.csv"
        )
    mf = fit_pipeline(
        data,
        kind=args.kernel,
        sigma=args.sigma,
        triangle=args.T,
        C=args.C,
        theta=args.theta,
        ica_components=_ica_arg(args),
        seed=args.seed,
        normalize_kernel=not args.unnormalized,
        fingerprint=_file_sha256(args.train),
    )
    save_model(mf, args.out)
    print(f"model on {mf.train_rows.shape[0]} rows -> {args.out}")


def cmd_predict(args) -> None:
    mf = load_model(args.model)
    batch = load_csv(args.batch, label_column=args.label_col)
    staged = _apply_transforms(mf, batch)
    model = _ockelm_model(mf)
    sv = ockelm.score(model, staged)
    labels = ockelm.predict(model, staged)
    lines = ["output,error,label"]
    for out, err, lab in zip(sv.outputs, sv.errors, labels):
        lines.append(f"{repr(float(out))},{repr(float(err))},{int(lab)}")
    atomic_write_text(args.out, "\n".join(lines) + "\n")
    print(f"{len(labels)} rows scored -> {args.out}")


def cmd_eval(args) -> None:
    mf = load_model(args.model)
    test = load_csv(args.test, label_column=args.label_col)
    staged = _apply_transforms(mf, test)
    hyper = {
        "kernel": mf.kernel.kind,
        "sigma": mf.kernel.sigma,
        "T": mf.kernel.triangle,
        "normalize": mf.kernel.normalize,
        "C": mf.C,
        "theta": mf.theta,
        "ica": None
        if mf.ica is None
        else {"n_components": mf.ica.n_components, "converged": mf.ica.converged},
    }
    report = evaluate(
        _ockelm_model(mf),
        staged,
        hyperparameters=hyper,
        seed=mf.provenance.get("seed"),
    )
    text = json.dumps(_report_to_dict(report), indent=2)
    print(text)
    if args.out:
        atomic_write_text(args.out, text + "\n")


def cmd_gridsearch(args) -> None:
    train = load_csv(args.train)
    cvpool = load_csv(args.cvpool, label_column=args.cvpool_label_col)
    grid = GridSpec.full() if args.grid == "full" else GridSpec.coarse()
    best, cells = grid_search(
        train,
        cvpool,
        grid,
        kind=args.kernel,
        use_ica=args.ica is not None,
        ica_components=None if args.ica in (None, 0) else args.ica,
        seed=args.seed,
    )
    cells_to_csv(cells, args.out)
    print(json.dumps(best, indent=2))
    if args.fit_out:
        mf = fit_pipeline(
            train,
            kind=args.kernel,
            sigma=best["sigma"],
            triangle=best["T"],
            C=best["C"],
            theta=grid.theta,
            ica_components=_ica_arg(args),
            seed=args.seed,
            fingerprint=_file_sha256(args.train),
            grid_cell={k: best[k] for k in ("T", "C", "sigma", "mean_f1")},
        )
        save_model(mf, args.fit_out)


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"{text!r} is not a positive number")
    return value


def _theta_value(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"theta must lie in (0, 1), got {text!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tgakelm",
        description="One-class anomaly detection with alignment kernels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("split", help="one-class train/test/cvpool split")
    p.add_argument("input", help="labeled CSV")
    p.add_argument("--label-col", required=True, help="name of the label column")
    p.add_argument("--target", required=True, help="label value mapped to +1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_split, parser=p)

    p = sub.add_parser("resample", help="bucket a telemetry export onto a fixed grid")
    p.add_argument("manifest", help="telemetry manifest JSON")
    p.add_argument("--interval", type=_positive_float, default=0.25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="labeled dataset CSV to write")
    p.set_defaults(func=cmd_resample, parser=p)

    p = sub.add_parser("fit", help="fit the pipeline and persist a model file")
    p.add_argument("train", help="training CSV (target rows only)")
    p.add_argument("--kernel", choices=(TGAK, RBF), default=TGAK)
    p.add_argument("--sigma", type=_positive_float, required=True)
    p.add_argument("--T", type=_positive_float, help="triangle width (tgak only)")
    p.add_argument("--C", type=_positive_float, required=True)
    p.add_argument("--theta", type=_theta_value, default=0.01)
    p.add_argument(
        "--ica",
        nargs="?",
        type=int,
        const=0,
        default=None,
        metavar="N",
        help="reconstruct features with ICA (N components; bare flag keeps all)",
    )
    p.add_argument("--unnormalized", action="store_true", help="skip kernel normalization")
    p.add_argument("--label-col", default=None, help="label column to drop, if present")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="model file to write")
    p.set_defaults(func=cmd_fit, parser=p)

    p = sub.add_parser("predict", help="score a batch with a saved model")
    p.add_argument("model")
    p.add_argument("batch", help="CSV of rows to score")
    p.add_argument("--label-col", default=None, help="label column to drop, if present")
    p.add_argument("--out", required=True, help="scores CSV to write")
    p.set_defaults(func=cmd_predict, parser=p)

    p = sub.add_parser("eval", help="evaluate a saved model on a labeled test set")
    p.add_argument("model")
    p.add_argument("test")
    p.add_argument("--label-col", default="label")
    p.add_argument("--out", default=None, help="also write the report JSON here")
    p.set_defaults(func=cmd_eval, parser=p)

    p = sub.add_parser("gridsearch", help="cross-validated hyperparameter search")
    p.add_argument("train", help="target-only training CSV")
    p.add_argument("cvpool", help="reserved outlier CSV")
    p.add_argument("--grid", choices=("full", "coarse"), default="full")
    p.add_argument("--kernel", choices=(TGAK, RBF), default=TGAK)
    p.add_argument(
        "--ica",
        nargs="?",
        type=int,
        const=0,
        default=None,
        metavar="N",
        help="search with ICA reconstruction (N components; bare flag keeps all)",
    )
    p.add_argument("--cvpool-label-col", default="label")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="per-cell CSV to write")
    p.add_argument("--fit-out", default=None, help="also fit the best cell and save here")
    p.set_defaults(func=cmd_gridsearch, parser=p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (ValueError, RuntimeError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def entrypoint() -> None:
    sys.exit(main())
