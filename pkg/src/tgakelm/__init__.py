"""One-class anomaly detection: alignment-kernel extreme learning machine
with ICA feature reconstruction and a seeded evaluation harness."""

from .dataset import (
    ALFA_FEATURES,
    Dataset,
    NormStats,
    SplitResult,
    TelemetrySeries,
    load_csv,
    load_telemetry_export,
    one_class_split,
    resample_alfa,
    save_csv,
    zscore_apply,
    zscore_fit,
)
from .evaluation import EvalReport, GridSpec, evaluate, f1_from_counts, grid_search
from .fastica import IcaConfig, IcaTransform, contrast_eval, ica_fit, ica_transform
from .kernels import (
    RBF,
    TGAK,
    AlignmentPath,
    KernelSpec,
    dtw,
    enumerate_alignments,
    gak,
    gak_reference,
    gram,
    rbf,
    tgak_local,
    triangular_weight,
)
from .ockelm import OckelmModel, ScoreVector, fit, predict, score, threshold

__all__ = [
    "ALFA_FEATURES",
    "AlignmentPath",
    "Dataset",
    "EvalReport",
    "GridSpec",
    "IcaConfig",
    "IcaTransform",
    "KernelSpec",
    "NormStats",
    "OckelmModel",
    "RBF",
    "ScoreVector",
    "SplitResult",
    "TGAK",
    "TelemetrySeries",
    "contrast_eval",
    "dtw",
    "enumerate_alignments",
    "evaluate",
    "f1_from_counts",
    "fit",
    "gak",
    "gak_reference",
    "gram",
    "grid_search",
    "ica_fit",
    "ica_transform",
    "load_csv",
    "load_telemetry_export",
    "one_class_split",
    "predict",
    "rbf",
    "resample_alfa",
    "save_csv",
    "score",
    "tgak_local",
    "threshold",
    "triangular_weight",
    "zscore_apply",
    "zscore_fit",
]
