"""Similarity functions.

Instances are treated as univariate sequences indexed by feature position,
so sequence kernels (DTW, global alignment) apply to fixed-length feature
vectors. The alignment kernel is evaluated exactly by dynamic programming
in log space; a brute-force path enumerator and a linear-space evaluator
are kept as independent cross-checks for small inputs.
"""

import math
from dataclasses import dataclass

import numpy as np
from numba import njit, prange
from scipy.spatial.distance import cdist

RBF = "rbf"
TGAK = "tgak"

# Brute-force enumeration is exponential in m + n; keep it oracle-sized.
_ENUM_GUARD = 12


@dataclass(frozen=True)
class KernelSpec:
    """Instance-similarity choice.

    kind "rbf": Gaussian kernel on whole feature vectors, width ``sigma``.
    kind "tgak": triangular global alignment kernel over the feature
    sequence; ``triangle`` is the position band width (offsets |i - j| >=
    triangle contribute nothing; ``math.inf`` disables truncation).
    ``normalize`` rescales sequence kernels so k(x, x) = 1.
    """

    kind: str
    sigma: float
    triangle: float | None = None
    normalize: bool = True

    def __post_init__(self):
        if self.kind not in (RBF, TGAK):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.kind == TGAK and (self.triangle is None or not self.triangle > 0):
            raise ValueError("tgak kernel requires triangle > 0")


def _as_vector(x) -> np.ndarray:
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-d sequence, got shape {v.shape}")
    if v.size == 0:
        raise ValueError("empty sequence")
    return np.ascontiguousarray(v)


def _as_matrix(rows) -> np.ndarray:
    m = np.asarray(getattr(rows, "rows", rows), dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d row matrix, got shape {m.shape}")
    return np.ascontiguousarray(m)


def rbf(x, y, sigma: float) -> float:
    """Gaussian kernel exp(-|x - y|^2 / (2 sigma^2)) on equal-length vectors."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    xv = np.asarray(x, dtype=np.float64)
    yv = np.asarray(y, dtype=np.float64)
    if xv.shape != yv.shape:
        raise ValueError(f"dimension mismatch: {xv.shape} vs {yv.shape}")
    d = xv - yv
    return float(math.exp(-np.dot(d.ravel(), d.ravel()) / (2.0 * sigma * sigma)))


def triangular_weight(i: int, j: int, triangle: float) -> float:
    """Position weight max(1 - |i - j| / triangle, 0) for 1-based indices."""
    if i < 1 or j < 1:
        raise ValueError("indices are 1-based")
    if not triangle > 0:
        raise ValueError(f"triangle must be positive, got {triangle}")
    return max(1.0 - abs(i - j) / triangle, 0.0)


def tgak_local(i: int, x_i, j: int, y_j, spec: KernelSpec) -> float:
    """Local alignment kernel t / (2 - t) with t = weight(i,j) * rbf(x_i, y_j).

    Lies in [0, 1]; exactly 0 once the position offset reaches the
    triangle width.
    """
    if spec.kind != TGAK:
        raise ValueError("tgak_local requires a tgak KernelSpec")
    w = triangular_weight(i, j, spec.triangle)
    if w == 0.0:
        return 0.0
    t = w * rbf(x_i, y_j, spec.sigma)
    return t / (2.0 - t)


@dataclass(frozen=True)
class AlignmentPath:
    """Monotone index walk from (1, 1) to (m, n), unit steps, 1-based."""

    pairs: tuple[tuple[int, int], ...]


def enumerate_alignments(m: int, n: int) -> list[AlignmentPath]:
    """All alignment paths between sequences of lengths m and n.

    Each step advances one or both indices by exactly one. Exponential in
    m + n; guarded to oracle sizes (m + n <= 12).
    """
    if m < 1 or n < 1:
        raise ValueError("lengths must be >= 1")
    if m + n > _ENUM_GUARD:
        raise ValueError(f"enumeration limited to m + n <= {_ENUM_GUARD}")
    paths: list[AlignmentPath] = []

    def walk(i: int, j: int, acc: list[tuple[int, int]]) -> None:
        if i == m and j == n:
            paths.append(AlignmentPath(tuple(acc)))
            return
        for di, dj in ((1, 0), (0, 1), (1, 1)):
            ii, jj = i + di, j + dj
            if ii <= m and jj <= n:
                acc.append((ii, jj))
                walk(ii, jj, acc)
                acc.pop()

    walk(1, 1, [(1, 1)])
    return paths


def dtw(x, y) -> float:
    """Dynamic time warping distance with squared-difference local cost."""
    xv = _as_vector(x)
    yv = _as_vector(y)
    m, n = xv.size, yv.size
    cost = (xv[:, None] - yv[None, :]) ** 2
    acc = np.full((m + 1, n + 1), np.inf)
    acc[0, 0] = 0.0
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            acc[i, j] = cost[i - 1, j - 1] + min(
                acc[i - 1, j], acc[i, j - 1], acc[i - 1, j - 1]
            )
    return float(acc[m, n])


@njit(cache=True)
def _lse3(a: float, b: float, c: float) -> float:
    m = a if a >= b else b
    if c > m:
        m = c
    if m == -math.inf:
        return -math.inf
    return m + math.log(math.exp(a - m) + math.exp(b - m) + math.exp(c - m))


@njit(cache=True)
def _log_pair_tgak(x, y, inv2sig2: float, triangle: float) -> float:
    # Sum over alignment paths of products of local kernels, in log space.
    # log kappa is formed as log(w) - z - log(2 - w e^{-z}) so tiny locals
    # stay representable even when w * e^{-z} underflows to zero.
    m = x.shape[0]
    n = y.shape[0]
    prev = np.full(n + 1, -math.inf)
    cur = np.empty(n + 1)
    prev[0] = 0.0
    for i in range(1, m + 1):
        cur[0] = -math.inf
        for j in range(1, n + 1):
            off = i - j if i >= j else j - i
            w = 1.0 - off / triangle
            if w <= 0.0:
                cur[j] = -math.inf
                continue
            d = x[i - 1] - y[j - 1]
            z = d * d * inv2sig2
            logk = math.log(w) - z - math.log(2.0 - w * math.exp(-z))
            s = _lse3(prev[j], cur[j - 1], prev[j - 1])
            cur[j] = -math.inf if s == -math.inf else logk + s
        tmp = prev
        prev = cur
        cur = tmp
    return prev[n]


@njit(cache=True)
def _log_pair_rbf(x, y, inv2sig2: float) -> float:
    m = x.shape[0]
    n = y.shape[0]
    prev = np.full(n + 1, -math.inf)
    cur = np.empty(n + 1)
    prev[0] = 0.0
    for i in range(1, m + 1):
        cur[0] = -math.inf
        for j in range(1, n + 1):
            d = x[i - 1] - y[j - 1]
            logk = -(d * d * inv2sig2)
            s = _lse3(prev[j], cur[j - 1], prev[j - 1])
            cur[j] = -math.inf if s == -math.inf else logk + s
        tmp = prev
        prev = cur
        cur = tmp
    return prev[n]


@njit(cache=True)
def _log_gram_tgak(A, B, inv2sig2: float, triangle: float, symmetric: bool):
    na = A.shape[0]
    nb = B.shape[0]
    out = np.empty((na, nb))
    for p in range(na):
        q0 = p if symmetric else 0
        for q in range(q0, nb):
            v = _log_pair_tgak(A[p], B[q], inv2sig2, triangle)
            out[p, q] = v
            if symmetric:
                out[q, p] = v
    return out


@njit(cache=True, parallel=True)
def _log_gram_tgak_par(A, B, inv2sig2: float, triangle: float, symmetric: bool):
    na = A.shape[0]
    nb = B.shape[0]
    out = np.empty((na, nb))
    for p in prange(na):
        q0 = p if symmetric else 0
        for q in range(q0, nb):
            v = _log_pair_tgak(A[p], B[q], inv2sig2, triangle)
            out[p, q] = v
            if symmetric:
                out[q, p] = v
    return out


@njit(cache=True)
def _log_self_tgak(A, inv2sig2: float, triangle: float):
    n = A.shape[0]
    out = np.empty(n)
    for p in range(n):
        out[p] = _log_pair_tgak(A[p], A[p], inv2sig2, triangle)
    return out


def _log_gak(x: np.ndarray, y: np.ndarray, spec: KernelSpec) -> float:
    inv2 = 1.0 / (2.0 * spec.sigma * spec.sigma)
    if spec.kind == TGAK:
        return float(_log_pair_tgak(x, y, inv2, float(spec.triangle)))
    return float(_log_pair_rbf(x, y, inv2))


def gak(x, y, spec: KernelSpec) -> float:
    """Global alignment kernel of two sequences.

    Sums, over every alignment path, the product of local kernel values:
    the tgak local kernel when spec.kind is "tgak", the plain Gaussian
    when "rbf". Evaluated by the exact recurrence
    M(i,j) = kappa(i,j) * (M(i-1,j) + M(i,j-1) + M(i-1,j-1)) accumulated in
    log space. With spec.normalize the result is divided by
    sqrt(gak(x,x) * gak(y,y)).
    """
    xv = _as_vector(x)
    yv = _as_vector(y)
    log_xy = _log_gak(xv, yv, spec)
    if not spec.normalize:
        return math.exp(log_xy)
    log_xx = _log_gak(xv, xv, spec)
    log_yy = _log_gak(yv, yv, spec)
    # Self kernels contain the all-diagonal path whose product is bounded
    # away from zero, so they can never vanish for these local kernels.
    if not (math.isfinite(log_xx) and math.isfinite(log_yy)):
        raise AssertionError("zero self-kernel in normalization")
    return math.exp(log_xy - 0.5 * (log_xx + log_yy))


def gak_reference(x, y, spec: KernelSpec) -> float:
    """Linear-space, unnormalized alignment kernel for small sequences.

    Kept independent of the log-space production path as a cross-check;
    unusable beyond modest lengths because path products underflow.
    """
    xv = _as_vector(x)
    yv = _as_vector(y)
    m, n = xv.size, yv.size
    M = np.zeros((m + 1, n + 1))
    M[0, 0] = 1.0
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            if spec.kind == TGAK:
                k = tgak_local(i, xv[i - 1], j, yv[j - 1], spec)
            else:
                k = rbf(xv[i - 1 : i], yv[j - 1 : j], spec.sigma)
            M[i, j] = k * (M[i - 1, j] + M[i, j - 1] + M[i - 1, j - 1])
    return float(M[m, n])


def gram(rows_a, rows_b, spec: KernelSpec, parallel: bool = True) -> np.ndarray:
    """Kernel matrix between two row sets (instances as length-d sequences).

    Entry (i, j) is gak(row_i, row_j, spec) for the tgak kind and
    rbf(row_i, row_j, sigma) for the rbf kind. Cells are independent, so
    assembly may run them concurrently; results are identical either way.
    """
    A = _as_matrix(rows_a)
    B = _as_matrix(rows_b)
    if A.shape[1] != B.shape[1]:
        raise ValueError(
            f"dimension mismatch: {A.shape[1]} vs {B.shape[1]} features"
        )
    if spec.kind == RBF:
        sq = cdist(A, B, "sqeuclidean")
        return np.exp(-sq / (2.0 * spec.sigma * spec.sigma))
    inv2 = 1.0 / (2.0 * spec.sigma * spec.sigma)
    tri = float(spec.triangle)
    symmetric = rows_a is rows_b or A is B
    fn = _log_gram_tgak_par if parallel else _log_gram_tgak
    logm = fn(A, B, inv2, tri, symmetric)
    if spec.normalize:
        if symmetric:
            log_a = np.diag(logm).copy()
            log_b = log_a
        else:
            log_a = _log_self_tgak(A, inv2, tri)
            log_b = _log_self_tgak(B, inv2, tri)
        logm = logm - 0.5 * (log_a[:, None] + log_b[None, :])
    return np.exp(logm)
