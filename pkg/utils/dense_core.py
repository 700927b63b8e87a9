"""
dense_core.py
Precision-aware dense matrices and the basic kernels the thin SVD composes:
casts, the Gram product, Cholesky, column norms and scaling, orthogonality error.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Union

import numpy as np

from utils.errors import (
    CastOverflowError,
    DivisionByZero,
    NotPositiveDefinite,
    ShapeMismatch,
    ZeroColumn,
)

logger = logging.getLogger(__name__)

# ---- CONFIGURATION ----
U_WORKING = 2.0 ** -24
U_HIGHER = 2.0 ** -53
# Upper bound on the number of product terms materialized per Gram chunk
GRAM_CHUNK_ENTRIES = 1 << 20


class Precision(Enum):
    """IEEE precisions used by the mixed precision algorithms."""
    WORKING = "working"
    HIGHER = "higher"

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(np.float32) if self is Precision.WORKING else np.dtype(np.float64)

    @property
    def unit_roundoff(self) -> float:
        return U_WORKING if self is Precision.WORKING else U_HIGHER

    @property
    def tag(self) -> str:
        return self.value

    @classmethod
    def from_tag(cls, tag: str) -> "Precision":
        try:
            return cls(tag.strip().lower())
        except ValueError:
            raise ValueError(f"Unknown precision tag: {tag!r}")

    @classmethod
    def from_dtype(cls, dtype) -> "Precision":
        dtype = np.dtype(dtype)
        if dtype == np.float32:
            return cls.WORKING
        if dtype == np.float64:
            return cls.HIGHER
        raise ValueError(f"No precision for dtype {dtype}")


@dataclass(eq=False)
class DenseMatrix:
    """
    Column-major dense real matrix in a declared precision.
    The array dtype must already match the precision; use cast() to convert.
    """
    data: np.ndarray
    precision: Precision

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 2:
            raise ValueError(f"DenseMatrix needs a 2-D array, got ndim={arr.ndim}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"DenseMatrix dimensions must be positive, got {arr.shape}")
        if arr.dtype != self.precision.dtype:
            if arr.dtype.kind in "iub":
                arr = arr.astype(self.precision.dtype)
            else:
                raise ValueError(
                    f"dtype {arr.dtype} does not match precision {self.precision.tag}; use cast()"
                )
        if not np.all(np.isfinite(arr)):
            raise ValueError("DenseMatrix entries must be finite")
        self.data = np.asfortranarray(arr)

    @classmethod
    def from_values(cls, values: Union[Sequence, np.ndarray], precision: Precision) -> "DenseMatrix":
        """Build a matrix from literal values, rounding them into the precision."""
        return cls(np.array(values, dtype=precision.dtype, order="F", ndmin=2), precision)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self):
        return self.data.shape

    def copy(self) -> "DenseMatrix":
        return DenseMatrix(self.data.copy(order="F"), self.precision)

    def __repr__(self) -> str:
        return f"DenseMatrix({self.rows}x{self.cols}, {self.precision.tag})"


@dataclass(eq=False)
class DiagMatrix:
    """Diagonal matrix stored as its n entries."""
    entries: np.ndarray
    precision: Precision

    def __post_init__(self):
        arr = np.asarray(self.entries)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("DiagMatrix needs a non-empty 1-D array")
        if arr.dtype != self.precision.dtype:
            if arr.dtype.kind in "iub":
                arr = arr.astype(self.precision.dtype)
            else:
                raise ValueError(
                    f"dtype {arr.dtype} does not match precision {self.precision.tag}; use cast()"
                )
        if not np.all(np.isfinite(arr)):
            raise ValueError("DiagMatrix entries must be finite")
        self.entries = arr

    @classmethod
    def from_values(cls, values: Union[Sequence, np.ndarray], precision: Precision) -> "DiagMatrix":
        return cls(np.array(values, dtype=precision.dtype).reshape(-1), precision)

    @property
    def n(self) -> int:
        return self.entries.size

    def is_positive(self) -> bool:
        return bool(np.all(self.entries > 0))

    def __repr__(self) -> str:
        return f"DiagMatrix(n={self.n}, {self.precision.tag})"


def _cast_values(values: np.ndarray, target: Precision) -> np.ndarray:
    if values.dtype == target.dtype:
        return values.copy()
    if target is Precision.HIGHER:
        return values.astype(np.float64)
    with np.errstate(over="ignore"):
        out = values.astype(np.float32)
    overflow = np.isinf(out) & np.isfinite(values)
    if overflow.any():
        index = tuple(int(i) for i in np.argwhere(overflow)[0])
        row, col = (index + (0,))[:2] if len(index) == 1 else index
        raise CastOverflowError(row + 1, col + 1, float(values[index]))
    return out


def cast(A: Union[DenseMatrix, DiagMatrix], target: Precision) -> Union[DenseMatrix, DiagMatrix]:
    """
    Convert a matrix to the target precision.

    Working -> Higher is exact; Higher -> Working rounds to nearest even.

    Raises:
        CastOverflowError: an entry exceeds the working-precision range.
    """
    if isinstance(A, DiagMatrix):
        return DiagMatrix(_cast_values(A.entries, target), target)
    return DenseMatrix(np.asfortranarray(_cast_values(A.data, target)), target)


def cast_vector(values: np.ndarray, target: Precision) -> np.ndarray:
    """cast() for bare 1-D arrays such as singular values."""
    return _cast_values(np.asarray(values), target)


def gram_array(a: np.ndarray) -> np.ndarray:
    """
    Upper triangle of a^T a mirrored to a full symmetric array.

    Each entry is accumulated in ascending row order in a's own dtype, so the
    result is bitwise equal to a naive loop `s += a[k, i] * a[k, j]` over k.
    """
    m, n = a.shape
    iu, ju = np.triu_indices(n)
    pairs = iu.size
    chunk = max(1, GRAM_CHUNK_ENTRIES // pairs)
    acc = np.zeros(pairs, dtype=a.dtype)
    for start in range(0, m, chunk):
        block = a[start:start + chunk]
        terms = block[:, iu] * block[:, ju]
        terms[0] += acc
        # accumulate is strictly sequential along the axis
        acc = np.add.accumulate(terms, axis=0)[-1]
    out = np.empty((n, n), dtype=a.dtype, order="F")
    out[iu, ju] = acc
    out[ju, iu] = acc
    return out


def gram(A: DenseMatrix) -> DenseMatrix:
    """Return M = A^T A in A's precision, exactly symmetric."""
    return DenseMatrix(gram_array(A.data), A.precision)


def cholesky(M: DenseMatrix) -> DenseMatrix:
    """
    Right-looking unblocked Cholesky factorization M = R^T R.

    Args:
        M: symmetric n x n matrix.

    Returns:
        Upper-triangular R with positive diagonal, in M's precision.

    Raises:
        NotPositiveDefinite: pivot k (1-based) is not positive.
    """
    if M.rows != M.cols:
        raise ShapeMismatch(f"cholesky needs a square matrix, got {M.rows}x{M.cols}")
    n = M.rows
    work = M.data.copy(order="F")
    r = np.zeros_like(work)
    for k in range(n):
        pivot = work[k, k]
        if not pivot > 0:
            raise NotPositiveDefinite(k + 1, f"pivot value {float(pivot):.3e}")
        rkk = np.sqrt(pivot)
        r[k, k] = rkk
        if k + 1 < n:
            row = work[k, k + 1:] / rkk
            r[k, k + 1:] = row
            work[k + 1:, k + 1:] -= np.outer(row, row)
    return DenseMatrix(r, M.precision)


def col_norms(A: DenseMatrix) -> DiagMatrix:
    """
    Euclidean column norms with max-scaling so squares never overflow.

    Raises:
        ZeroColumn: a column is identically zero.
    """
    a = A.data
    scale = np.max(np.abs(a), axis=0)
    zero = np.flatnonzero(scale == 0)
    if zero.size:
        raise ZeroColumn(int(zero[0]) + 1)
    scaled = a / scale
    norms = scale * np.sqrt(np.sum(scaled * scaled, axis=0))
    return DiagMatrix(norms.astype(A.precision.dtype, copy=False), A.precision)


def scale_columns(A: DenseMatrix, s: DiagMatrix, invert: bool = False) -> DenseMatrix:
    """
    Multiply column j of A by s_j, or divide by s_j when invert is set.
    The scale is rounded into A's precision first.
    """
    if s.n != A.cols:
        raise ShapeMismatch(f"scale has {s.n} entries for {A.cols} columns")
    factors = s.entries.astype(A.precision.dtype)
    if invert:
        zero = np.flatnonzero(factors == 0)
        if zero.size:
            raise DivisionByZero(int(zero[0]) + 1)
        out = A.data / factors[np.newaxis, :]
    else:
        out = A.data * factors[np.newaxis, :]
    return DenseMatrix(out, A.precision)


def orth_error(Q: DenseMatrix) -> float:
    """Frobenius norm of Q^T Q - I, accumulated in Higher precision."""
    if Q.rows < Q.cols:
        raise ShapeMismatch(f"orth_error needs rows >= cols, got {Q.rows}x{Q.cols}")
    q = Q.data.astype(np.float64)
    residual = q.T @ q - np.eye(Q.cols)
    return float(np.linalg.norm(residual, "fro"))
