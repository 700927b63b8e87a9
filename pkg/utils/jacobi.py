"""
jacobi.py
One-sided Jacobi SVD and two-sided cyclic Jacobi eigensolver.

Both kernels run entirely in the precision of their input and use
cyclic-by-rows pair ordering, so a sweep visits n(n-1)/2 pairs.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from utils.dense_core import DenseMatrix, Precision, col_norms
from utils.errors import NoConvergence, NotPositiveDefinite, ShapeMismatch

logger = logging.getLogger(__name__)

DEFAULT_MAX_SWEEPS = 30


@dataclass(frozen=True)
class JacobiConfig:
    """
    Stopping rule for the Jacobi kernels.

    tol is the threshold on the normalized off-diagonal quantity. When left
    unset it defaults to max(n, sqrt(m)) * u(precision), i.e. n * u for
    square inputs and for any input with m <= n^2. Above that (direct Jacobi
    on a very tall A) the default departs from the plain n * u rule and grows
    with sqrt(m), which stays above the rounding floor of an m-term dot
    product. Pass tol=n * u to get the plain rule.
    """
    tol: Optional[float] = None
    max_sweeps: int = DEFAULT_MAX_SWEEPS

    def __post_init__(self):
        if self.tol is not None and not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_sweeps < 1:
            raise ValueError(f"max_sweeps must be >= 1, got {self.max_sweeps}")

    def threshold(self, m: int, n: int, precision: Precision) -> float:
        if self.tol is not None:
            return self.tol
        return max(n, math.sqrt(m)) * precision.unit_roundoff


@dataclass(eq=False)
class SvdFactors:
    """A = U diag(sigma) V^T with sigma descending."""
    U: DenseMatrix
    sigma: np.ndarray
    V: DenseMatrix
    precision: Precision
    sweeps: int = 0


@dataclass(eq=False)
class EigFactors:
    """M = V diag(eigenvalues) V^T with eigenvalues descending."""
    V: DenseMatrix
    eigenvalues: np.ndarray
    precision: Precision
    sweeps: int = 0


def canonical_order(values: np.ndarray, V: np.ndarray,
                    U: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray, Optional[np.ndarray]]:
    """
    Sort values descending (stable) and fix signs so that the largest-magnitude
    entry of every V column is nonnegative, lowest row index winning ties.
    U columns follow the same permutation and signs.
    """
    order = np.argsort(-values, kind="stable")
    values = values[order]
    V = V[:, order]
    if U is not None:
        U = U[:, order]
    pivots = np.argmax(np.abs(V), axis=0)
    flip = V[pivots, np.arange(V.shape[1])] < 0
    if flip.any():
        V[:, flip] = -V[:, flip]
        if U is not None:
            U[:, flip] = -U[:, flip]
    return values, np.asfortranarray(V), None if U is None else np.asfortranarray(U)


def _rotation(diff: float, gamma: float) -> Tuple[float, float, float]:
    # smaller root of t^2 + 2*zeta*t - 1 = 0
    zeta = diff / (2.0 * gamma)
    t = math.copysign(1.0, zeta) / (abs(zeta) + math.hypot(1.0, zeta))
    c = 1.0 / math.sqrt(1.0 + t * t)
    return t, c, c * t


def _rotate_columns(x: np.ndarray, i: int, j: int, c, s) -> None:
    xi = x[:, i].copy()
    xj = x[:, j]
    x[:, i] = c * xi - s * xj
    x[:, j] = s * xi + c * xj


def onesided_jacobi_svd(G: DenseMatrix, cfg: Optional[JacobiConfig] = None) -> SvdFactors:
    """
    One-sided Jacobi SVD in G's precision.

    Args:
        G: m x n matrix, m >= n, full column rank.
        cfg: stopping rule; defaults to JacobiConfig().

    Returns:
        SvdFactors with sigma descending and the V sign convention applied.

    Raises:
        ZeroColumn: G has an identically zero column.
        NoConvergence: the sweep budget ran out.
    """
    cfg = cfg or JacobiConfig()
    m, n = G.shape
    if m < n:
        raise ShapeMismatch(f"onesided_jacobi_svd needs rows >= cols, got {m}x{n}")
    col_norms(G)  # raises ZeroColumn
    precision = G.precision
    dtype = precision.dtype
    g = G.data.copy(order="F")
    v = np.eye(n, dtype=dtype, order="F")
    tol = cfg.threshold(m, n, precision)

    sweeps = 0
    max_off = 0.0
    for sweep in range(1, cfg.max_sweeps + 1):
        sweeps = sweep
        sq = np.einsum("ij,ij->j", g, g)
        rotations = 0
        max_off = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                gamma = float(g[:, i] @ g[:, j])
                if gamma == 0.0:
                    continue
                alpha = float(sq[i])
                beta = float(sq[j])
                off = abs(gamma) / (math.sqrt(alpha) * math.sqrt(beta))
                max_off = max(max_off, off)
                if off <= tol:
                    continue
                _, c, s = _rotation(beta - alpha, gamma)
                cd, sd = dtype.type(c), dtype.type(s)
                _rotate_columns(g, i, j, cd, sd)
                _rotate_columns(v, i, j, cd, sd)
                sq[i] = g[:, i] @ g[:, i]
                sq[j] = g[:, j] @ g[:, j]
                rotations += 1
        logger.debug("one-sided sweep %d: %d rotations, max off %.3e", sweep, rotations, max_off)
        if rotations == 0:
            break
    else:
        raise NoConvergence(cfg.max_sweeps, max_off)

    sigma = col_norms(DenseMatrix(g, precision)).entries
    u = g / sigma[np.newaxis, :]
    sigma, v, u = canonical_order(sigma, v, u)
    return SvdFactors(
        U=DenseMatrix(u, precision),
        sigma=sigma,
        V=DenseMatrix(v, precision),
        precision=precision,
        sweeps=sweeps,
    )


def twosided_jacobi_eig(M: DenseMatrix, cfg: Optional[JacobiConfig] = None) -> EigFactors:
    """
    Cyclic two-sided Jacobi eigensolver for symmetric positive definite M.

    A pair (p, q) is left alone once |m_pq| <= tol * sqrt(m_pp * m_qq).

    Raises:
        NotPositiveDefinite: a diagonal entry is, or becomes, nonpositive.
        NoConvergence: the sweep budget ran out.
    """
    cfg = cfg or JacobiConfig()
    if M.rows != M.cols:
        raise ShapeMismatch(f"twosided_jacobi_eig needs a square matrix, got {M.rows}x{M.cols}")
    n = M.rows
    precision = M.precision
    dtype = precision.dtype
    a = M.data.copy(order="F")
    v = np.eye(n, dtype=dtype, order="F")
    tol = cfg.threshold(n, n, precision)

    bad = np.flatnonzero(~(np.diag(a) > 0))
    if bad.size:
        raise NotPositiveDefinite(int(bad[0]) + 1, "nonpositive diagonal entry")

    sweeps = 0
    max_off = 0.0
    for sweep in range(1, cfg.max_sweeps + 1):
        sweeps = sweep
        rotations = 0
        max_off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = float(a[p, q])
                if apq == 0.0:
                    continue
                app = float(a[p, p])
                aqq = float(a[q, q])
                off = abs(apq) / (math.sqrt(app) * math.sqrt(aqq))
                max_off = max(max_off, off)
                if off <= tol:
                    continue
                t, c, s = _rotation(aqq - app, apq)
                cd, sd = dtype.type(c), dtype.type(s)
                _rotate_columns(a, p, q, cd, sd)
                a[p, :] = a[:, p]
                a[q, :] = a[:, q]
                new_pp = app - t * apq
                new_qq = aqq + t * apq
                a[p, p] = new_pp
                a[q, q] = new_qq
                a[p, q] = 0
                a[q, p] = 0
                if not a[p, p] > 0:
                    raise NotPositiveDefinite(p + 1, "diagonal became nonpositive")
                if not a[q, q] > 0:
                    raise NotPositiveDefinite(q + 1, "diagonal became nonpositive")
                _rotate_columns(v, p, q, cd, sd)
                rotations += 1
        logger.debug("two-sided sweep %d: %d rotations, max off %.3e", sweep, rotations, max_off)
        if rotations == 0:
            break
    else:
        raise NoConvergence(cfg.max_sweeps, max_off)

    eigenvalues, v, _ = canonical_order(np.diag(a).copy(), v)
    return EigFactors(
        V=DenseMatrix(v, precision),
        eigenvalues=eigenvalues,
        precision=precision,
        sweeps=sweeps,
    )
