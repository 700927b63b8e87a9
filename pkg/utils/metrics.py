"""
metrics.py
Measured accuracy of a thin SVD (relative singular value error, orthogonality,
rowwise backward error) and the theoretical bounds it is checked against.
All arithmetic is carried out in Higher precision.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from utils.dense_core import (
    U_HIGHER,
    U_WORKING,
    DenseMatrix,
    Precision,
    cast,
    orth_error,
)
from utils.errors import ShapeMismatch
from utils.jacobi import SvdFactors, onesided_jacobi_svd
from utils.mp_thinsvd import EigensolverChoice

logger = logging.getLogger(__name__)

# ---- CONFIGURATION ----
ACCEPTANCE_CONSTANT = 100.0


@dataclass(frozen=True)
class BoundParams:
    """Constants of the rounding error model, one per step of the algorithm."""
    eps_M_h: float = 0.0
    eps_eig_h: float = 0.0
    eps_eigtol: float = 0.0
    eps_sqrt: float = 0.0
    eps_V: float = 0.0
    eps_U: float = 0.0
    eps_chol_h: float = 0.0
    eps_SVD: float = 0.0

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if not value >= 0:
                raise ValueError(f"{name} must be nonnegative, got {value}")

    @classmethod
    def defaults(cls, n: int) -> "BoundParams":
        """Dimensional defaults: n*u_h for Higher-precision steps, n*u for Working ones, n^2*u for the SVD of R."""
        return cls(
            eps_M_h=n * U_HIGHER,
            eps_eig_h=n * U_HIGHER,
            eps_eigtol=n * U_WORKING,
            eps_sqrt=n * U_WORKING,
            eps_V=n * U_WORKING,
            eps_U=n * U_WORKING,
            eps_chol_h=n * U_HIGHER,
            eps_SVD=n * n * U_WORKING,
        )


@dataclass(frozen=True)
class TheoreticalBounds:
    bound_sv: float
    bound_orth: float
    bound_backward: float
    eps_1: float
    assumption_ok: bool

    def as_tuple(self) -> Tuple[float, float, float]:
        return self.bound_sv, self.bound_orth, self.bound_backward


@dataclass
class MetricsReport:
    max_rel_sv_err: float
    orth_U: float
    orth_V: float
    rowwise_backward_max: float
    kappa_B_realized: float
    kappa_D: float
    bound_sv: float
    bound_orth: float
    bound_backward: float
    assumption_ok: bool
    zero_rows: int = 0


def theoretical_bounds(bp: BoundParams, n: int, kappa_B: float,
                       variant: Union[EigensolverChoice, str]) -> TheoreticalBounds:
    """
    Evaluate the singular value, orthogonality and backward error bounds.

    For GramCholSvd the eigensolver constants are first replaced by the ones the
    Cholesky + Working-precision SVD path implies; its sigma needs no square root.

    Args:
        bp: error constants
        n: number of columns
        kappa_B: condition number of the column-equilibrated factor
        variant: eigensolver the bounds describe
    Returns:
        TheoreticalBounds; assumption_ok is False when eps_1 > 1/2
    """
    variant = EigensolverChoice(variant)
    eps_M = bp.eps_M_h
    eps_eig = bp.eps_eig_h
    eps_eigtol = bp.eps_eigtol
    eps_sqrt = bp.eps_sqrt
    if variant is EigensolverChoice.GRAM_CHOL_SVD:
        eps_eig = 2 * n * (1 + n * eps_M) * bp.eps_chol_h
        eps_eigtol = 12 * (1 + n * eps_M) * (U_WORKING + (1 + U_WORKING) * bp.eps_SVD) * kappa_B
        eps_sqrt = 0.0
    growth = n * n * eps_M + eps_eig
    cast_terms = bp.eps_V + bp.eps_U * (1 + bp.eps_V)
    eps_1 = 2 * eps_eigtol + 2 * growth * kappa_B ** 2 + 4 * n * math.sqrt(n) * cast_terms * kappa_B
    bound_sv = 2 * eps_sqrt + 2 * eps_eigtol + 4 * growth * kappa_B ** 2
    if eps_sqrt < 0.5:
        bound_orth = (2 * math.sqrt(n) * eps_sqrt + n * eps_1) / (1 - 2 * eps_sqrt)
    else:
        bound_orth = math.inf
    bound_backward = math.sqrt(n) * cast_terms
    return TheoreticalBounds(
        bound_sv=bound_sv,
        bound_orth=bound_orth,
        bound_backward=bound_backward,
        eps_1=eps_1,
        assumption_ok=eps_1 <= 0.5,
    )


def max_rel_sv_error(computed: np.ndarray, reference: np.ndarray) -> float:
    """max_i |computed_i - reference_i| / reference_i in Higher precision."""
    computed = np.asarray(computed, dtype=np.float64).reshape(-1)
    reference = np.asarray(reference, dtype=np.float64).reshape(-1)
    if computed.size != reference.size:
        raise ShapeMismatch(f"{computed.size} computed vs {reference.size} reference values")
    if not np.all(reference > 0):
        raise ValueError("reference singular values must be positive")
    return float(np.max(np.abs(computed - reference) / reference))


def rowwise_backward_details(A: DenseMatrix, U: DenseMatrix, sigma: np.ndarray,
                             V: DenseMatrix) -> Tuple[float, int]:
    """
    Largest rowwise relative residual of U diag(sigma) V^T against A, plus the
    number of zero rows of A that were skipped.
    """
    m, n = A.shape
    sigma = np.asarray(sigma, dtype=np.float64).reshape(-1)
    if U.shape != (m, n) or V.shape != (n, n) or sigma.size != n:
        raise ShapeMismatch(
            f"A {m}x{n}, U {U.rows}x{U.cols}, sigma {sigma.size}, V {V.rows}x{V.cols}"
        )
    a = A.data.astype(np.float64)
    residual = (U.data.astype(np.float64) * sigma[np.newaxis, :]) @ V.data.astype(np.float64).T - a
    row_norms = np.linalg.norm(a, axis=1)
    residual_norms = np.linalg.norm(residual, axis=1)
    nonzero = row_norms > 0
    zero_rows = int(m - np.count_nonzero(nonzero))
    if zero_rows:
        logger.warning("Skipping %d zero rows in rowwise backward error", zero_rows)
    if not nonzero.any():
        return 0.0, zero_rows
    return float(np.max(residual_norms[nonzero] / row_norms[nonzero])), zero_rows


def rowwise_backward_error(A: DenseMatrix, U: DenseMatrix, sigma: np.ndarray, V: DenseMatrix) -> float:
    """max_i ||(U diag(sigma) V^T - A)(i,:)|| / ||A(i,:)||, zero rows skipped."""
    return rowwise_backward_details(A, U, sigma, V)[0]


def reference_svd(A: DenseMatrix) -> np.ndarray:
    """Singular values from Higher-precision one-sided Jacobi on cast(A, Higher)."""
    return onesided_jacobi_svd(cast(A, Precision.HIGHER)).sigma


def estimate_kappa(B: DenseMatrix) -> float:
    sigma = reference_svd(B)
    return float(sigma[0] / sigma[-1])


def acceptance_sv_limit(variant: str, kappa_B: float) -> float:
    """
    Implementation-constant accuracy limit. Variants whose eigensolver runs
    entirely in Higher precision get C(u + u_h k^2); variants that pass through
    a Working-precision SVD get C(u k + u_h k^2).
    """
    if variant in (EigensolverChoice.TWOSIDED_JACOBI.value,
                   EigensolverChoice.ONESIDED_JACOBI_GRAM.value):
        return ACCEPTANCE_CONSTANT * (U_WORKING + U_HIGHER * kappa_B ** 2)
    return ACCEPTANCE_CONSTANT * (U_WORKING * kappa_B + U_HIGHER * kappa_B ** 2)


def acceptance_orth_limit(variant: str, n: int, kappa_B: float) -> float:
    return ACCEPTANCE_CONSTANT * (math.sqrt(n) * U_WORKING + n * acceptance_sv_limit(variant, kappa_B))


def acceptance_orth_V_limit(variant: str, n: int) -> float:
    """V cast once from Higher precision, or computed by Working-precision Jacobi."""
    if variant in (EigensolverChoice.TWOSIDED_JACOBI.value,
                   EigensolverChoice.ONESIDED_JACOBI_GRAM.value):
        return ACCEPTANCE_CONSTANT * n * U_HIGHER + n * U_WORKING
    return ACCEPTANCE_CONSTANT * n * U_WORKING


def acceptance_backward_limit(n: int) -> float:
    return ACCEPTANCE_CONSTANT * math.sqrt(n) * U_WORKING


def cross_solver_limit(kappa_B: float) -> float:
    """Sum of the TwoSidedJacobi and GramCholSvd accuracy limits."""
    return (acceptance_sv_limit(EigensolverChoice.TWOSIDED_JACOBI.value, kappa_B)
            + acceptance_sv_limit(EigensolverChoice.GRAM_CHOL_SVD.value, kappa_B))


def build_metrics_report(A: DenseMatrix, factors: SvdFactors, reference: np.ndarray,
                         kappa_B: float, kappa_D: float,
                         variant: Optional[Union[EigensolverChoice, str]] = None,
                         bp: Optional[BoundParams] = None) -> MetricsReport:
    """
    Measure a factorization of A and evaluate the bounds for its variant.
    Comparators without a variant get NaN bounds.
    """
    backward, zero_rows = rowwise_backward_details(A, factors.U, factors.sigma, factors.V)
    if variant is not None:
        bounds = theoretical_bounds(bp or BoundParams.defaults(A.cols), A.cols, kappa_B, variant)
    else:
        bounds = TheoreticalBounds(math.nan, math.nan, math.nan, math.nan, False)
    return MetricsReport(
        max_rel_sv_err=max_rel_sv_error(factors.sigma, reference),
        orth_U=orth_error(factors.U),
        orth_V=orth_error(factors.V),
        rowwise_backward_max=backward,
        kappa_B_realized=float(kappa_B),
        kappa_D=float(kappa_D),
        bound_sv=bounds.bound_sv,
        bound_orth=bounds.bound_orth,
        bound_backward=bounds.bound_backward,
        assumption_ok=bounds.assumption_ok,
        zero_rows=zero_rows,
    )
