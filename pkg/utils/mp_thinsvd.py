"""
mp_thinsvd.py
Mixed precision thin SVD of tall-and-skinny matrices through the Gram matrix,
the Cholesky-based Gram eigensolver, mixed precision Cholesky QR, and the
QR-based and LAPACK comparators.
"""
import logging
import os
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, Iterator, Optional, Tuple, Union

import numpy as np
import scipy.linalg

from utils.dense_core import (
    DenseMatrix,
    DiagMatrix,
    Precision,
    cast,
    cast_vector,
    cholesky,
    gram,
    scale_columns,
)
from utils.errors import NotPositiveDefinite, ShapeMismatch, TinySingularValue
from utils.jacobi import (
    JacobiConfig,
    SvdFactors,
    canonical_order,
    onesided_jacobi_svd,
    twosided_jacobi_eig,
)
from utils.parallel_gram import SyncCounter, partitioned_gram

logger = logging.getLogger(__name__)

# ---- CONFIGURATION ----
# Fixed logical block count of the Gram phase; numerics never depend on --threads
DEFAULT_GRAM_BLOCKS = int(os.environ.get("THINSVD_GRAM_BLOCKS", "8"))


class EigensolverChoice(Enum):
    """Spectral decomposition used on the Higher-precision Gram matrix."""
    TWOSIDED_JACOBI = "twosided-jacobi"
    GRAM_CHOL_SVD = "gram-chol-svd"
    ONESIDED_JACOBI_GRAM = "onesided-jacobi-gram"


class PhaseTimer:
    """
    Wall-clock phase breakdown on a monotonic clock.
    Whatever falls outside the named phases is reported as overlap.
    """

    def __init__(self):
        self.phases: Dict[str, float] = {}
        self._start = time.perf_counter()

    @contextmanager
    def phase(self, name: str) -> Iterator[None]:
        start = time.perf_counter()
        try:
            yield
        finally:
            self.phases[name] = self.phases.get(name, 0.0) + time.perf_counter() - start

    def finish(self) -> Dict[str, float]:
        elapsed = time.perf_counter() - self._start
        named = sum(self.phases.values())
        timings = dict(self.phases)
        timings["overlap"] = max(elapsed - named, 0.0)
        timings["total"] = named + timings["overlap"]
        return timings


@dataclass(eq=False)
class ThinSvdResult:
    factors: SvdFactors
    method: str
    eigensolver: Optional[EigensolverChoice] = None
    timings: Dict[str, float] = field(default_factory=dict)
    sync_count: int = 0


def _require_working(A: DenseMatrix, name: str) -> None:
    if A.precision is not Precision.WORKING:
        raise ValueError(f"{name} expects a working-precision matrix, got {A.precision.tag}")
    if A.rows < A.cols:
        raise ShapeMismatch(f"{name} needs rows >= cols, got {A.rows}x{A.cols}")


def _check_tiny(sigma: np.ndarray) -> None:
    tiny = np.finfo(np.float32).tiny
    small = np.flatnonzero(~(sigma >= tiny))
    if small.size:
        k = int(small[0])
        raise TinySingularValue(k + 1, float(sigma[k]))


def _gram_chol_factors(M_h: DenseMatrix, cfg: JacobiConfig) -> SvdFactors:
    try:
        R_h = cholesky(M_h)
    except NotPositiveDefinite as e:
        raise NotPositiveDefinite(
            e.pivot, "condition number too large for chosen higher precision"
        ) from e
    R = cast(R_h, Precision.WORKING)
    return onesided_jacobi_svd(R, cfg)


def gram_chol_eigensolver(M_h: DenseMatrix, cfg: Optional[JacobiConfig] = None) -> Tuple[DenseMatrix, np.ndarray]:
    """
    Mixed precision eigensolver for a Gram matrix.

    Cholesky in Higher precision, cast of R to Working, then one-sided Jacobi
    on R in Working. The left factor of R is discarded.

    Args:
        M_h: symmetric positive definite Gram matrix in Higher precision
        cfg: Jacobi stopping rule
    Returns:
        (V, sigma) in Working precision; sigma are the singular values of R
    Raises:
        NotPositiveDefinite: Cholesky broke down
        NoConvergence: the Jacobi sweep budget ran out
    """
    if M_h.precision is not Precision.HIGHER:
        raise ValueError("gram_chol_eigensolver expects a higher-precision Gram matrix")
    factors = _gram_chol_factors(M_h, cfg or JacobiConfig())
    return factors.V, factors.sigma


def mp_thin_svd(A: DenseMatrix,
                choice: Union[EigensolverChoice, str] = EigensolverChoice.TWOSIDED_JACOBI,
                cfg: Optional[JacobiConfig] = None,
                threads: int = 1,
                gram_blocks: Optional[int] = None,
                counter: Optional[SyncCounter] = None) -> ThinSvdResult:
    """
    Mixed precision thin SVD based on the Gram matrix.

    Steps: cast A to Higher, M_h = A_h^T A_h, spectral decomposition of M_h,
    sigma = sqrt(eigenvalues) and V cast to Working, U = A (V Sigma^-1) in Working.

    Args:
        A: m x n working-precision matrix, m >= n, full column rank
        choice: eigensolver applied to M_h
        cfg: Jacobi stopping rule
        threads: workers for the Gram phase
        gram_blocks: logical block count of the Gram phase (default DEFAULT_GRAM_BLOCKS)
        counter: optional synchronization counter
    Returns:
        ThinSvdResult with working-precision factors and phase timings
    Raises:
        NotPositiveDefinite, NoConvergence, ZeroColumn, TinySingularValue
    """
    _require_working(A, "mp_thin_svd")
    choice = EigensolverChoice(choice)
    cfg = cfg or JacobiConfig()
    counter = counter if counter is not None else SyncCounter()
    timer = PhaseTimer()

    A_h = cast(A, Precision.HIGHER)
    with timer.phase("gram"):
        M_h = partitioned_gram(
            A_h,
            max(1, min(threads, A.rows)),
            num_blocks=gram_blocks or DEFAULT_GRAM_BLOCKS,
            counter=counter,
        )

    with timer.phase("eigen"):
        if choice is EigensolverChoice.GRAM_CHOL_SVD:
            svd_R = _gram_chol_factors(M_h, cfg)
            V, sigma, sweeps = svd_R.V, svd_R.sigma, svd_R.sweeps
        else:
            if choice is EigensolverChoice.TWOSIDED_JACOBI:
                eig = twosided_jacobi_eig(M_h, cfg)
                eigenvalues, V_h, sweeps = eig.eigenvalues, eig.V, eig.sweeps
            else:
                svd_M = onesided_jacobi_svd(M_h, cfg)
                eigenvalues, V_h, sweeps = svd_M.sigma, svd_M.V, svd_M.sweeps
            sigma = cast_vector(np.sqrt(eigenvalues), Precision.WORKING)
            V = cast(V_h, Precision.WORKING)

    _check_tiny(sigma)
    with timer.phase("compute_U"):
        W = scale_columns(V, DiagMatrix(sigma, Precision.WORKING), invert=True)
        U = DenseMatrix(A.data @ W.data, Precision.WORKING)

    timings = timer.finish()
    logger.debug("mp_thin_svd[%s] %dx%d: %s", choice.value, A.rows, A.cols, timings)
    return ThinSvdResult(
        factors=SvdFactors(U=U, sigma=sigma, V=V, precision=Precision.WORKING, sweeps=sweeps),
        method=choice.value,
        eigensolver=choice,
        timings=timings,
        sync_count=counter.events,
    )


def substitute_rows(a: np.ndarray, r: np.ndarray) -> np.ndarray:
    """
    Solve Q R = A for Q one column at a time, i.e. row-wise substitution
    against the upper-triangular R, in the arrays' dtype.
    """
    m, n = a.shape
    q = np.empty((m, n), dtype=a.dtype, order="F")
    for j in range(n):
        residual = a[:, j] - q[:, :j] @ r[:j, j]
        q[:, j] = residual / r[j, j]
    return q


def mp_cholesky_qr(A: DenseMatrix) -> Tuple[DenseMatrix, DenseMatrix]:
    """
    Mixed precision Cholesky QR: Gram and Cholesky in Higher precision, R cast
    to Working, Q from Q R = A in Working precision.

    Raises:
        NotPositiveDefinite: Cholesky broke down
    """
    _require_working(A, "mp_cholesky_qr")
    M_h = gram(cast(A, Precision.HIGHER))
    R = cast(cholesky(M_h), Precision.WORKING)
    Q = substitute_rows(A.data, R.data)
    return DenseMatrix(Q, Precision.WORKING), R


def cholesky_qr(A: DenseMatrix) -> Tuple[DenseMatrix, DenseMatrix]:
    """
    Cholesky QR with every step in A's own precision. Orthogonality degrades
    like u * kappa(B)^2, the contrast case for mp_cholesky_qr.
    """
    if A.rows < A.cols:
        raise ShapeMismatch(f"cholesky_qr needs rows >= cols, got {A.rows}x{A.cols}")
    R = cholesky(gram(A))
    return DenseMatrix(substitute_rows(A.data, R.data), A.precision), R


def householder_vector(x: np.ndarray) -> Tuple[float, np.ndarray]:
    """Reflector (beta, v) with v[0] = 1 such that (I - beta v v^T) x is a multiple of e_1."""
    v = x.copy()
    v[0] = 1
    head = x[0]
    sigma = x[1:] @ x[1:]
    if not sigma:
        return x.dtype.type(0), v
    mu = np.sqrt(head * head + sigma)
    if head <= 0:
        vhead = head - mu
    else:
        vhead = -sigma / (head + mu)
    vhead2 = vhead * vhead
    beta = 2 * vhead2 / (sigma + vhead2)
    v[1:] /= vhead
    return beta, v


def householder_qr(A: DenseMatrix) -> Tuple[DenseMatrix, DenseMatrix]:
    """
    Column-by-column Householder QR in A's precision with explicit thin Q.

    Returns:
        (Q m x n, R n x n upper triangular)
    """
    m, n = A.shape
    if m < n:
        raise ShapeMismatch(f"householder_qr needs rows >= cols, got {m}x{n}")
    work = A.data.copy(order="F")
    reflectors = []
    for j in range(n):
        beta, v = householder_vector(work[j:, j])
        if beta:
            w = beta * (v @ work[j:, j:])
            work[j:, j:] -= np.outer(v, w)
        reflectors.append((beta, v))
    q = np.eye(m, n, dtype=work.dtype, order="F")
    for j in reversed(range(n)):
        beta, v = reflectors[j]
        if beta:
            w = beta * (v @ q[j:, j:])
            q[j:, j:] -= np.outer(v, w)
    r = np.triu(work[:n, :n])
    return DenseMatrix(q, A.precision), DenseMatrix(r, A.precision)


def qr_thin_svd_baseline(A: DenseMatrix, cfg: Optional[JacobiConfig] = None) -> ThinSvdResult:
    """
    Thin SVD through Householder QR in Working precision, one-sided Jacobi on
    the n x n R, and U = Q U_R.
    """
    _require_working(A, "qr_thin_svd_baseline")
    cfg = cfg or JacobiConfig()
    timer = PhaseTimer()
    with timer.phase("qr"):
        Q, R = householder_qr(A)
    with timer.phase("svd"):
        svd_R = onesided_jacobi_svd(R, cfg)
    with timer.phase("compute_U"):
        U = DenseMatrix(Q.data @ svd_R.U.data, Precision.WORKING)
    return ThinSvdResult(
        factors=SvdFactors(U=U, sigma=svd_R.sigma, V=svd_R.V,
                           precision=Precision.WORKING, sweeps=svd_R.sweeps),
        method="qr-baseline",
        timings=timer.finish(),
    )


def jacobi_thin_svd(A: DenseMatrix, cfg: Optional[JacobiConfig] = None) -> ThinSvdResult:
    """One-sided Jacobi applied directly to A in Working precision."""
    _require_working(A, "jacobi_thin_svd")
    timer = PhaseTimer()
    with timer.phase("svd"):
        factors = onesided_jacobi_svd(A, cfg or JacobiConfig())
    return ThinSvdResult(factors=factors, method="jacobi-svd", timings=timer.finish())


def lapack_thin_svd(A: DenseMatrix, driver: str = "gesdd") -> ThinSvdResult:
    """
    Working-precision LAPACK SVD (gesvd or gesdd) through scipy, with the
    library's ordering and sign convention applied.
    """
    _require_working(A, "lapack_thin_svd")
    timer = PhaseTimer()
    with timer.phase("svd"):
        u, s, vt = scipy.linalg.svd(A.data, full_matrices=False, lapack_driver=driver,
                                    check_finite=False)
    sigma, v, u = canonical_order(s.astype(np.float32), vt.T.astype(np.float32),
                                  u.astype(np.float32))
    return ThinSvdResult(
        factors=SvdFactors(U=DenseMatrix(u, Precision.WORKING), sigma=sigma,
                           V=DenseMatrix(v, Precision.WORKING), precision=Precision.WORKING),
        method=f"lapack-{driver}",
        timings=timer.finish(),
    )


# ---- METHOD REGISTRY ----
SvdMethod = Callable[..., ThinSvdResult]

QR_BASELINE = "qr-baseline"
MIXED_METHODS = [choice.value for choice in EigensolverChoice]
COMPARATOR_METHODS = ["jacobi-svd", "lapack-gesvd", "lapack-gesdd"]
METHODS = MIXED_METHODS + [QR_BASELINE] + COMPARATOR_METHODS


def get_svd_method(name: str) -> SvdMethod:
    """
    Look up a thin SVD method by its CLI name.

    Every returned callable has the signature
    (A, cfg=None, threads=1, gram_blocks=None) -> ThinSvdResult.

    Raises:
        ValueError: unknown method name
    """
    key = name.strip().lower()
    if key in MIXED_METHODS:
        choice = EigensolverChoice(key)

        def run_mixed(A, cfg=None, threads=1, gram_blocks=None):
            return mp_thin_svd(A, choice, cfg, threads=threads, gram_blocks=gram_blocks)
        return run_mixed
    if key == QR_BASELINE:
        return lambda A, cfg=None, threads=1, gram_blocks=None: qr_thin_svd_baseline(A, cfg)
    if key == "jacobi-svd":
        return lambda A, cfg=None, threads=1, gram_blocks=None: jacobi_thin_svd(A, cfg)
    if key in ("lapack-gesvd", "lapack-gesdd"):
        driver = key.split("-", 1)[1]
        return lambda A, cfg=None, threads=1, gram_blocks=None: lapack_thin_svd(A, driver)
    raise ValueError(f"Unknown SVD method: {name} (choose from {', '.join(METHODS)})")
