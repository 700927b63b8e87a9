"""
matgen.py
Test matrix factory: A = B D with unit-norm-column B of prescribed spectrum
and diagonal D, both drawn from the five classic diagonal modes.

Random streams: numpy PCG64 seeded by SeedSequence([seed, matrix_id]) and
spawned into four children in the fixed order W1, W2, D, Sigma.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from utils.dense_core import (
    U_HIGHER,
    DenseMatrix,
    DiagMatrix,
    Precision,
    cast,
    scale_columns,
)
from utils.errors import (
    InfeasibleSpectrum,
    InvalidMatrixId,
    InvalidMode,
    NoConvergence,
)
from utils.jacobi import onesided_jacobi_svd
from utils.metrics import estimate_kappa

logger = logging.getLogger(__name__)

# ---- CONFIGURATION ----
# matrix id -> (mode of D, mode of Sigma)
MATRIX_ID_MODES: Dict[int, Tuple[int, int]] = {
    1: (1, 2), 2: (1, 3), 3: (1, 4), 4: (1, 5),
    5: (2, 3), 6: (2, 4), 7: (2, 5),
    8: (3, 2), 9: (3, 4), 10: (3, 5),
    11: (4, 2), 12: (4, 3), 13: (4, 5),
    14: (5, 2), 15: (5, 3), 16: (5, 4),
}
STREAM_NAMES = ("W1", "W2", "D", "Sigma")
COLUMN_NORM_TOL = 4 * U_HIGHER


@dataclass(frozen=True)
class DiagMode:
    mode: int
    kappa: float

    def __post_init__(self):
        if self.mode not in (1, 2, 3, 4, 5):
            raise InvalidMode(self.mode)
        if not self.kappa >= 1:
            raise ValueError(f"kappa must be >= 1, got {self.kappa}")


@dataclass(frozen=True)
class TestMatrixSpec:
    """Recipe for one generated problem."""
    __test__ = False

    m: int
    n: int
    kappa_D: float
    kappa_B: float
    matrix_id: int
    seed: int

    def __post_init__(self):
        if self.n < 1 or self.m < self.n:
            raise ValueError(f"need m >= n >= 1, got m={self.m}, n={self.n}")
        if self.matrix_id not in MATRIX_ID_MODES:
            raise InvalidMatrixId(self.matrix_id)
        if not (self.kappa_D >= 1 and self.kappa_B >= 1):
            raise ValueError(f"condition numbers must be >= 1, got {self.kappa_D}, {self.kappa_B}")
        if self.seed < 0 or self.seed >= 2 ** 64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    @property
    def modes(self) -> Tuple[int, int]:
        return MATRIX_ID_MODES[self.matrix_id]


@dataclass(eq=False)
class GeneratedProblem:
    spec: TestMatrixSpec
    A: DenseMatrix
    B: DenseMatrix
    D: DiagMatrix
    sigma_ref: np.ndarray
    realized_kappa_B: float
    realized_kappa_A: float


def make_streams(seed: int, matrix_id: int) -> Dict[str, np.random.Generator]:
    """Independent PCG64 generators for W1, W2, D and Sigma."""
    children = np.random.SeedSequence([seed, matrix_id]).spawn(len(STREAM_NAMES))
    return {name: np.random.Generator(np.random.PCG64(child))
            for name, child in zip(STREAM_NAMES, children)}


def matrix_id_to_modes(matrix_id: int) -> Tuple[int, int]:
    """Return (mode_D, mode_Sigma) for a matrix id in 1..16."""
    try:
        return MATRIX_ID_MODES[matrix_id]
    except (KeyError, TypeError):
        raise InvalidMatrixId(matrix_id)


def diag_from_mode(dm: DiagMode, n: int, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """
    Diagonal entries in [1/kappa, 1] following one of the five modes.

    Args:
        dm: mode and condition number
        n: number of entries
        rng: generator for mode 5
    Returns:
        float64 array of n entries
    Raises:
        InvalidMode: mode outside 1..5
        ValueError: n < 2 for modes 3-4, or mode 5 without a generator
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    kappa = float(dm.kappa)
    i = np.arange(n, dtype=np.float64)
    if dm.mode == 1:
        d = np.full(n, 1.0 / kappa)
        d[0] = 1.0
    elif dm.mode == 2:
        d = np.ones(n)
        d[-1] = 1.0 / kappa
    elif dm.mode in (3, 4):
        if n < 2:
            raise ValueError(f"mode {dm.mode} needs n >= 2")
        if dm.mode == 3:
            d = kappa ** (-(i / (n - 1)))
        else:
            d = 1.0 - i / (n - 1) * (1.0 - 1.0 / kappa)
    elif dm.mode == 5:
        if rng is None:
            raise ValueError("mode 5 needs a random generator")
        d = kappa ** (-rng.uniform(0.0, 1.0, n))
    else:
        raise InvalidMode(dm.mode)
    return d


def haar_orthonormal(m: int, n: int, rng: np.random.Generator) -> DenseMatrix:
    """
    Haar-distributed m x n matrix with orthonormal columns: QR of a Gaussian
    matrix with the signs of R's diagonal absorbed into Q.

    The 1 x 1 case is sign-fixed to [[1]] and draws nothing from rng.
    """
    if n < 1 or m < n:
        raise ValueError(f"need m >= n >= 1, got m={m}, n={n}")
    if m == 1:
        return DenseMatrix(np.ones((1, 1)), Precision.HIGHER)
    q, r = np.linalg.qr(rng.standard_normal((m, n)))
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return DenseMatrix(q * signs[np.newaxis, :], Precision.HIGHER)


def _exact_column_norms(b: np.ndarray) -> np.ndarray:
    return np.array([math.sqrt(math.fsum(col * col)) for col in b.T])


def equilibrate_columns(b: np.ndarray) -> Tuple[np.ndarray, int]:
    """
    Drive every column norm of b to 1 with right-side Givens rotations, then
    rescale the residual rounding away.

    Each rotation pairs the column whose squared norm is farthest below 1 with
    the one farthest above and sets one of them to exactly unit norm; the sum
    of squared norms is invariant. Singular values are unchanged.

    Returns:
        (equilibrated copy of b, number of rotations)
    Raises:
        NoConvergence: more than n^2 rotations were needed
    """
    b = np.array(b, dtype=np.float64, order="F")
    m, n = b.shape
    # rotations cannot push a dot product below its rounding floor
    slack = 2.0 * m * U_HIGHER
    d = np.einsum("ij,ij->j", b, b)
    rotations = 0
    while True:
        dev = np.abs(d - 1.0)
        if dev.max() <= slack:
            break
        lo, hi = int(np.argmin(d)), int(np.argmax(d))
        if not (d[lo] - 1.0) * (d[hi] - 1.0) < 0:
            break
        if rotations >= n * n:
            raise NoConvergence(rotations, float(dev.max()))
        i, j = (lo, hi) if dev[lo] >= dev[hi] else (hi, lo)
        a_ii, a_jj = float(d[i]), float(d[j])
        a_ij = float(b[:, i] @ b[:, j])
        disc = a_ij * a_ij - (a_ii - 1.0) * (a_jj - 1.0)
        t = (a_ii - 1.0) / (a_ij + math.copysign(math.sqrt(disc), a_ij))
        c = 1.0 / math.sqrt(1.0 + t * t)
        s = c * t
        bi = b[:, i].copy()
        bj = b[:, j]
        b[:, i] = c * bi - s * bj
        b[:, j] = s * bi + c * bj
        d[i] = b[:, i] @ b[:, i]
        d[j] = b[:, j] @ b[:, j]
        rotations += 1
    b /= _exact_column_norms(b)[np.newaxis, :]
    return b, rotations


def unit_norm_column_matrix(sigma: np.ndarray, m: int, rng: np.random.Generator,
                            rng_right: Optional[np.random.Generator] = None) -> DenseMatrix:
    """
    m x n matrix with unit-norm columns and singular values proportional to sigma.

    sigma is rescaled so that the sum of squares equals n, then
    B = W1 diag(sigma) W2^T is equilibrated by Givens rotations.

    Args:
        sigma: positive target spectrum
        m: number of rows
        rng: generator for W1 (and W2 when rng_right is not given)
        rng_right: generator for W2
    Raises:
        InfeasibleSpectrum: a rescaled sigma_i^2 exceeds n
    """
    sigma = np.asarray(sigma, dtype=np.float64).reshape(-1)
    n = sigma.size
    if m < n:
        raise ValueError(f"need m >= n, got m={m}, n={n}")
    if not np.all(sigma > 0):
        raise ValueError("sigma must be strictly positive")
    scaled = sigma * math.sqrt(n / math.fsum(sigma * sigma))
    over = np.flatnonzero(scaled * scaled > n * (1.0 + 4 * U_HIGHER))
    if over.size:
        k = int(over[0])
        raise InfeasibleSpectrum(k + 1, float(scaled[k] ** 2))
    W1 = haar_orthonormal(m, n, rng)
    W2 = haar_orthonormal(n, n, rng_right if rng_right is not None else rng)
    b0 = (W1.data * scaled[np.newaxis, :]) @ W2.data.T
    b, rotations = equilibrate_columns(b0)
    logger.debug("unit-norm matrix %dx%d: %d equilibration rotations", m, n, rotations)
    return DenseMatrix(b, Precision.HIGHER)


def build_problem(spec: TestMatrixSpec) -> GeneratedProblem:
    """
    Realize a TestMatrixSpec. Pure function of the TestMatrixSpec.

    Returns:
        GeneratedProblem with A = cast(B D, Working) and reference singular
        values of B D from Higher-precision one-sided Jacobi.
    """
    mode_D, mode_sigma = spec.modes
    streams = make_streams(spec.seed, spec.matrix_id)
    d = diag_from_mode(DiagMode(mode_D, spec.kappa_D), spec.n, streams["D"])
    sigma_B = diag_from_mode(DiagMode(mode_sigma, spec.kappa_B), spec.n, streams["Sigma"])
    B = unit_norm_column_matrix(sigma_B, spec.m, streams["W1"], streams["W2"])
    D = DiagMatrix(d, Precision.HIGHER)
    BD = scale_columns(B, D)
    A = cast(BD, Precision.WORKING)
    sigma_ref = onesided_jacobi_svd(BD).sigma
    realized_kappa_B = estimate_kappa(B)
    return GeneratedProblem(
        spec=spec,
        A=A,
        B=B,
        D=D,
        sigma_ref=sigma_ref,
        realized_kappa_B=realized_kappa_B,
        realized_kappa_A=float(sigma_ref[0] / sigma_ref[-1]),
    )
