"""
errors.py
Exception hierarchy for the thin SVD library. Positions in payloads are 1-based.
"""
from typing import Optional


class ThinSvdError(Exception):
    """Base class for every error raised by the library."""
    pass


class CastOverflowError(ThinSvdError):
    """Custom exception for entries that overflow the target precision on a cast."""

    def __init__(self, row: int, col: int, value: float):
        self.row = row
        self.col = col
        self.value = value
        super().__init__(f"Entry ({row}, {col}) = {value!r} overflows working precision")


class NotPositiveDefinite(ThinSvdError):
    """Raised when a Cholesky pivot or a Jacobi diagonal entry is not positive."""

    def __init__(self, pivot: int, detail: Optional[str] = None):
        self.pivot = pivot
        message = f"Matrix is not positive definite (pivot {pivot})"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)


class ZeroColumn(ThinSvdError):
    def __init__(self, column: int):
        self.column = column
        super().__init__(f"Column {column} is identically zero")


class DivisionByZero(ThinSvdError):
    def __init__(self, column: int):
        self.column = column
        super().__init__(f"Cannot divide column {column} by a zero scale")


class NoConvergence(ThinSvdError):
    """Raised when a Jacobi iteration exhausts its sweep budget."""

    def __init__(self, sweeps: int, off_norm: float):
        self.sweeps = sweeps
        self.off_norm = off_norm
        super().__init__(
            f"Jacobi iteration did not converge in {sweeps} sweeps "
            f"(max normalized off-diagonal {off_norm:.3e})"
        )


class TinySingularValue(ThinSvdError):
    def __init__(self, index: int, value: float):
        self.index = index
        self.value = value
        super().__init__(f"Singular value {index} = {value!r} underflows working precision")


class InvalidMode(ThinSvdError, ValueError):
    def __init__(self, mode: int):
        self.mode = mode
        super().__init__(f"Invalid diagonal mode: {mode} (expected 1..5)")


class InvalidMatrixId(ThinSvdError, ValueError):
    def __init__(self, matrix_id: int):
        self.matrix_id = matrix_id
        super().__init__(f"Invalid matrix id: {matrix_id} (expected 1..16)")


class InfeasibleSpectrum(ThinSvdError):
    """Raised when a spectrum cannot be realized by a matrix with unit-norm columns."""

    def __init__(self, index: int, value: float):
        self.index = index
        self.value = value
        super().__init__(f"sigma[{index}]^2 = {value!r} exceeds n after renormalization")


class ShapeMismatch(ThinSvdError, ValueError):
    def __init__(self, detail: str):
        super().__init__(f"Shape mismatch: {detail}")


class InvalidPartition(ThinSvdError, ValueError):
    def __init__(self, p: int, m: int):
        self.p = p
        self.m = m
        super().__init__(f"Invalid partition: p={p} must satisfy 1 <= p <= m={m}")


class MatrixFormatError(ThinSvdError):
    def __init__(self, path: str, detail: str):
        self.path = path
        super().__init__(f"Malformed matrix file {path}: {detail}")


class ConfigError(ThinSvdError, ValueError):
    """Custom exception for invalid suite configuration."""
    pass


# Maps exception classes to the error_type strings written to result rows.
ERROR_TYPES = {
    CastOverflowError: "cast_overflow",
    NotPositiveDefinite: "not_positive_definite",
    ZeroColumn: "zero_column",
    DivisionByZero: "division_by_zero",
    NoConvergence: "no_convergence",
    TinySingularValue: "tiny_singular_value",
    InvalidMode: "invalid_mode",
    InvalidMatrixId: "invalid_matrix_id",
    InfeasibleSpectrum: "infeasible_spectrum",
    ShapeMismatch: "shape_mismatch",
    InvalidPartition: "invalid_partition",
    MatrixFormatError: "matrix_format",
    ConfigError: "config_error",
}


def classify_error(exc: BaseException) -> str:
    """Return the error_type string recorded for an exception."""
    for cls in type(exc).__mro__:
        if cls in ERROR_TYPES:
            return ERROR_TYPES[cls]
    if isinstance(exc, (FloatingPointError, ArithmeticError)):
        return "arithmetic"
    if isinstance(exc, (OSError, IOError)):
        return "io_error"
    return "other"
