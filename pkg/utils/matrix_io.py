"""
matrix_io.py
Module for reading and writing matrices in the plain text exchange format.

Format: line 1 is `m n precision-tag`; the m*n values follow in column-major
order, whitespace separated, each printed as its shortest round-trip decimal.
"""
import os
from typing import List, Union

import numpy as np

from utils.dense_core import DenseMatrix, DiagMatrix, Precision
from utils.errors import MatrixFormatError

VALUES_PER_LINE = 8


def format_value(value: float, precision: Precision) -> str:
    """
    Shortest decimal string that reads back to the same value in the precision.
    Args:
        value: The entry to format
        precision: Precision the value is stored in
    Returns:
        Decimal text
    """
    if precision is Precision.HIGHER:
        return repr(float(value))
    return np.format_float_scientific(np.float32(value), unique=True, trim="-")


def write_matrix(path: str, A: Union[DenseMatrix, DiagMatrix]) -> None:
    """
    Write a matrix to a text file. A DiagMatrix is written as an n x 1 matrix.
    Args:
        path: Destination file
        A: Matrix to write
    """
    if isinstance(A, DiagMatrix):
        A = DenseMatrix(A.entries.reshape(-1, 1), A.precision)
    values = A.data.ravel(order="F")
    tokens = [format_value(v, A.precision) for v in values]
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"{A.rows} {A.cols} {A.precision.tag}\n")
        for start in range(0, len(tokens), VALUES_PER_LINE):
            f.write(" ".join(tokens[start:start + VALUES_PER_LINE]) + "\n")


def _parse_header(path: str, line: str) -> List:
    parts = line.split()
    if len(parts) != 3:
        raise MatrixFormatError(path, f"header needs 'm n precision', got {line.strip()!r}")
    try:
        m, n = int(parts[0]), int(parts[1])
        precision = Precision.from_tag(parts[2])
    except ValueError as e:
        raise MatrixFormatError(path, str(e))
    if m < 1 or n < 1:
        raise MatrixFormatError(path, f"dimensions must be positive, got {m}x{n}")
    return [m, n, precision]


def read_matrix(path: str) -> DenseMatrix:
    """
    Load a matrix written by write_matrix.
    Args:
        path: Path to the text file
    Returns:
        DenseMatrix bitwise equal to the one written
    Raises:
        FileNotFoundError: If the file does not exist
        MatrixFormatError: If the header or value count is wrong
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"Matrix file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline()
        tokens = f.read().split()
    m, n, precision = _parse_header(path, header)
    if len(tokens) != m * n:
        raise MatrixFormatError(path, f"expected {m * n} values, found {len(tokens)}")
    try:
        values = np.array([float(t) for t in tokens], dtype=np.float64)
    except ValueError as e:
        raise MatrixFormatError(path, str(e))
    data = values.astype(precision.dtype).reshape((m, n), order="F")
    return DenseMatrix(data, precision)


def read_diag(path: str) -> DiagMatrix:
    """Load an n x 1 matrix file as a DiagMatrix."""
    A = read_matrix(path)
    if A.cols != 1:
        raise MatrixFormatError(path, f"diagonal file must have one column, got {A.cols}")
    return DiagMatrix(A.data[:, 0].copy(), A.precision)
