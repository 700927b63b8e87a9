"""
Unit tests for the Jacobi kernels.
"""

import math
import os
import sys
import unittest

import numpy as np

# Add the project root to the path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', '..'))

from tests.oracles import oracle_eigenvalues, oracle_singular_values
from utils.dense_core import U_HIGHER, U_WORKING, DenseMatrix, Precision, cast, col_norms, scale_columns
from utils.errors import NoConvergence, NotPositiveDefinite, ZeroColumn
from utils.jacobi import (
    JacobiConfig,
    canonical_order,
    onesided_jacobi_svd,
    twosided_jacobi_eig,
)


def equilibrated_kappa(a: np.ndarray) -> float:
    """Condition number of a with its columns scaled to unit norm."""
    A = DenseMatrix(a.astype(np.float64), Precision.HIGHER)
    B = scale_columns(A, col_norms(A), invert=True)
    s = np.linalg.svd(B.data, compute_uv=False)
    return float(s[0] / s[-1])


class TestJacobiConfig(unittest.TestCase):

    def test_default_threshold(self):
        cfg = JacobiConfig()
        self.assertEqual(cfg.threshold(16, 4, Precision.WORKING), 4 * U_WORKING)
        self.assertEqual(cfg.threshold(10000, 4, Precision.HIGHER), 100 * U_HIGHER)

    def test_tall_input_departs_from_n_u(self):
        cfg = JacobiConfig()
        self.assertEqual(cfg.threshold(64, 8, Precision.WORKING), 8 * U_WORKING)
        self.assertEqual(cfg.threshold(1024, 8, Precision.WORKING), 32 * U_WORKING)
        plain = JacobiConfig(tol=8 * U_WORKING)
        self.assertEqual(plain.threshold(1024, 8, Precision.WORKING), 8 * U_WORKING)

    def test_explicit_tol(self):
        self.assertEqual(JacobiConfig(tol=1e-3).threshold(5, 5, Precision.HIGHER), 1e-3)

    def test_invalid(self):
        with self.assertRaises(ValueError):
            JacobiConfig(tol=0)
        with self.assertRaises(ValueError):
            JacobiConfig(max_sweeps=0)


class TestCanonicalOrder(unittest.TestCase):

    def test_sorts_descending_and_fixes_signs(self):
        values = np.array([1.0, 3.0, 2.0])
        V = np.array([[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]])
        U = V.copy()
        values, V, U = canonical_order(values, V, U)
        np.testing.assert_array_equal(values, [3, 2, 1])
        np.testing.assert_array_equal(V, [[0, 0, 1], [1, 0, 0], [0, 1, 0]])
        np.testing.assert_array_equal(U, V)

    def test_tie_goes_to_first_row(self):
        _, V, _ = canonical_order(np.array([1.0]), np.array([[-0.5], [0.5]]))
        np.testing.assert_array_equal(V[:, 0], [0.5, -0.5])


class TestOneSidedJacobi(unittest.TestCase):

    def test_diagonal(self):
        G = DenseMatrix(np.diag([3.0, 2.0, 1.0]).astype(np.float32), Precision.WORKING)
        f = onesided_jacobi_svd(G)
        np.testing.assert_array_equal(f.sigma, [3, 2, 1])
        np.testing.assert_array_equal(f.U.data, np.eye(3))
        np.testing.assert_array_equal(f.V.data, np.eye(3))
        self.assertEqual(f.sweeps, 1)

    def test_orthogonal_columns_need_no_rotation(self):
        G = DenseMatrix.from_values([[0, 1], [1, 0]], Precision.WORKING)
        f = onesided_jacobi_svd(G)
        np.testing.assert_array_equal(f.sigma, [1, 1])
        self.assertEqual(f.sweeps, 1)

    def test_unsorted_diagonal_is_reordered(self):
        G = DenseMatrix(np.diag([1.0, 4.0]), Precision.HIGHER)
        f = onesided_jacobi_svd(G)
        np.testing.assert_array_equal(f.sigma, [4, 1])
        np.testing.assert_array_equal(f.V.data, [[0, 1], [1, 0]])

    def test_working_matches_higher_precision_run(self):
        rng = np.random.default_rng(21)
        left, _ = np.linalg.qr(rng.standard_normal((6, 4)))
        right, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        g = ((left * np.logspace(0, -3, 4)) @ right.T).astype(np.float32)
        G = DenseMatrix(g, Precision.WORKING)
        working = onesided_jacobi_svd(G)
        higher = onesided_jacobi_svd(cast(G, Precision.HIGHER))
        rel = np.abs(working.sigma - higher.sigma) / higher.sigma
        self.assertLessEqual(rel.max(), 50 * U_WORKING * equilibrated_kappa(g))

    def test_factors_reconstruct_input(self):
        a = np.random.default_rng(13).standard_normal((12, 5))
        f = onesided_jacobi_svd(DenseMatrix(a, Precision.HIGHER))
        recon = (f.U.data * f.sigma) @ f.V.data.T
        np.testing.assert_allclose(recon, a, atol=1e-13)
        self.assertTrue(np.all(np.diff(f.sigma) <= 0))

    def test_matches_extended_precision_oracle(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            left, _ = np.linalg.qr(rng.standard_normal((8, 4)))
            right, _ = np.linalg.qr(rng.standard_normal((4, 4)))
            spectrum = np.logspace(0, -rng.uniform(0, 2), 4)
            a = ((left * spectrum) @ right.T).astype(np.float32)
            kappa = equilibrated_kappa(a)
            oracle = oracle_singular_values(a)
            working = onesided_jacobi_svd(DenseMatrix(a, Precision.WORKING)).sigma
            self.assertLessEqual(np.max(np.abs(working - oracle) / oracle), 50 * U_WORKING * kappa)

    def test_zero_column(self):
        with self.assertRaises(ZeroColumn):
            onesided_jacobi_svd(DenseMatrix.from_values([[1, 0], [1, 0]], Precision.HIGHER))

    def test_sweep_budget(self):
        a = np.random.default_rng(1).standard_normal((10, 6))
        with self.assertRaises(NoConvergence) as ctx:
            onesided_jacobi_svd(DenseMatrix(a, Precision.HIGHER), JacobiConfig(max_sweeps=1))
        self.assertEqual(ctx.exception.sweeps, 1)


class TestTwoSidedJacobi(unittest.TestCase):

    def test_diagonal(self):
        f = twosided_jacobi_eig(DenseMatrix(np.diag([4.0, 1.0]), Precision.HIGHER))
        np.testing.assert_array_equal(f.eigenvalues, [4, 1])
        np.testing.assert_array_equal(f.V.data, np.eye(2))

    def test_two_by_two(self):
        f = twosided_jacobi_eig(DenseMatrix.from_values([[2, 1], [1, 2]], Precision.HIGHER))
        np.testing.assert_allclose(f.eigenvalues, [3, 1], rtol=4 * U_HIGHER)
        h = 1 / math.sqrt(2)
        np.testing.assert_allclose(f.V.data, [[h, h], [h, -h]], atol=4 * U_HIGHER)

    def test_hilbert_matches_oracle(self):
        n = 4
        hilbert = np.array([[1.0 / (i + j + 1) for j in range(n)] for i in range(n)])
        f = twosided_jacobi_eig(DenseMatrix(hilbert, Precision.HIGHER))
        oracle = oracle_eigenvalues(hilbert)
        scale = 1 / np.sqrt(np.diag(hilbert))
        kappa_scaled = np.linalg.cond(hilbert * np.outer(scale, scale))
        rel = np.abs(f.eigenvalues - oracle) / oracle
        self.assertLessEqual(rel.max(), 1e3 * U_HIGHER * kappa_scaled)

    def test_nonpositive_diagonal(self):
        with self.assertRaises(NotPositiveDefinite) as ctx:
            twosided_jacobi_eig(DenseMatrix.from_values([[1, 0], [0, -1]], Precision.HIGHER))
        self.assertEqual(ctx.exception.pivot, 2)

    def test_indefinite_detected_during_rotation(self):
        with self.assertRaises(NotPositiveDefinite):
            twosided_jacobi_eig(DenseMatrix.from_values([[1, 2], [2, 1]], Precision.HIGHER))

    def test_eigenvectors_are_orthonormal(self):
        a = np.random.default_rng(17).standard_normal((30, 6))
        f = twosided_jacobi_eig(DenseMatrix(a.T @ a, Precision.HIGHER))
        np.testing.assert_allclose(f.V.data.T @ f.V.data, np.eye(6), atol=1e-14)
        np.testing.assert_allclose(f.eigenvalues, np.linalg.eigvalsh(a.T @ a)[::-1], rtol=1e-12)


if __name__ == '__main__':
    unittest.main()
