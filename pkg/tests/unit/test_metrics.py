"""
Unit tests for accuracy measures and the theoretical bounds.
"""

import math
import os
import sys
import unittest

import numpy as np

# Add the project root to the path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', '..'))

from tests.oracles import oracle_singular_values
from utils.dense_core import U_HIGHER, U_WORKING, DenseMatrix, Precision, col_norms, scale_columns
from utils.errors import ShapeMismatch
from utils.jacobi import SvdFactors
from utils.metrics import (
    BoundParams,
    acceptance_backward_limit,
    acceptance_orth_V_limit,
    acceptance_sv_limit,
    build_metrics_report,
    cross_solver_limit,
    estimate_kappa,
    max_rel_sv_error,
    reference_svd,
    rowwise_backward_details,
    rowwise_backward_error,
    theoretical_bounds,
)


class TestMaxRelSvError(unittest.TestCase):

    def test_identical(self):
        self.assertEqual(max_rel_sv_error(np.array([3.0, 1.0]), np.array([3.0, 1.0])), 0.0)

    def test_worst_entry_wins(self):
        self.assertEqual(max_rel_sv_error(np.array([1.0, 0.5]), np.array([1.0, 0.25])), 1.0)

    def test_working_input_is_widened(self):
        computed = np.array([0.1], dtype=np.float32)
        err = max_rel_sv_error(computed, np.array([0.1]))
        self.assertAlmostEqual(err, abs(float(np.float32(0.1)) - 0.1) / 0.1)
        self.assertLessEqual(err, U_WORKING)

    def test_size_mismatch(self):
        with self.assertRaises(ShapeMismatch):
            max_rel_sv_error(np.ones(3), np.ones(2))

    def test_nonpositive_reference(self):
        with self.assertRaises(ValueError):
            max_rel_sv_error(np.ones(2), np.array([1.0, 0.0]))


class TestRowwiseBackwardError(unittest.TestCase):

    def setUp(self):
        self.A = DenseMatrix.from_values([[1, 0], [0, 2], [0, 0]], Precision.HIGHER)
        self.U = DenseMatrix.from_values([[0, 1], [1, 0], [0, 0]], Precision.HIGHER)
        self.V = DenseMatrix.from_values([[0, 1], [1, 0]], Precision.HIGHER)

    def test_exact_factorization(self):
        with self.assertLogs('utils.metrics', level='WARNING'):
            error, zero_rows = rowwise_backward_details(self.A, self.U, np.array([2.0, 1.0]), self.V)
        self.assertEqual(error, 0.0)
        self.assertEqual(zero_rows, 1)

    def test_relative_per_row(self):
        with self.assertLogs('utils.metrics', level='WARNING'):
            error = rowwise_backward_error(self.A, self.U, np.array([2.0, 1.5]), self.V)
        self.assertEqual(error, 0.5)

    def test_shape_mismatch(self):
        with self.assertRaises(ShapeMismatch):
            rowwise_backward_error(self.A, self.U, np.array([2.0]), self.V)


class TestTheoreticalBounds(unittest.TestCase):

    def test_zero_constants_give_zero_bounds(self):
        bounds = theoretical_bounds(BoundParams(), 8, 1e4, "twosided-jacobi")
        self.assertEqual(bounds.as_tuple(), (0.0, 0.0, 0.0))
        self.assertTrue(bounds.assumption_ok)

    def test_bound_grows_with_kappa(self):
        bp = BoundParams.defaults(16)
        small = theoretical_bounds(bp, 16, 10.0, "twosided-jacobi").bound_sv
        large = theoretical_bounds(bp, 16, 1e4, "twosided-jacobi").bound_sv
        self.assertLess(small, large)

    def test_assumption_gate(self):
        bp = BoundParams.defaults(64)
        self.assertTrue(theoretical_bounds(bp, 64, 10.0, "twosided-jacobi").assumption_ok)
        self.assertFalse(theoretical_bounds(bp, 64, 1e8, "twosided-jacobi").assumption_ok)

    def test_gram_chol_has_no_square_root_term(self):
        bp = BoundParams(eps_sqrt=1e-3)
        twosided = theoretical_bounds(bp, 4, 1.0, "twosided-jacobi")
        gram_chol = theoretical_bounds(bp, 4, 1.0, "gram-chol-svd")
        self.assertAlmostEqual(twosided.bound_sv, 2e-3)
        self.assertAlmostEqual(gram_chol.bound_sv, 2 * 12 * U_WORKING)

    def test_negative_constant_rejected(self):
        with self.assertRaises(ValueError):
            BoundParams(eps_U=-1.0)

    def test_unknown_variant(self):
        with self.assertRaises(ValueError):
            theoretical_bounds(BoundParams(), 4, 1.0, "qr-baseline")


class TestReferenceSvd(unittest.TestCase):

    def test_sorted_singular_values(self):
        A = DenseMatrix.from_values([[3, 0], [0, 4], [0, 0]], Precision.WORKING)
        np.testing.assert_array_equal(reference_svd(A), [4, 3])

    def test_matches_extended_precision_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            a = rng.standard_normal((8, 4)).astype(np.float32)
            A = DenseMatrix(a, Precision.WORKING)
            A_h = DenseMatrix(a.astype(np.float64), Precision.HIGHER)
            kappa_B = estimate_kappa(scale_columns(A_h, col_norms(A_h), invert=True))
            oracle = oracle_singular_values(a)
            self.assertLessEqual(max_rel_sv_error(reference_svd(A), oracle), 1e3 * U_HIGHER * kappa_B)

    def test_estimate_kappa(self):
        B = DenseMatrix.from_values([[2, 0], [0, 1], [0, 0]], Precision.HIGHER)
        self.assertEqual(estimate_kappa(B), 2.0)


class TestAcceptanceLimits(unittest.TestCase):

    def test_sv_limits(self):
        self.assertEqual(acceptance_sv_limit("twosided-jacobi", 10.0), 100 * (U_WORKING + U_HIGHER * 100))
        self.assertEqual(acceptance_sv_limit("gram-chol-svd", 10.0), 100 * (U_WORKING * 10 + U_HIGHER * 100))

    def test_cross_solver_limit_is_sum(self):
        self.assertEqual(cross_solver_limit(1e3),
                         acceptance_sv_limit("twosided-jacobi", 1e3) + acceptance_sv_limit("gram-chol-svd", 1e3))

    def test_backward_and_orth_V(self):
        self.assertEqual(acceptance_backward_limit(4), 100 * 2 * U_WORKING)
        self.assertLess(acceptance_orth_V_limit("twosided-jacobi", 8), acceptance_orth_V_limit("gram-chol-svd", 8))


class TestBuildMetricsReport(unittest.TestCase):

    def setUp(self):
        self.A = DenseMatrix.from_values([[2, 0], [0, 1], [0, 0], [0, 0]], Precision.WORKING)
        self.factors = SvdFactors(
            U=DenseMatrix(np.eye(4, 2, dtype=np.float32), Precision.WORKING),
            sigma=np.array([2.0, 1.0], dtype=np.float32),
            V=DenseMatrix(np.eye(2, dtype=np.float32), Precision.WORKING),
            precision=Precision.WORKING,
            sweeps=1,
        )

    def test_mixed_method_report(self):
        with self.assertLogs('utils.metrics', level='WARNING'):
            report = build_metrics_report(self.A, self.factors, np.array([2.0, 1.0]), 1.0, 2.0, "twosided-jacobi")
        self.assertEqual(report.max_rel_sv_err, 0.0)
        self.assertEqual(report.orth_U, 0.0)
        self.assertEqual(report.rowwise_backward_max, 0.0)
        self.assertEqual(report.zero_rows, 2)
        expected = theoretical_bounds(BoundParams.defaults(2), 2, 1.0, "twosided-jacobi")
        self.assertEqual(report.bound_sv, expected.bound_sv)
        self.assertTrue(report.assumption_ok)

    def test_comparator_has_no_bounds(self):
        with self.assertLogs('utils.metrics', level='WARNING'):
            report = build_metrics_report(self.A, self.factors, np.array([2.0, 1.0]), 1.0, 2.0)
        self.assertTrue(math.isnan(report.bound_sv))
        self.assertFalse(report.assumption_ok)


if __name__ == '__main__':
    unittest.main()
