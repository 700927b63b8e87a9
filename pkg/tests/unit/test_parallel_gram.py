"""
Unit tests for the partitioned Gram product.
"""

import os
import sys
import unittest

import numpy as np

# Add the project root to the path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', '..'))

from utils.dense_core import U_HIGHER, DenseMatrix, Precision, gram
from utils.errors import InvalidPartition
from utils.parallel_gram import (
    SyncCounter,
    make_plan,
    partitioned_gram,
    plan_granularity,
    sync_count,
    tree_reduce,
)


class TestPlan(unittest.TestCase):

    def test_granularity_is_power_of_two(self):
        self.assertEqual(plan_granularity(1), 2)
        self.assertEqual(plan_granularity(3), 8)
        self.assertEqual(plan_granularity(4), 8)
        self.assertEqual(plan_granularity(5), 16)

    def test_ranges_cover_rows_and_are_balanced(self):
        plan = make_plan(10, 2, num_blocks=4)
        self.assertEqual(plan.row_ranges, ((0, 3), (3, 6), (6, 8), (8, 10)))
        sizes = [hi - lo for lo, hi in plan.row_ranges]
        self.assertLessEqual(max(sizes) - min(sizes), 1)

    def test_blocks_capped_at_rows(self):
        self.assertEqual(make_plan(3, 2, num_blocks=8).blocks, 3)

    def test_invalid_worker_count(self):
        with self.assertRaises(InvalidPartition):
            make_plan(4, 0)
        with self.assertRaises(InvalidPartition):
            make_plan(4, 5)


class TestTreeReduce(unittest.TestCase):

    def test_pairing_order(self):
        # ((a + b) + (c + d)) + e with an odd tail carried up
        parts = [np.array([1e16]), np.array([1.0]), np.array([-1e16]), np.array([1.0]), np.array([3.0])]
        expected = ((parts[0] + parts[1]) + (parts[2] + parts[3])) + parts[4]
        np.testing.assert_array_equal(tree_reduce(parts), expected)

    def test_single(self):
        np.testing.assert_array_equal(tree_reduce([np.eye(2)]), np.eye(2))


class TestPartitionedGram(unittest.TestCase):

    def setUp(self):
        self.rng = np.random.default_rng(42)

    def test_single_block_equals_gram(self):
        A = DenseMatrix(self.rng.standard_normal((50, 4)), Precision.HIGHER)
        M = partitioned_gram(A, 1, num_blocks=1)
        np.testing.assert_array_equal(M.data, gram(A).data)

    def test_worker_count_does_not_change_bits(self):
        A = DenseMatrix(self.rng.standard_normal((8, 2)), Precision.HIGHER)
        M2 = partitioned_gram(A, 2, num_blocks=4)
        M4 = partitioned_gram(A, 4, num_blocks=4)
        np.testing.assert_array_equal(M2.data, M4.data)

    def test_bitwise_identical_across_threads(self):
        A = DenseMatrix(self.rng.standard_normal((333, 7)), Precision.HIGHER)
        reference = partitioned_gram(A, 1, num_blocks=8).data
        for p in (2, 4, 8):
            np.testing.assert_array_equal(partitioned_gram(A, p, num_blocks=8).data, reference)

    def test_close_to_sequential_gram(self):
        a = self.rng.standard_normal((1024, 64))
        A = DenseMatrix(a, Precision.HIGHER)
        M = partitioned_gram(A, 8)
        rel = np.linalg.norm(M.data - gram(A).data) / np.linalg.norm(M.data)
        self.assertLessEqual(rel, 10 * 1024 * U_HIGHER)

    def test_symmetric(self):
        A = DenseMatrix(self.rng.standard_normal((97, 5)), Precision.HIGHER)
        M = partitioned_gram(A, 3).data
        np.testing.assert_array_equal(M, M.T)

    def test_counter_records_one_event(self):
        counter = SyncCounter()
        A = DenseMatrix(self.rng.standard_normal((64, 3)), Precision.HIGHER)
        partitioned_gram(A, 4, counter=counter)
        self.assertEqual(counter.events, 1)
        self.assertEqual(counter.history, [4])

    def test_invalid_p(self):
        A = DenseMatrix(np.ones((3, 2)), Precision.HIGHER)
        with self.assertRaises(InvalidPartition):
            partitioned_gram(A, 4)


class TestSyncCount(unittest.TestCase):

    def test_always_one(self):
        for p in (1, 2, 4, 8, 256):
            self.assertEqual(sync_count(p), 1)


if __name__ == '__main__':
    unittest.main()
