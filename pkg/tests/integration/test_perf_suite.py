"""
Integration tests for the timing suite.
"""

import os
import shutil
import sys
import tempfile
import unittest

import numpy as np
import pandas as pd

# Add the project root to the path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', '..'))

from automation.perf_suite import PERF_COLUMNS, perf_matrix, run_perf_suite, soft_check, time_method
from utils.dense_core import Precision
from utils.suite_config import SuiteConfig


class TestPerfSuite(unittest.TestCase):

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()
        self.out = os.path.join(self.temp_dir, "perf.csv")

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def config(self, **changes):
        values = dict(perf_n_list=[4, 8], perf_m_ratio_list=[4], threads=1,
                      eigensolvers=["gram-chol-svd", "twosided-jacobi"], out_path=self.out)
        values.update(changes)
        return SuiteConfig(**values).validate()

    def test_perf_matrix_is_deterministic(self):
        a, b = perf_matrix(8, 4, 1), perf_matrix(8, 4, 1)
        self.assertEqual(a.shape, (32, 8))
        self.assertIs(a.precision, Precision.WORKING)
        np.testing.assert_array_equal(a.data, b.data)
        self.assertFalse(np.array_equal(a.data, perf_matrix(8, 4, 2).data))

    def test_rows_and_baseline_first(self):
        code = run_perf_suite(self.config(), repeats=1, warmup=0)
        self.assertEqual(code, 0)
        df = pd.read_csv(self.out)
        self.assertEqual(list(df.columns), PERF_COLUMNS)
        self.assertEqual(len(df), 2 * 3)
        self.assertEqual(list(df["method"][:3]), ["qr-baseline", "gram-chol-svd", "twosided-jacobi"])
        self.assertTrue((df.loc[df["method"] == "qr-baseline", "ratio_to_qr"] == 1.0).all())
        self.assertTrue((df["ratio_to_qr"] > 0).all())

    def test_phases_add_up_to_total(self):
        run_perf_suite(self.config(), repeats=3, warmup=1)
        df = pd.read_csv(self.out)
        phase_columns = ["gram_sec", "qr_sec", "eigen_sec", "svd_sec", "compute_U_sec", "overlap_sec"]
        for _, row in df.iterrows():
            self.assertAlmostEqual(row[phase_columns].fillna(0).sum(), row["total_sec"], places=9)

    def test_sync_count_of_mixed_methods(self):
        run_perf_suite(self.config(), repeats=1, warmup=0)
        df = pd.read_csv(self.out)
        mixed = df[df["method"] != "qr-baseline"]
        self.assertTrue((mixed["sync_count"] == 1).all())

    def test_thread_count_does_not_change_results(self):
        single = os.path.join(self.temp_dir, "single.csv")
        multi = os.path.join(self.temp_dir, "multi.csv")
        run_perf_suite(self.config(out_path=single, threads=1), repeats=1, warmup=0)
        run_perf_suite(self.config(out_path=multi, threads=4), repeats=1, warmup=0)
        a, b = pd.read_csv(single), pd.read_csv(multi)
        for column in ("sigma_max", "sigma_min", "orth_U"):
            np.testing.assert_array_equal(a[column].values, b[column].values)

    def test_median_run_is_returned(self):
        cfg = self.config()
        result = time_method("twosided-jacobi", perf_matrix(4, 4, 1), cfg, repeats=3, warmup=0)
        self.assertEqual(result.method, "twosided-jacobi")
        self.assertIn("total", result.timings)

    def test_soft_check(self):
        rows = [
            {"method": "gram-chol-svd", "n": 4, "m_ratio": 4, "ratio_to_qr": 2.0},
            {"method": "gram-chol-svd", "n": 8, "m_ratio": 4, "ratio_to_qr": 0.5},
            {"method": "qr-baseline", "n": 8, "m_ratio": 4, "ratio_to_qr": 1.0},
        ]
        self.assertTrue(soft_check(rows))
        rows[1]["ratio_to_qr"] = 1.5
        self.assertFalse(soft_check(rows))
        self.assertIsNone(soft_check(rows[2:]))


if __name__ == '__main__':
    unittest.main()
