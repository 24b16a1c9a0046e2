#!/usr/bin/env python
# -*- coding: utf-8 -*-
import os
import unittest

# Set environment variable so config.py uses a test environment
os.environ['FPSKETCH_ENV'] = 'test'
import bench
import generators
from tests import common


class TestBench(unittest.TestCase):

    def test_time_updates(self):
        cfg = common.make_config(n=200)
        stream = generators.uniform(200, 30, 5,
                                    common.rng(1, 'bench').numpy_rng())
        for mode in bench.MODES:
            lat = bench.time_updates(mode, cfg, stream, 0)
            self.assertEqual(len(lat), 30)
            self.assertTrue((lat >= 0).all())

    def test_sweep(self):
        rows = bench.bench_sweep([0.25, 0.2], n=200, m=12,
                                 modes=('light', 'instance'))
        self.assertEqual(len(rows), 4)
        for row in rows:
            self.assertEqual(set(row), set(bench.COLUMNS))
            self.assertEqual(row['updates'], 12)
            self.assertGreater(row['rss_mb'], 0)
        self.assertEqual(bench.bench_sweep([]), [])

    def test_fit_exponent(self):
        rows = [{'eps': 0.1, 'mode': 'light', 'mean_us': 100.0},
                {'eps': 0.01, 'mode': 'light', 'mean_us': 10000.0},
                {'eps': 0.1, 'mode': 'instance', 'mean_us': 5.0}]
        self.assertAlmostEqual(bench.fit_exponent(rows, 'light'), 2.0)
        self.assertIsNone(bench.fit_exponent(rows, 'instance'))


if __name__ == "__main__":
    unittest.main(verbosity=2)
