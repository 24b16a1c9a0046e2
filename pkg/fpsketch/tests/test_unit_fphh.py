#!/usr/bin/env python
# -*- coding: utf-8 -*-
import os
import unittest

import numpy as np

# Set environment variable so config.py uses a test environment
os.environ['FPSKETCH_ENV'] = 'test'
import fphh
import hashing
from core import StreamUpdate
from fphh import FpHH, SignSketch
from tests import common

# 40 buckets per repetition keep the planted keys apart
KNOBS = {'fphh_phi_divisor': 8}
PHI = 0.2
UNIVERSE = 64


def new_finder(seed=1):
    cfg = common.make_config(overrides=KNOBS)
    return FpHH.from_config(cfg, common.rng(seed, 'fphh'), phi=PHI,
                            universe=UNIVERSE)


def planted():
    """Three keys of 100 among 40 keys of 1; key 20 is negative."""
    x = np.zeros(UNIVERSE + 1, dtype=np.int64)
    light = [k for k in range(1, UNIVERSE + 1) if k not in (5, 20, 50)]
    x[light[:40]] = 1
    x[5] = 100
    x[20] = -100
    x[50] = 100
    keys = np.nonzero(x)[0]
    return keys, x[keys]


class TestSignSketch(unittest.TestCase):

    def test_lone_key(self):
        cs = SignSketch(5, 50, common.rng(2))
        cs.update_many([7], [-5])
        self.assertEqual(cs.row_estimates([7]).ravel().tolist(), [-5] * 5)
        self.assertEqual(cs.estimate([7]).tolist(), [-5])
        self.assertEqual(cs.sign([7]).tolist(), [-1])

    def test_ties_go_positive(self):
        cs = SignSketch(5, 50, common.rng(2))
        self.assertEqual(cs.sign([7]).tolist(), [1])

    def test_merge(self):
        a = SignSketch(3, 1000, common.rng(3))
        b = SignSketch(3, 1000, common.rng(3))
        a.update_many([1, 2], [3, 4])
        b.update_many([2], [-4])
        a.merge(b)
        self.assertEqual(a.estimate([1, 2]).tolist(), [3, 0])
        with self.assertRaises(ValueError):
            a.merge(SignSketch(3, 1000, common.rng(4)))


class TestFpHH(unittest.TestCase):

    def setUp(self):
        self.state = new_finder()

    def test_sizes(self):
        st = self.state
        self.assertEqual(st.levels, [3, 4, 5, 6])
        self.assertEqual(st.R, 40)
        self.assertEqual(st.T_rep % 2, 1)
        self.assertEqual(st.Y.shape[:3], (4, st.T_rep, st.R))

    def test_prefixes(self):
        self.assertEqual(self.state.prefixes([1, 8, 9, 64], 3).tolist(),
                         [0, 0, 1, 7])
        self.assertEqual(self.state.prefixes([1, 64], 6).tolist(), [0, 63])

    def test_one_update_touches_one_bucket(self):
        st = self.state
        fphh.fphh_update(st, StreamUpdate(37, 4))
        for li, level in enumerate(st.levels):
            prefix = (37 - 1) >> (st.depth - level)
            for j in range(st.T_rep):
                busy = np.nonzero(st.Y[li, j].reshape(st.R, -1).any(
                    axis=1))[0]
                self.assertEqual(len(busy), 1)
                seed = st.bucket_banks[li].seed(j)
                self.assertEqual(busy[0], hashing.kwise_eval(seed, prefix))

    def test_cancel(self):
        st = self.state
        st.update_many([37], [4])
        st.update_many([37], [-4])
        self.assertFalse(st.Y.any())
        self.assertTrue(st.global_box.is_zero())
        self.assertFalse(st.signs.A.any())
        self.assertEqual(fphh.fphh_report(st), [])

    def test_empty(self):
        self.assertEqual(fphh.basic_query(self.state, 3, 2), 0.0)
        self.assertEqual(self.state.report(), [])

    def test_single_spike(self):
        st = self.state
        st.update_many([37], [-50])
        records = st.report()
        self.assertEqual([r.index for r in records], [37])
        self.assertEqual(records[0].sign, -1)
        self.assertGreaterEqual(records[0].mag_p, 6.0 / 7 * 50)
        self.assertLessEqual(records[0].mag_p, 9.0 / 7 * 50)
        self.assertEqual(fphh.format_records(records)[0][:6], u"37 -1 ")

    def test_planted(self):
        st = self.state
        st.update_many(*planted())
        fp_tilde = st.global_box.estimate()
        records = st.report(fp_tilde=fp_tilde)
        self.assertEqual(sorted(r.index for r in records), [5, 20, 50])
        signs = dict((r.index, r.sign) for r in records)
        self.assertEqual(signs, {5: 1, 20: -1, 50: 1})
        for r in records:
            self.assertGreaterEqual(r.mag_p, 6.0 / 7 * 100)
            self.assertLessEqual(r.mag_p, 9.0 / 7 * 100)
        # every ancestor of a reported key passed the descent threshold
        threshold = 0.75 * PHI * fp_tilde
        for r in records:
            for level in st.levels:
                prefix = (r.index - 1) >> (st.depth - level)
                self.assertGreaterEqual(fphh.basic_query(st, level, prefix),
                                        threshold)
        self.assertEqual(len(st.frontier_sizes), len(st.levels))
        self.assertLessEqual(max(st.frontier_sizes), 2 * 8)

    def test_higher_threshold_reports_a_subset(self):
        st = self.state
        st.update_many(*planted())
        fp_tilde = st.global_box.estimate()
        low = set(r.index for r in st.report(0.2, fp_tilde))
        high = set(r.index for r in st.report(0.4, fp_tilde))
        self.assertTrue(high <= low)

    def test_merge(self):
        keys, values = planted()
        (lk, lv), (rk, rv) = common.split(keys, values)
        whole = new_finder()
        whole.update_many(keys, values)
        left = new_finder()
        left.update_many(lk, lv)
        right = new_finder()
        right.update_many(rk, rv)
        left.merge(right)
        self.assertTrue(np.allclose(left.Y, whole.Y, atol=1e-6))
        self.assertTrue(np.array_equal(left.signs.A, whole.signs.A))
        with self.assertRaises(ValueError):
            left.merge(new_finder(seed=2))

    def test_space(self):
        self.assertGreater(self.state.space_bits(), self.state.Y.size * 64)


if __name__ == "__main__":
    unittest.main(verbosity=2)
