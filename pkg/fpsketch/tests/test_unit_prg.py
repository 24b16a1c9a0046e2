#!/usr/bin/env python
# -*- coding: utf-8 -*-
import os
import unittest

import numpy as np

# Set environment variable so config.py uses a test environment
os.environ['FPSKETCH_ENV'] = 'test'
import prg
from polyeval import MERSENNE_61


class TestCounterPRG(unittest.TestCase):

    def test_replayable(self):
        a = prg.CounterPRG(42, 'x')
        b = prg.CounterPRG(42, 'x')
        self.assertEqual(a.read(64), b.read(64))
        self.assertEqual(a.seed64(), b.seed64())

    def test_labels_and_seeds_separate_streams(self):
        base = prg.CounterPRG(42, 'x').read(32)
        self.assertNotEqual(prg.CounterPRG(43, 'x').read(32), base)
        self.assertNotEqual(prg.CounterPRG(42, 'y').read(32), base)

    def test_spawn_does_not_shift_parent(self):
        a = prg.CounterPRG(1)
        b = prg.CounterPRG(1)
        child = a.spawn('child')
        child.read(100)
        self.assertEqual(a.read(16), b.read(16))
        self.assertEqual(child.label, 'root/child')
        self.assertEqual(prg.CounterPRG(1).spawn('child').read(8),
                         prg.CounterPRG(1).spawn('child').read(8))
        self.assertNotEqual(prg.CounterPRG(1).spawn('a').read(8),
                            prg.CounterPRG(1).spawn('b').read(8))

    def test_randbelow(self):
        gen = prg.CounterPRG(5)
        values = [gen.randbelow(17) for _ in range(500)]
        self.assertTrue(all(0 <= v < 17 for v in values))
        self.assertEqual(len(set(values)), 17)
        with self.assertRaises(ValueError):
            gen.randbelow(0)

    def test_randbits(self):
        gen = prg.CounterPRG(5)
        self.assertTrue(all(0 <= gen.randbits(3) < 8 for _ in range(100)))

    def test_field_array(self):
        arr = prg.CounterPRG(9).field_array((40, 3))
        self.assertEqual(arr.shape, (40, 3))
        self.assertEqual(arr.dtype, np.uint64)
        self.assertTrue((arr < np.uint64(MERSENNE_61)).all())
        # 120 draws from 2^61 values should not repeat
        self.assertEqual(len(set(arr.ravel().tolist())), 120)

    def test_field_elements_toy_field(self):
        values = prg.CounterPRG(9).field_elements(50, 17)
        self.assertTrue(all(0 <= v < 17 for v in values))

    def test_numpy_rng(self):
        a = prg.CounterPRG(3).numpy_rng().integers(0, 1000, size=10)
        b = prg.CounterPRG(3).numpy_rng().integers(0, 1000, size=10)
        self.assertTrue(np.array_equal(a, b))


if __name__ == "__main__":
    unittest.main(verbosity=2)
