#!/usr/bin/env python
# -*- coding: utf-8 -*-
import os
import unittest

import numpy as np

# Set environment variable so config.py uses a test environment
os.environ['FPSKETCH_ENV'] = 'test'
import codec
import hashing
from codec import CodecException, Reader, Writer
from tests import common


class TestCodec(unittest.TestCase):

    def test_scalars_and_arrays(self):
        w = Writer('demo')
        w.u32(7)
        w.u64(2 ** 61 - 1)
        w.f64(0.25)
        w.array(np.arange(6, dtype=np.int64).reshape(2, 3))
        w.array(np.array([1 + 2j, -3j]))
        r = Reader(w.getvalue(), 'demo')
        self.assertEqual(r.u32(), 7)
        self.assertEqual(r.u64(), 2 ** 61 - 1)
        self.assertEqual(r.f64(), 0.25)
        self.assertTrue(np.array_equal(r.array(),
                                       np.arange(6).reshape(2, 3)))
        self.assertTrue(np.array_equal(r.array(), np.array([1 + 2j, -3j])))
        r.finish()

    def test_bank(self):
        bank = hashing.SeedBank.new(3, 4, 2, common.rng(2))
        w = Writer('seeds')
        w.bank(bank)
        r = Reader(w.getvalue(), 'seeds')
        self.assertEqual(r.bank(), bank)
        r.finish()

    def test_wrong_kind(self):
        with self.assertRaises(CodecException):
            Reader(Writer('gme').getvalue(), 'light')

    def test_bad_magic(self):
        with self.assertRaises(CodecException):
            Reader(b'XXXX\x01\x00', 'gme')

    def test_other_version(self):
        data = Writer('gme').getvalue()
        data = data[:4] + b'\x09\x00' + data[6:]
        with self.assertRaises(CodecException):
            Reader(data, 'gme')

    def test_truncated(self):
        w = Writer('gme')
        w.array(np.zeros(10))
        r = Reader(w.getvalue()[:-8], 'gme')
        with self.assertRaises(CodecException):
            r.array()

    def test_trailing_bytes(self):
        w = Writer('gme')
        w.u32(1)
        r = Reader(w.getvalue() + b'\x00', 'gme')
        r.u32()
        with self.assertRaises(CodecException):
            r.finish()

    def test_header(self):
        self.assertTrue(Writer('x').getvalue().startswith(codec.MAGIC))


if __name__ == "__main__":
    unittest.main(verbosity=2)
