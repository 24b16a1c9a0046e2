import unittest

import numpy as np

import functional_test  # first, it selects the constant profile
import core
import prg
from highend import HighEndFailure
from lightestimator import LightEstimatorException
from pipeline import FpEstimatorInstance

SPLITS = 100


def outcome(inst):
    try:
        return inst.query()
    except (HighEndFailure, LightEstimatorException) as e:
        return type(e)


class MergeLinearity(unittest.TestCase, functional_test.BatteryTest):

    def setUp(self):
        functional_test.BatteryTest.setUp(self)
        self.cfg = core.derive_config(1.0, 0.25, 0.25, 2000, 3000, 20)
        gen = prg.CounterPRG(self.seed, 'merge-stream').numpy_rng()
        self.indices = gen.integers(1, 2001, size=3000)
        self.deltas = gen.integers(-20, 21, size=3000)
        self.whole = self.new_instance()
        self.whole.update_many(self.indices, self.deltas)
        self.whole.light.flush_buffer()

    def new_instance(self):
        return FpEstimatorInstance(
            self.cfg, prg.CounterPRG(self.seed, 'merge-instance'))

    def assertSameState(self, merged):
        whole = self.whole
        self.assertTrue(np.allclose(merged.highend.counters,
                                    whole.highend.counters, atol=1e-6))
        self.assertTrue(np.allclose(merged.fphh.Y, whole.fphh.Y, atol=1e-6))
        self.assertTrue(np.array_equal(merged.fphh.signs.A,
                                       whole.fphh.signs.A))
        self.assertTrue(np.allclose(merged.light.y, whole.light.y,
                                    atol=1e-6))
        self.assertTrue(np.allclose(merged.fpest.y, whole.fpest.y,
                                    atol=1e-6))
        self.assertEqual(merged.fingerprint.accumulator,
                         whole.fingerprint.accumulator)

    def test_random_splits(self):
        gen = np.random.default_rng(self.seed)
        expected = outcome(self.whole)
        for _ in range(SPLITS):
            parts = gen.integers(2, 5)
            owner = gen.integers(0, parts, size=len(self.indices))
            shards = []
            for k in range(parts):
                inst = self.new_instance()
                inst.update_many(self.indices[owner == k],
                                 self.deltas[owner == k])
                shards.append(inst)
            merged = shards[0]
            for other in shards[1:]:
                merged.merge(other)
            merged.light.flush_buffer()
            self.assertSameState(merged)
            got = outcome(merged)
            if isinstance(expected, float):
                self.assertTrue(np.isclose(got, expected, rtol=1e-6))
            else:
                self.assertIs(got, expected)


if __name__ == "__main__":
    unittest.main(verbosity=2)
