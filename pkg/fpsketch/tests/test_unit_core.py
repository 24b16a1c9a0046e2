#!/usr/bin/env python
# -*- coding: utf-8 -*-
import importlib.util
import os
import unittest

import numpy as np

# Set environment variable so config.py uses a test environment
os.environ['FPSKETCH_ENV'] = 'test'
import config
import core
import stable
from core import StreamUpdate
from polyeval import MERSENNE_61
from tests import common


class TestDeriveConfig(unittest.TestCase):

    def setUp(self):
        self.cfg = common.make_config()

    def test_balance_and_alpha(self):
        self.assertAlmostEqual(self.cfg.eps_balance, 0.5)
        self.assertAlmostEqual(self.cfg.alpha, 1.0 / 544)

    def test_highend_sizes(self):
        cfg = self.cfg
        self.assertEqual(cfg.r, 8)
        self.assertEqual(cfg.T, 11)
        self.assertEqual(cfg.t_rows, 3 * cfg.T)
        self.assertEqual(cfg.s, 2176)
        self.assertGreaterEqual(cfg.s * cfg.alpha, 4 - cfg.alpha)
        self.assertEqual(cfg.r_h, 10)
        self.assertEqual(cfg.r_g, cfg.r)
        self.assertEqual(cfg.taylor_degree, 8)

    def test_light_sizes(self):
        cfg = self.cfg
        self.assertEqual(cfg.gme_rows, 8)
        self.assertEqual(cfg.k_wise, 8)
        self.assertEqual(cfg.R_light, 16)
        self.assertEqual(cfg.reps_light, 4)
        self.assertEqual(cfg.d, 4)

    def test_heavy_hitter_sizes(self):
        cfg = self.cfg
        self.assertEqual(cfg.fphh_R, 68)
        self.assertEqual(cfg.fphh_levels, 12)
        self.assertEqual(cfg.fphh_top_level, 10)
        self.assertEqual(cfg.fphh_T_rep, 11)
        self.assertEqual(cfg.fphh_T_rep % 2, 1)
        self.assertEqual(cfg.fphh_bucket_groups, 1)
        self.assertEqual(cfg.fphh_global_groups, 3)
        self.assertEqual(cfg.cs_columns, 22848)
        self.assertEqual(cfg.cs_rows, 13)
        self.assertEqual(cfg.fpest_k_wise, 14)
        self.assertEqual(cfg.fpest_groups, 3)

    def test_fpest_group_size_follows_chebyshev(self):
        cfg = self.cfg
        self.assertAlmostEqual(cfg.fpest_second_moment,
                               stable.gme_second_moment(8, 1.0))
        self.assertEqual(cfg.fpest_group_failure, config.FPEST_GROUP_FAILURE)
        self.assertEqual(cfg.fpest_group_size, 75)
        # Chebyshev: P(miss) <= Var(est) / (group size * eps'^2)
        bound = (cfg.fpest_second_moment - 1) / cfg.fpest_eps ** 2
        self.assertLessEqual(bound / cfg.fpest_group_size, 0.25)
        self.assertGreater(bound / (cfg.fpest_group_size - 1), 0.25)

    def test_fpest_group_size_over_grid(self):
        for p in (0.25, 0.5, 1.0, 1.5, 1.9):
            cfg = common.make_config(p=p)
            bound = (cfg.fpest_second_moment - 1) / cfg.fpest_eps ** 2
            self.assertGreater(cfg.fpest_group_size, 1)
            self.assertLessEqual(bound / cfg.fpest_group_size,
                                 cfg.fpest_group_failure)

    def test_chebyshev_group_size(self):
        self.assertEqual(core.chebyshev_group_size(1.0, 0.1, 0.25), 1)
        self.assertEqual(core.chebyshev_group_size(1.5, 0.5, 0.5), 4)
        self.assertEqual(core.chebyshev_group_size(1.25, 0.5, 0.25), 4)

    def test_reduced_universe_is_capped(self):
        self.assertEqual(self.cfg.N, config.N_CAP)
        self.assertTrue(self.cfg.n_capped)
        self.assertEqual(self.cfg.sigma_k, 12)

    def test_capped_universe_is_logged(self):
        with self.assertLogs('core', level='WARNING') as logs:
            common.make_config()
        self.assertTrue(any('capped' in line for line in logs.output))

    def test_exact_storage_advised(self):
        self.assertFalse(self.cfg.exact_storage_advised)
        with self.assertLogs('core', level='WARNING') as logs:
            cfg = common.make_config(n=16)
        self.assertTrue(cfg.exact_storage_advised)
        self.assertTrue(any('exactly' in line for line in logs.output))

    def test_instances_odd(self):
        self.assertEqual(self.cfg.instances, 3)
        for delta in (0.01, 0.1, 0.3, 0.49):
            cfg = common.make_config(delta=delta)
            self.assertEqual(cfg.instances % 2, 1)

    def test_r_even_over_grid(self):
        for eps in (0.01, 0.05, 0.1, 0.2, 0.3, 0.49):
            for p in (0.25, 0.5, 1.0, 1.5, 1.9):
                cfg = common.make_config(p=p, eps=eps)
                self.assertEqual(cfg.r % 2, 0)
                self.assertGreater(cfg.gme_rows, max(4.0, 4.0 / p))
                self.assertEqual(cfg.t_rows, 3 * cfg.T)

    def test_deterministic(self):
        again = common.make_config()
        self.assertEqual(self.cfg, again)
        self.assertEqual(self.cfg.config_hash, again.config_hash)

    def test_rejects_parameters_out_of_range(self):
        for params in ({'p': 0.0}, {'p': 2.0}, {'eps': 0.5}, {'eps': 0.0},
                       {'delta': 0.5}, {'n': 0}, {'M': 0}):
            with self.assertRaises(core.ConfigException):
                common.make_config(**params)

    def test_overrides(self):
        cfg = common.make_config(overrides={'tau': 2})
        self.assertEqual(cfg.T, 21)
        self.assertNotEqual(cfg.config_hash, self.cfg.config_hash)
        pinned = common.make_config(overrides={'k_wise': 5, 'instances': 1})
        self.assertEqual(pinned.k_wise, 5)
        self.assertEqual(pinned.instances, 1)
        grouped = common.make_config(overrides={'fpest_group_size': 3})
        self.assertEqual(grouped.fpest_group_size, 3)
        with self.assertRaises(core.ConfigException):
            common.make_config(overrides={'gme_rows': 2})

    def test_integral_override_keeps_float_knob(self):
        cfg = common.make_config(overrides={'tau': 1})
        self.assertIsInstance(cfg.tau, float)
        self.assertEqual(cfg.config_hash, self.cfg.config_hash)

    def test_unknown_override(self):
        with self.assertRaises(core.ConfigException):
            common.make_config(overrides={'no_such_knob': 1})

    def test_pinned_odd_r_is_rejected(self):
        with self.assertRaises(core.ConfigException):
            common.make_config(overrides={'r': 3})


class TestConfigText(unittest.TestCase):

    def test_round_trip(self):
        cfg = common.make_config()
        back = core.FpConfig.from_text(cfg.to_text())
        self.assertEqual(cfg, back)
        self.assertEqual(cfg.config_hash, back.config_hash)

    def test_comments_and_blank_lines(self):
        cfg = common.make_config()
        text = u'# saved config\n\n' + cfg.to_text()
        self.assertEqual(core.FpConfig.from_text(text), cfg)

    def test_rejects_garbage_line(self):
        cfg = common.make_config()
        text = cfg.to_text() + u'not a line\n'
        with self.assertRaises(core.ConfigException) as ctx:
            core.FpConfig.from_text(text)
        self.assertIn('line', str(ctx.exception))

    def test_rejects_missing_keys(self):
        with self.assertRaises(core.ConfigException):
            core.FpConfig.from_text(u'p=1.0\n')

    def test_rejects_bad_boolean(self):
        with self.assertRaises(core.ConfigException):
            core.parse_value('n_capped', 'maybe')

    def test_parse_value(self):
        self.assertEqual(core.parse_value('tau', '2.5'), 2.5)
        self.assertEqual(core.parse_value('k_wise', '7'), 7)
        self.assertTrue(core.parse_value('highend_fixed_point', 'true'))
        with self.assertRaises(core.ConfigException):
            core.parse_value('k_wise', 'seven')


class TestProfiles(unittest.TestCase):

    def load_profile(self, env):
        saved = os.environ.pop('FPSKETCH_ENV', None)
        try:
            if env is not None:
                os.environ['FPSKETCH_ENV'] = env
            spec = importlib.util.spec_from_file_location(
                'config_profile', config.__file__)
            module = importlib.util.module_from_spec(spec)
            spec.loader.exec_module(module)
            return module
        finally:
            os.environ['FPSKETCH_ENV'] = saved or 'test'

    def test_unset_env_selects_full(self):
        full = self.load_profile(None)
        self.assertEqual(full.FPSKETCH_ENV, 'full')
        self.assertEqual(full.TAU, 24)
        self.assertEqual(full.C_K, 32)
        self.assertEqual(full.N_CAP, 2 ** 24)
        self.assertEqual(full.FPEST_MEDIAN_FACTOR,
                         self.load_profile('full').FPEST_MEDIAN_FACTOR)

    def test_dev_is_opt_in(self):
        dev = self.load_profile('dev')
        self.assertEqual(dev.TAU, 4)
        self.assertEqual(dev.N_CAP, 2 ** 14)

    def test_every_profile_sets_group_failure(self):
        for env in ('full', 'dev', 'test'):
            self.assertEqual(self.load_profile(env).FPEST_GROUP_FAILURE,
                             0.25)

    def test_loaded_config_stays_on_test_profile(self):
        self.load_profile(None)
        self.assertEqual(os.environ['FPSKETCH_ENV'], 'test')
        self.assertEqual(config.TAU, 1)


class TestHelpers(unittest.TestCase):

    def test_odd_ceil(self):
        self.assertEqual(core.odd_ceil(0.2), 1)
        self.assertEqual(core.odd_ceil(2), 3)
        self.assertEqual(core.odd_ceil(4.5), 5)
        self.assertEqual(core.odd_ceil(7), 7)

    def test_check_updates(self):
        indices, deltas = core.check_updates([1, 5], [-3, 3], 5, 3)
        self.assertEqual(indices.dtype, np.int64)
        with self.assertRaises(core.UpdateException):
            core.check_updates([0], [1], 5, 3)
        with self.assertRaises(core.UpdateException):
            core.check_updates([6], [1], 5, 3)
        with self.assertRaises(core.UpdateException):
            core.check_updates([1], [4], 5, 3)
        with self.assertRaises(core.UpdateException):
            core.check_updates([1, 2], [1], 5, 3)

    def test_check_updates_empty(self):
        indices, deltas = core.check_updates([], [], 5, 3)
        self.assertEqual(len(indices), 0)

    def test_coalesce_updates(self):
        keys, sums = core.coalesce_updates([4, 2, 4, 7, 7, 2],
                                           [1, 3, 2, 5, -5, 1])
        self.assertEqual(keys.tolist(), [2, 4])
        self.assertEqual(sums.tolist(), [4, 3])
        keys, sums = core.coalesce_updates([], [])
        self.assertEqual(len(keys), 0)


class TestZeroFingerprint(unittest.TestCase):

    def setUp(self):
        self.fp = core.fingerprint_new(common.rng(3, 'fingerprint'))

    def test_empty_is_zero(self):
        self.assertTrue(self.fp.is_zero())

    def test_cancelling_stream_is_zero(self):
        indices, deltas = common.random_updates(500, 300, 50)
        self.fp.update_many(*common.cancelled(indices, deltas))
        self.assertTrue(self.fp.is_zero())

    def test_nonzero_stream(self):
        self.fp.update_many([17, 17, 4], [3, -1, 2])
        self.assertFalse(self.fp.is_zero())

    def test_matches_direct_sum(self):
        rho = self.fp.rho
        core.fingerprint_update(self.fp, StreamUpdate(3, -2))
        core.fingerprint_update(self.fp, StreamUpdate(10, 5))
        expected = (-2 * pow(rho, 3, MERSENNE_61) +
                    5 * pow(rho, 10, MERSENNE_61)) % MERSENNE_61
        self.assertEqual(self.fp.accumulator, expected)

    def test_merge_is_linear(self):
        indices, deltas = common.random_updates(500, 200, 50, seed=4)
        (li, ld), (ri, rd) = common.split(indices, deltas)
        whole = core.fingerprint_new(common.rng(3, 'fingerprint'))
        whole.update_many(indices, deltas)
        left = core.fingerprint_new(common.rng(3, 'fingerprint'))
        left.update_many(li, ld)
        right = core.fingerprint_new(common.rng(3, 'fingerprint'))
        right.update_many(ri, rd)
        left.merge(right)
        self.assertEqual(left.accumulator, whole.accumulator)

    def test_merge_needs_same_seed(self):
        other = core.fingerprint_new(common.rng(4, 'fingerprint'))
        with self.assertRaises(core.ConfigException):
            self.fp.merge(other)


if __name__ == "__main__":
    unittest.main(verbosity=2)
