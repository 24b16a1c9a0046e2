# -*- coding: utf-8 -*-
"""End-to-end F_p estimator: universe reduction, heavy list, HighEnd on the
reduced vector, averaged light estimate, and median amplification.

Keys are reduced by h1: [n] -> [N] with random signs sigma, so the reduced
vector is y_i = sum over h1(j) = i of sigma(j) x_j. HighEnd and the heavy
hitter finder run on y; the light estimator and the FpEst box run on x,
with light buckets chosen by h2(h1(i)).
"""
import collections
import logging

import numpy as np

import config
import core
import hashing
import prg
from fphh import FpHH
from highend import HighEndFailure, HighEndSketch
from lightestimator import FpEstBox, LightEstimatorException, LightState

log = logging.getLogger(__name__)

EstimateRecord = collections.namedtuple(
    'EstimateRecord',
    ['estimate', 'failed_instances', 'config_hash', 'space_bits'])


class AllInstancesFailed(Exception):

    """Every instance abstained, so there is no median to report."""

    def __init__(self, count):
        super(AllInstancesFailed, self).__init__(
            "all {} instances failed".format(count))
        self.count = count


class UniverseReduction(object):

    def __init__(self, N, sigma_k, z_h1, c_h, rng):
        self.N = N
        self.h1 = hashing.uniform_on_set_new(max(2, z_h1), N, c_h,
                                             rng.spawn('h1'))
        self.sigma = hashing.SeedBank.new(1, sigma_k, 2, rng.spawn('sigma'))

    def reduce(self, indices):
        """Reduced keys h1(i) + 1 in [1, N]."""
        return self.h1.eval_many(indices).astype(np.int64) + 1

    def signs(self, indices):
        return self.sigma.signs(indices)[0]

    def reduce_updates(self, indices, deltas):
        return self.reduce(indices), \
            self.signs(indices) * np.asarray(deltas, dtype=np.int64)


class ComposedHash(object):

    """Light bucket of an original index: h2 applied to its reduced key."""

    def __init__(self, reduction, h2):
        self.reduction = reduction
        self.h2 = h2

    def eval_many(self, indices):
        return self.h2.eval_many(self.reduction.reduce(indices))


class FpEstimatorInstance(object):

    def __init__(self, cfg, rng):
        self.cfg = cfg
        self.reduction = UniverseReduction(cfg.N, cfg.sigma_k, cfg.z_h1,
                                           cfg.c_h, rng.spawn('reduction'))
        self.highend = HighEndSketch.from_config(cfg, rng.spawn('highend'))
        self.fphh = FpHH.from_config(cfg, rng.spawn('fphh'))
        self.h2 = hashing.uniform_on_set_new(cfg.R_light, cfg.R_light,
                                             cfg.c_h, rng.spawn('h2'))
        self.light = LightState.from_config(
            cfg, rng, bucket_hash=ComposedHash(self.reduction, self.h2))
        self.fpest = FpEstBox.from_config(cfg, rng.spawn('fpest'))
        self.fingerprint = core.fingerprint_new(rng.spawn('fingerprint'))
        self.last_heavy = []

    def update_many(self, indices, deltas):
        indices, deltas = core.check_updates(indices, deltas, self.cfg.n,
                                             self.cfg.M)
        indices, deltas = core.coalesce_updates(indices, deltas)
        chunk = config.INGEST_CHUNK
        for start in range(0, len(indices), chunk):
            idx = indices[start:start + chunk]
            dlt = deltas[start:start + chunk]
            self.fingerprint.update_many(idx, dlt)
            keys, signed = self.reduction.reduce_updates(idx, dlt)
            self.highend.update_many(keys, signed)
            self.fphh.update_many(keys, signed)
            self.light.update_many(idx, dlt)
            self.fpest.update_many(idx, dlt)

    def build_heavy_list(self, fp_tilde):
        cfg = self.cfg
        floor = 2.0 * cfg.eps_balance ** 2 / 7.0 * fp_tilde
        heavy = [rec for rec in self.fphh.report()
                 if rec.mag_p >= floor]
        limit = int(2.0 / cfg.alpha)
        if len(heavy) > limit:
            log.warning("heavy list of %d truncated to %d", len(heavy), limit)
            heavy = sorted(heavy, key=lambda rec: -rec.mag_p)[:limit]
        self.last_heavy = heavy
        return heavy

    def query(self):
        if self.fingerprint.is_zero():
            return 0.0
        self.light.flush_buffer()
        fp_tilde = self.fpest.estimate()
        heavy = self.build_heavy_list(fp_tilde)
        keys = [rec.index for rec in heavy]
        table = self.highend.build_isolation(keys)
        psi = self.highend.estimate(table,
                                    [(rec.index, rec.sign) for rec in heavy])
        exclude = set(int(b) for b in self.h2.eval_many(keys)) \
            if keys else set()
        return psi + self.light.report(exclude, fp_tilde)

    def merge(self, other):
        self.highend.merge(other.highend)
        self.fphh.merge(other.fphh)
        self.light.merge(other.light)
        self.fpest.merge(other.fpest)
        self.fingerprint.merge(other.fingerprint)

    def space_bits(self):
        return (self.highend.space_bits() + self.fphh.space_bits() +
                self.light.space_bits() + self.fpest.space_bits() +
                self.fingerprint.space_bits())


class FpEstimator(object):

    """``cfg.instances`` independent instances answering by their median."""

    def __init__(self, cfg, seed, instances=None):
        self.cfg = cfg
        self.seed = seed
        root = prg.CounterPRG(seed)
        count = instances or cfg.instances
        self.instances = [
            FpEstimatorInstance(cfg, root.spawn('instance-{}'.format(i)))
            for i in range(count)]

    def update_many(self, indices, deltas):
        indices, deltas = core.check_updates(indices, deltas, self.cfg.n,
                                             self.cfg.M)
        for inst in self.instances:
            inst.update_many(indices, deltas)

    def update(self, u):
        self.update_many([u.index], [u.delta])

    def query(self):
        return median_query(self.instances)


def pipeline_update(inst, u):
    inst.update_many([u.index], [u.delta])


def build_heavy_list(inst):
    inst.light.flush_buffer()
    return inst.build_heavy_list(inst.fpest.estimate())


def pipeline_query(inst):
    return inst.query()


def median_query(instances):
    if not instances or len(instances) % 2 == 0:
        raise ValueError("median_query needs an odd number of instances")
    values = []
    failed = 0
    for inst in instances:
        try:
            values.append(inst.query())
        except (HighEndFailure, LightEstimatorException) as e:
            log.warning("instance abstained: %s", e)
            failed += 1
    if not values:
        raise AllInstancesFailed(failed)
    cfg = instances[0].cfg
    return EstimateRecord(float(np.median(values)), failed, cfg.config_hash,
                          sum(inst.space_bits() for inst in instances))
