# -*- coding: utf-8 -*-
"""Geometric-mean estimators over k-wise independent stable projections.

``GmeSketch`` keeps y = Ax for one gme_rows x n matrix of stable variates.
``FpEstBox`` is the constant-factor F_p estimator built as a median of
group means of GME estimates. ``LightState`` runs R_light buckets in each
of reps_light repetitions; instance j of the R_light * reps_light sketches
draws its row-l variate at key i from the field value j*A_l(i) + B_l(i),
so the instances are pairwise independent and a buffered batch needs only
the two polynomial banks A and B evaluated at its points.
"""
import logging

import numpy as np

import hashing
import polyeval
import stable
from codec import Reader, Writer
from polyeval import MERSENNE_61

log = logging.getLogger(__name__)

# |y_j| past this is reported as an accumulator overflow
ACCUMULATOR_LIMIT = 2.0 ** 62


class LightEstimatorException(Exception):

    """Raised when every light bucket is excluded, so there is nothing
    left to scale up into an estimate."""
    pass


def gme_estimates(y, p, log_c, fp_tilde=None, eps=None):
    """GME estimate over the last axis of ``y``, for every leading index.

    The estimate is C * prod |y_j|^(p/t), computed in log space, and 0 when
    any y_j is 0. With ``fp_tilde`` it is capped at fp_tilde / eps.
    """
    y = np.asarray(y, dtype=np.float64)
    rows = y.shape[-1]
    absy = np.abs(y)
    zero = (absy == 0).any(axis=-1)
    logs = np.log(np.where(zero[..., None], 1.0, absy)).sum(axis=-1)
    with np.errstate(over='ignore'):
        est = np.exp(log_c + (p / float(rows)) * logs)
    est = np.where(zero, 0.0, est)
    if fp_tilde is not None:
        est = np.minimum(est, fp_tilde / eps)
    return est


def median_of_means(estimates):
    """Mean over the last axis, then median over the one before it."""
    return np.median(np.mean(estimates, axis=-1), axis=-1)


def _check_accumulators(y, owner):
    if not np.all(np.isfinite(y)) or np.abs(y).max() > ACCUMULATOR_LIMIT:
        log.warning("%s accumulator overflow (|y| > 2^62 or not finite)",
                    owner)
        return True
    return False


class GmeSketch(object):

    def __init__(self, p, gme_rows, k_wise, rng=None, precision_bits=None,
                 bank=None):
        self.sampler = stable.StableSampler(p, precision_bits)
        if bank is None:
            bank = hashing.SeedBank.new(gme_rows, k_wise, MERSENNE_61, rng)
        self.bank = bank
        self.gme_rows = bank.count
        self.log_c = stable.log_gme_constant(self.gme_rows, p)
        self.y = np.zeros(self.gme_rows)
        self.overflowed = False

    @classmethod
    def from_config(cls, cfg, rng):
        return cls(cfg.p, cfg.gme_rows, cfg.k_wise, rng, cfg.precision_bits)

    def variates(self, indices):
        """Stable variates Z_j(i), one row per GME row."""
        return stable.variates(self.sampler, self.bank.field_values(indices))

    def update_many(self, indices, deltas):
        if len(indices) == 0:
            return
        deltas = np.asarray(deltas, dtype=np.float64)
        self.y += (self.variates(indices) * deltas).sum(axis=1)
        self.overflowed |= _check_accumulators(self.y, 'gme')

    def estimate(self, fp_tilde=None, eps=None):
        return float(gme_estimates(self.y, self.sampler.p, self.log_c,
                                   fp_tilde, eps))

    def merge(self, other):
        if self.bank != other.bank or self.sampler != other.sampler:
            raise ValueError("only sketches with identical seeds merge")
        self.y += other.y

    def space_bits(self):
        return self.y.size * 64 + self.bank.coeffs.size * 61

    def serialize(self):
        w = Writer('gme')
        w.f64(self.sampler.p)
        w.u32(self.sampler.precision_bits)
        w.bank(self.bank)
        w.array(self.y)
        return w.getvalue()

    @classmethod
    def deserialize(cls, data):
        r = Reader(data, 'gme')
        p = r.f64()
        bits = r.u32()
        bank = r.bank()
        sk = cls(p, bank.count, bank.k, precision_bits=bits, bank=bank)
        sk.y = r.array()
        r.finish()
        return sk


def gme_update(sk, u):
    sk.update_many([u.index], [u.delta])


def gme_estimate(sk, fp_tilde, eps):
    return sk.estimate(fp_tilde, eps)


class FpEstBox(object):

    """Constant-factor F_p estimate: median over ``groups`` of the mean of
    ``group_size`` independent GME estimates at accuracy ``eps_prime``."""

    def __init__(self, p, groups, group_size, gme_rows, k_wise, rng,
                 precision_bits=None, eps_prime=1.0 / 7):
        self.sampler = stable.StableSampler(p, precision_bits)
        self.eps_prime = eps_prime
        self.shape = (groups, group_size, gme_rows)
        self.bank = hashing.SeedBank.new(groups * group_size * gme_rows,
                                         k_wise, MERSENNE_61, rng)
        self.log_c = stable.log_gme_constant(gme_rows, p)
        self.y = np.zeros(self.shape)

    @classmethod
    def from_config(cls, cfg, rng, groups=None):
        return cls(cfg.p, groups or cfg.fpest_groups, cfg.fpest_group_size,
                   cfg.gme_rows, cfg.fpest_k_wise, rng, cfg.precision_bits,
                   cfg.fpest_eps)

    def update_many(self, indices, deltas):
        if len(indices) == 0:
            return
        z = stable.variates(self.sampler, self.bank.field_values(indices))
        z = z.reshape(self.shape + (len(indices),))
        self.y += (z * np.asarray(deltas, dtype=np.float64)).sum(axis=-1)

    def estimate(self):
        ests = gme_estimates(self.y, self.sampler.p, self.log_c)
        return float(median_of_means(ests))

    def is_zero(self):
        return not self.y.any()

    def merge(self, other):
        if self.bank != other.bank:
            raise ValueError("only boxes with identical seeds merge")
        self.y += other.y

    def space_bits(self):
        return self.y.size * 64 + self.bank.coeffs.size * 61


class LightState(object):

    def __init__(self, p, eps, gme_rows, k_wise, R, reps, d, bucket_hash,
                 rng, precision_bits=None):
        self.sampler = stable.StableSampler(p, precision_bits)
        self.eps = eps
        self.R = R
        self.reps = reps
        self.d = d
        self.bucket_hash = bucket_hash
        self.a_bank = hashing.SeedBank.new(gme_rows, k_wise, MERSENNE_61,
                                           rng.spawn('a'))
        self.b_bank = hashing.SeedBank.new(gme_rows, k_wise, MERSENNE_61,
                                           rng.spawn('b'))
        self.log_c = stable.log_gme_constant(gme_rows, p)
        self.y = np.zeros((reps, R, gme_rows))
        self.buffer_indices = []
        self.buffer_deltas = []
        self.flushes = 0
        self.last_clipped = 0.0
        self.overflowed = False

    @classmethod
    def from_config(cls, cfg, rng, bucket_hash=None):
        if bucket_hash is None:
            bucket_hash = hashing.uniform_on_set_new(
                cfg.R_light, cfg.R_light, cfg.c_h, rng.spawn('h'))
        return cls(cfg.p, cfg.eps, cfg.gme_rows, cfg.k_wise, cfg.R_light,
                   cfg.reps_light, cfg.d, bucket_hash, rng.spawn('light'),
                   cfg.precision_bits)

    @property
    def gme_rows(self):
        return self.y.shape[2]

    def sketch_ids(self, buckets):
        """Instance id j = rep * R + bucket + 1 for every rep, (reps, b)."""
        reps = np.arange(self.reps, dtype=np.uint64)[:, None]
        return reps * np.uint64(self.R) + \
            np.asarray(buckets, dtype=np.uint64)[None, :] + np.uint64(1)

    def instance_field_values(self, ids, a_vals, b_vals):
        """j*A + B mod q, shaped (reps, rows, b)."""
        return hashing.addmod(hashing.mulmod(ids[:, None, :], a_vals[None]),
                              b_vals[None])

    def _apply(self, indices, deltas, a_vals, b_vals):
        buckets = self.bucket_hash.eval_many(indices).astype(np.int64)
        ids = self.sketch_ids(buckets)
        z = stable.variates(self.sampler,
                            self.instance_field_values(ids, a_vals, b_vals))
        z = z * np.asarray(deltas, dtype=np.float64)
        rep_idx = np.broadcast_to(np.arange(self.reps)[:, None], ids.shape)
        bucket_idx = np.broadcast_to(buckets[None, :], ids.shape)
        np.add.at(self.y, (rep_idx, bucket_idx), z.transpose(0, 2, 1))
        self.overflowed |= _check_accumulators(self.y, 'light')

    def update_many(self, indices, deltas):
        pos = 0
        total = len(indices)
        while pos < total:
            take = min(self.d - len(self.buffer_indices), total - pos)
            self.buffer_indices.extend(int(i) for i in indices[pos:pos + take])
            self.buffer_deltas.extend(int(v) for v in deltas[pos:pos + take])
            pos += take
            if len(self.buffer_indices) >= self.d:
                self.flush_buffer()

    def flush_buffer(self):
        if not self.buffer_indices:
            return
        points = self.buffer_indices
        tree = polyeval.build_product_tree(points)
        a_vals = np.array([polyeval.multipoint_eval(row, tree)
                           for row in self.a_bank.coeffs.tolist()],
                          dtype=np.uint64)
        b_vals = np.array([polyeval.multipoint_eval(row, tree)
                           for row in self.b_bank.coeffs.tolist()],
                          dtype=np.uint64)
        self._apply(np.asarray(points, dtype=np.uint64),
                    self.buffer_deltas, a_vals, b_vals)
        self.buffer_indices = []
        self.buffer_deltas = []
        self.flushes += 1

    def update_unbuffered_many(self, indices, deltas):
        """Per-update Horner path; the reference for the buffered one."""
        for i, v in zip(indices, deltas):
            keys = np.array([i], dtype=np.uint64)
            self._apply(keys, [v], self.a_bank.field_values(keys),
                        self.b_bank.field_values(keys))

    def report_reps(self, exclude=(), fp_tilde=None):
        """Per-repetition estimates (R/|I|) * sum_{j in I} Est(bucket j)."""
        self.flush_buffer()
        excluded = set(int(b) for b in exclude)
        kept = [b for b in range(self.R) if b not in excluded]
        if not kept:
            raise LightEstimatorException(
                "all {} light buckets are excluded".format(self.R))
        raw = gme_estimates(self.y[:, kept, :], self.sampler.p, self.log_c)
        if fp_tilde is None:
            ests = raw
            self.last_clipped = 0.0
        else:
            ests = np.minimum(raw, fp_tilde / self.eps)
            self.last_clipped = float(np.mean(raw > ests))
        return self.R / float(len(kept)) * ests.sum(axis=1)

    def report(self, exclude=(), fp_tilde=None):
        return float(np.mean(self.report_reps(exclude, fp_tilde)))

    def merge(self, other):
        if self.a_bank != other.a_bank or self.b_bank != other.b_bank:
            raise ValueError("only light states with identical seeds merge")
        self.flush_buffer()
        other.flush_buffer()
        self.y += other.y

    def space_bits(self):
        return (self.y.size * 64 +
                (self.a_bank.coeffs.size + self.b_bank.coeffs.size) * 61 +
                self.d * 2 * 64)

    def serialize(self):
        self.flush_buffer()
        w = Writer('light')
        w.f64(self.sampler.p)
        w.u32(self.sampler.precision_bits)
        w.f64(self.eps)
        w.u64(self.d)
        w.bank(self.a_bank)
        w.bank(self.b_bank)
        w.array(self.y)
        return w.getvalue()

    @classmethod
    def deserialize(cls, data, bucket_hash):
        r = Reader(data, 'light')
        st = cls.__new__(cls)
        p = r.f64()
        st.sampler = stable.StableSampler(p, r.u32())
        st.eps = r.f64()
        st.d = r.u64()
        st.a_bank = r.bank()
        st.b_bank = r.bank()
        st.y = r.array()
        r.finish()
        st.reps, st.R, rows = st.y.shape
        st.bucket_hash = bucket_hash
        st.log_c = stable.log_gme_constant(rows, st.sampler.p)
        st.buffer_indices = []
        st.buffer_deltas = []
        st.flushes = 0
        st.last_clipped = 0.0
        st.overflowed = False
        return st


def light_update(st, u):
    st.update_many([u.index], [u.delta])


def light_update_unbuffered(st, u):
    st.update_unbuffered_many([u.index], [u.delta])


def flush_buffer(st):
    st.flush_buffer()


def light_report(st, exclude=(), fp_tilde=None):
    return st.report(exclude, fp_tilde)
