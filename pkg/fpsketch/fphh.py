# -*- coding: utf-8 -*-
"""F_p heavy hitters by dyadic descent over BasicFpHH levels.

Level k buckets key i by its k-bit prefix (i - 1) >> (L - k). Each level
keeps T_rep repetitions of R buckets, every bucket an FpEst box over the
keys hashed into it. The stable variates of one repetition are shared by
all its levels and buckets (a key lands in exactly one bucket per level),
while repetitions draw independent variates. A CountSketch recovers signs.
"""
import collections
import logging

import numpy as np

import core
import hashing
import stable
from lightestimator import FpEstBox, gme_estimates, median_of_means
from polyeval import MERSENNE_61

log = logging.getLogger(__name__)

HeavyHitterRecord = collections.namedtuple('HeavyHitterRecord',
                                           ['index', 'sign', 'mag_p'])


class SignSketch(object):

    """CountSketch: A[i, h_i(v)] += sigma_i(v) * x_v.

    h is pairwise and sigma 4-wise independent.
    """

    def __init__(self, rows, columns, rng):
        self.h_bank = hashing.SeedBank.new(rows, 2, columns, rng.spawn('h'))
        self.sigma_bank = hashing.SeedBank.new(rows, 4, 2,
                                               rng.spawn('sigma'))
        self.A = np.zeros((rows, columns), dtype=np.int64)

    @property
    def rows(self):
        return self.A.shape[0]

    def _cells(self, keys):
        H = self.h_bank.eval_many(keys).astype(np.int64)
        S = self.sigma_bank.signs(keys)
        rows = np.broadcast_to(np.arange(self.rows)[:, None], H.shape)
        return rows, H, S

    def update_many(self, keys, deltas):
        if len(keys) == 0:
            return
        rows, H, S = self._cells(keys)
        np.add.at(self.A, (rows, H), S * np.asarray(deltas, dtype=np.int64))

    def row_estimates(self, keys):
        """sigma_i(w) * A[i, h_i(w)] for every row i and key w."""
        rows, H, S = self._cells(keys)
        return S * self.A[rows, H]

    def estimate(self, keys):
        return np.median(self.row_estimates(keys), axis=0)

    def sign(self, keys):
        """Majority over rows of sigma_i(w) * sign(A[i, h_i(w)]); ties +1."""
        votes = np.sign(self.row_estimates(keys)).sum(axis=0)
        return np.where(votes >= 0, 1, -1)

    def merge(self, other):
        if self.h_bank != other.h_bank or self.sigma_bank != other.sigma_bank:
            raise ValueError("only sketches with identical seeds merge")
        self.A += other.A

    def space_bits(self):
        return (self.A.size * 64 +
                (self.h_bank.coeffs.size + self.sigma_bank.coeffs.size) * 61)


class FpHH(object):

    def __init__(self, p, phi, delta, universe, knobs, rng):
        sizes = core.heavy_hitter_sizes(phi, delta, universe, p, knobs)
        self.p = p
        self.phi = phi
        self.universe = universe
        self.R = sizes['fphh_R']
        self.T_rep = sizes['fphh_T_rep']
        self.depth = sizes['fphh_levels']
        self.levels = list(range(sizes['fphh_top_level'], self.depth + 1))
        groups = sizes['fphh_bucket_groups']
        self.box_shape = (groups, knobs.fpest_group_size, knobs.gme_rows)
        self.sampler = stable.StableSampler(p, knobs.precision_bits)
        self.log_c = stable.log_gme_constant(knobs.gme_rows, p)
        self.variate_bank = hashing.SeedBank.new(
            self.T_rep * int(np.prod(self.box_shape)), knobs.fpest_k_wise,
            MERSENNE_61, rng.spawn('variates'))
        self.bucket_banks = [
            hashing.SeedBank.new(self.T_rep, 2, self.R,
                                 rng.spawn('level-{}'.format(k)))
            for k in self.levels]
        self.Y = np.zeros((len(self.levels), self.T_rep, self.R) +
                          self.box_shape)
        self.global_box = FpEstBox(
            p, sizes['fphh_global_groups'], knobs.fpest_group_size,
            knobs.gme_rows, knobs.fpest_k_wise, rng.spawn('global'),
            knobs.precision_bits, knobs.fpest_eps)
        self.signs = SignSketch(sizes['cs_rows'], sizes['cs_columns'],
                                rng.spawn('countsketch'))
        self.frontier_sizes = []

    @classmethod
    def from_config(cls, cfg, rng, phi=None, universe=None):
        return cls(cfg.p, phi or cfg.phi, cfg.delta, universe or cfg.N,
                   cfg, rng)

    def prefixes(self, keys, level):
        return (np.asarray(keys, dtype=np.int64) - 1) >> (self.depth - level)

    def bucket_of(self, level_index, prefixes):
        """h_j(prefix) for every repetition j, shaped (T_rep, len)."""
        bank = self.bucket_banks[level_index]
        return bank.eval_many(prefixes).astype(np.int64)

    def update_many(self, keys, deltas):
        if len(keys) == 0:
            return
        keys = np.asarray(keys, dtype=np.int64)
        deltas = np.asarray(deltas, dtype=np.int64)
        self.global_box.update_many(keys, deltas)
        self.signs.update_many(keys, deltas)
        z = stable.variates(self.sampler,
                            self.variate_bank.field_values(keys))
        z = z.reshape((self.T_rep,) + self.box_shape + (len(keys),))
        z = np.moveaxis(z * deltas.astype(np.float64), -1, 1)
        reps = np.broadcast_to(np.arange(self.T_rep)[:, None],
                               (self.T_rep, len(keys)))
        for li, level in enumerate(self.levels):
            buckets = self.bucket_of(li, self.prefixes(keys, level))
            np.add.at(self.Y[li], (reps, buckets), z)

    def query_many(self, level_index, prefixes):
        """Median over repetitions of the bucket estimate for each prefix."""
        prefixes = np.asarray(prefixes, dtype=np.int64)
        buckets = self.bucket_of(level_index, prefixes)
        reps = np.broadcast_to(np.arange(self.T_rep)[:, None], buckets.shape)
        cells = self.Y[level_index][reps, buckets]
        ests = gme_estimates(cells, self.p, self.log_c)
        return np.median(median_of_means(ests), axis=0)

    def report(self, phi=None, fp_tilde=None):
        if phi is None:
            phi = self.phi
        if fp_tilde is None:
            fp_tilde = self.global_box.estimate()
        self.frontier_sizes = []
        if fp_tilde <= 0:
            return []
        threshold = 0.75 * phi * fp_tilde
        cands = None
        mags = None
        for li, level in enumerate(self.levels):
            last = (self.universe - 1) >> (self.depth - level)
            if cands is None:
                cands = np.arange(last + 1, dtype=np.int64)
            else:
                cands = (2 * cands[:, None] + np.array([0, 1])).ravel()
                cands = cands[cands <= last]
            if cands.size == 0:
                return []
            self.frontier_sizes.append(int(cands.size))
            est = self.query_many(li, cands)
            keep = est >= threshold
            cands = cands[keep]
            mags = est[keep]
        keys = cands + 1
        if keys.size == 0:
            return []
        signs = self.signs.sign(keys)
        return [HeavyHitterRecord(int(k), int(s), float(m))
                for k, s, m in zip(keys, signs, mags)]

    def merge(self, other):
        if self.variate_bank != other.variate_bank or \
                self.bucket_banks != other.bucket_banks:
            raise ValueError("only finders with identical seeds merge")
        self.Y += other.Y
        self.global_box.merge(other.global_box)
        self.signs.merge(other.signs)

    def space_bits(self):
        seeds = (self.variate_bank.coeffs.size +
                 sum(b.coeffs.size for b in self.bucket_banks)) * 61
        return (self.Y.size * 64 + seeds + self.global_box.space_bits() +
                self.signs.space_bits())


def fphh_update(state, u):
    state.update_many([u.index], [u.delta])


def basic_query(state, level, prefix):
    return float(state.query_many(state.levels.index(level), [prefix])[0])


def fphh_report(state, phi=None, fp_tilde=None):
    return state.report(phi, fp_tilde)


def format_records(records):
    return [u'{} {:+d} {!r}'.format(r.index, r.sign, r.mag_p)
            for r in records]
