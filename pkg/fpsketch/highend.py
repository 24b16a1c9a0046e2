# -*- coding: utf-8 -*-
"""Roots-of-unity sketch for the heavy part of F_p.

Row j hashes key v to bucket h_j(v) in [s] and phase g_j(v) in [r]; the
counter D[j, h_j(v)] collects exp(2 pi i g_j(v) / r) * x_v. For a heavy key
w, the T first rows where no other heavy key shares w's bucket give

    x*_w = (1/T) sum_k conj(root(g_j(w))) * sign(x_w) * D[j, h_j(w)]

and the estimate is the sum over w of |x*_w|^p cos(p arg x*_w).
"""
import collections
import logging
import math

import numpy as np

import hashing
from codec import Reader, Writer

log = logging.getLogger(__name__)

IsolationTable = collections.namedtuple('IsolationTable',
                                        ['ws', 'rows', 'H', 'G'])


class HighEndFailure(Exception):

    """The sketch declines to estimate; the instance should abstain."""
    pass


class IsolationFailure(HighEndFailure):

    """Some heavy key is isolated in fewer than T rows."""

    def __init__(self, w, n_w, T):
        super(IsolationFailure, self).__init__(
            "key {} isolated in {} rows, need {}".format(w, n_w, T))
        self.w = w
        self.n_w = n_w


class NegativeRealPartFailure(HighEndFailure):

    """A recovered x*_w has negative real part."""

    def __init__(self, w, value):
        super(NegativeRealPartFailure, self).__init__(
            "Re[x*] = {} < 0 for key {}".format(value.real, w))
        self.w = w
        self.value = value


def taylor_cos(theta, degree):
    """cos(theta) from its Maclaurin series up to theta^degree."""
    term = 1.0
    total = 1.0
    sq = theta * theta
    for k in range(1, degree // 2 + 1):
        term *= -sq / ((2 * k - 1) * (2 * k))
        total += term
    return total


def abs_power(z, p):
    """|z|^p as exp((p/2) ln |z|^2), and 0 when |z|^2 underflows."""
    sq = z.real * z.real + z.imag * z.imag
    if sq == 0:
        return 0.0
    return math.exp(0.5 * p * math.log(sq))


class HighEndSketch(object):

    def __init__(self, p, t_rows, s, r, r_h, r_g, T, taylor_degree, rng,
                 fixed_point=False, frac_bits=None, max_heavy=None,
                 counter_bits=64):
        if r < 2 or r % 2:
            raise ValueError("r must be even and at least 2")
        self.p = p
        self.T = T
        self.taylor_degree = taylor_degree
        self.max_heavy = max_heavy
        self.counter_bits = counter_bits
        self.h_bank = hashing.SeedBank.new(t_rows, r_h, s, rng.spawn('h'))
        self.g_bank = hashing.SeedBank.new(t_rows, r_g, r, rng.spawn('g'))
        self.roots = np.exp(2j * np.pi * np.arange(r) / r)
        self.fixed_point = fixed_point
        self.frac_bits = frac_bits
        if fixed_point:
            scale = float(1 << frac_bits)
            self.roots_re = np.rint(self.roots.real * scale).astype(np.int64)
            self.roots_im = np.rint(self.roots.imag * scale).astype(np.int64)
            self.re = np.zeros((t_rows, s), dtype=np.int64)
            self.im = np.zeros((t_rows, s), dtype=np.int64)
        else:
            self.counters = np.zeros((t_rows, s), dtype=np.complex128)

    @classmethod
    def from_config(cls, cfg, rng):
        frac_bits = cfg.highend_frac_bits
        headroom = int(math.ceil(math.log(cfg.m_bound * cfg.M + 1, 2))) + 1
        if cfg.highend_fixed_point and frac_bits + headroom > 63:
            frac_bits = 63 - headroom
            log.warning("fixed-point counters limited to %d fractional bits",
                        frac_bits)
        return cls(cfg.p, cfg.t_rows, cfg.s, cfg.r, cfg.r_h, cfg.r_g, cfg.T,
                   cfg.taylor_degree, rng, cfg.highend_fixed_point,
                   frac_bits, int(2.0 / cfg.alpha), frac_bits + headroom)

    @property
    def t_rows(self):
        return self.h_bank.count

    @property
    def s(self):
        return self.h_bank.range_m

    @property
    def r(self):
        return self.g_bank.range_m

    def update_many(self, keys, deltas):
        if len(keys) == 0:
            return
        H = self.h_bank.eval_many(keys).astype(np.int64)
        G = self.g_bank.eval_many(keys).astype(np.int64)
        rows = np.broadcast_to(np.arange(self.t_rows)[:, None], H.shape)
        deltas = np.asarray(deltas, dtype=np.int64)
        if self.fixed_point:
            np.add.at(self.re, (rows, H), self.roots_re[G] * deltas)
            np.add.at(self.im, (rows, H), self.roots_im[G] * deltas)
        else:
            np.add.at(self.counters, (rows, H), self.roots[G] * deltas)

    def counter_matrix(self):
        if self.fixed_point:
            scale = float(1 << self.frac_bits)
            return self.re / scale + 1j * (self.im / scale)
        return self.counters

    def build_isolation(self, heavy):
        heavy = [int(w) for w in heavy]
        if len(set(heavy)) != len(heavy):
            raise ValueError("heavy list contains duplicate keys")
        if self.max_heavy is not None and len(heavy) > self.max_heavy:
            raise ValueError("heavy list longer than 2/alpha = {}".format(
                self.max_heavy))
        if not heavy:
            empty = np.zeros((self.t_rows, 0), dtype=np.int64)
            return IsolationTable([], [], empty, empty)
        H = self.h_bank.eval_many(heavy).astype(np.int64)
        G = self.g_bank.eval_many(heavy).astype(np.int64)
        isolated = np.zeros(H.shape, dtype=bool)
        for j in range(self.t_rows):
            _, inverse, counts = np.unique(H[j], return_inverse=True,
                                           return_counts=True)
            isolated[j] = counts[inverse] == 1
        rows = [np.nonzero(isolated[:, col])[0] for col in range(len(heavy))]
        for w, hits in zip(heavy, rows):
            if len(hits) < self.T:
                raise IsolationFailure(w, len(hits), self.T)
        return IsolationTable(heavy, rows, H, G)

    def recover(self, table, col, sign):
        """x*_w for the heavy key in column ``col`` of ``table``."""
        rows = table.rows[col][:self.T]
        D = self.counter_matrix()[rows, table.H[rows, col]]
        phases = np.conj(self.roots[table.G[rows, col]])
        return complex(np.mean(phases * sign * D))

    def estimate(self, table, signs):
        signs = dict((int(w), s) for w, s in signs)
        psi = 0.0
        for col, w in enumerate(table.ws):
            x_star = self.recover(table, col, signs[w])
            if x_star.real < 0:
                raise NegativeRealPartFailure(w, x_star)
            angle = math.atan2(x_star.imag, x_star.real)
            psi += abs_power(x_star, self.p) * \
                taylor_cos(self.p * angle, self.taylor_degree)
        return psi

    def merge(self, other):
        if self.h_bank != other.h_bank or self.g_bank != other.g_bank:
            raise ValueError("only sketches with identical seeds merge")
        if self.fixed_point:
            self.re += other.re
            self.im += other.im
        else:
            self.counters += other.counters

    def space_bits(self):
        per_counter = 2 * (self.counter_bits if self.fixed_point else 64)
        seeds = (self.h_bank.coeffs.size + self.g_bank.coeffs.size) * 61
        return self.t_rows * self.s * per_counter + seeds

    def serialize(self):
        w = Writer('highend')
        w.f64(self.p)
        w.u32(self.T)
        w.u32(self.taylor_degree)
        w.u32(1 if self.fixed_point else 0)
        w.u32(self.frac_bits or 0)
        w.u64(self.max_heavy or 0)
        w.u32(self.counter_bits)
        w.bank(self.h_bank)
        w.bank(self.g_bank)
        if self.fixed_point:
            w.array(self.re)
            w.array(self.im)
        else:
            w.array(self.counters)
        return w.getvalue()

    @classmethod
    def deserialize(cls, data):
        r = Reader(data, 'highend')
        sk = cls.__new__(cls)
        sk.p = r.f64()
        sk.T = r.u32()
        sk.taylor_degree = r.u32()
        sk.fixed_point = bool(r.u32())
        sk.frac_bits = r.u32() or None
        sk.max_heavy = r.u64() or None
        sk.counter_bits = r.u32()
        sk.h_bank = r.bank()
        sk.g_bank = r.bank()
        sk.roots = np.exp(2j * np.pi * np.arange(sk.r) / sk.r)
        if sk.fixed_point:
            scale = float(1 << sk.frac_bits)
            sk.roots_re = np.rint(sk.roots.real * scale).astype(np.int64)
            sk.roots_im = np.rint(sk.roots.imag * scale).astype(np.int64)
            sk.re = r.array()
            sk.im = r.array()
        else:
            sk.counters = r.array()
        r.finish()
        return sk


def highend_update(sk, u):
    sk.update_many([u.index], [u.delta])


def build_isolation(sk, heavy):
    return sk.build_isolation(heavy)


def highend_estimate(sk, table, signed_heavy):
    return sk.estimate(table, signed_heavy)
