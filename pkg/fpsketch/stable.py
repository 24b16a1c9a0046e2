# -*- coding: utf-8 -*-
"""Symmetric p-stable variates and their absolute moments.

Variates come from the Chambers-Mallows-Stuck transform of two uniforms.
The uniforms are carved from one field element of a k-wise independent
hash, so a variate is a pure function of (p, field value, precision).
"""
import logging
import math

import numpy as np
from scipy import special

import config

log = logging.getLogger(__name__)

FIELD_HALF_BITS = 30

_LOW = np.nextafter(0.0, 1.0)
_HIGH = np.nextafter(1.0, 0.0)


class StableException(Exception):

    """Raised for a stability index outside (0, 2) or a moment order
    outside the range where the moment is finite.
    """
    pass


class StableSampler(object):

    def __init__(self, p, precision_bits=None):
        if not 0 < p < 2:
            raise StableException("p must lie in (0, 2), got {}".format(p))
        if precision_bits is None:
            precision_bits = config.PRECISION_BITS
        if not 1 <= precision_bits <= FIELD_HALF_BITS:
            raise StableException(
                "precision_bits must lie in [1, {}]".format(FIELD_HALF_BITS))
        self.p = float(p)
        self.precision_bits = int(precision_bits)

    def __eq__(self, other):
        return (isinstance(other, StableSampler) and self.p == other.p and
                self.precision_bits == other.precision_bits)

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return '<StableSampler p={} bits={}>'.format(self.p,
                                                    self.precision_bits)


def uniforms_from_field(values, precision_bits):
    """Split 61-bit field values into two uniforms on the midpoint grid.

    Bits [30, 60) give u1 and bits [0, 30) give u2; each keeps its top
    ``precision_bits`` bits and maps k to (k + 1/2) / 2^precision_bits.
    """
    values = np.asarray(values, dtype=np.uint64)
    mask = np.uint64((1 << FIELD_HALF_BITS) - 1)
    drop = np.uint64(FIELD_HALF_BITS - precision_bits)
    hi = ((values >> np.uint64(FIELD_HALF_BITS)) & mask) >> drop
    lo = (values & mask) >> drop
    scale = float(1 << precision_bits)
    return (hi.astype(np.float64) + 0.5) / scale, \
        (lo.astype(np.float64) + 0.5) / scale


def sample_pstable(sampler, u1, u2):
    scalar = np.ndim(u1) == 0 and np.ndim(u2) == 0
    # 0 and 1 are moved inward by one ulp
    u1 = np.clip(np.asarray(u1, dtype=np.float64), _LOW, _HIGH)
    u2 = np.clip(np.asarray(u2, dtype=np.float64), _LOW, _HIGH)
    p = sampler.p
    theta = math.pi * (u1 - 0.5)
    if p == 1.0:
        out = np.tan(theta)
    else:
        w = -np.log(u2)
        out = (np.sin(p * theta) / np.cos(theta) ** (1.0 / p) *
               (np.cos((1.0 - p) * theta) / w) ** ((1.0 - p) / p))
    if scalar:
        return float(out)
    return out


def variates(sampler, field_values):
    """Stable variates for an array of field values, elementwise."""
    u1, u2 = uniforms_from_field(field_values, sampler.precision_bits)
    return sample_pstable(sampler, u1, u2)


def stable_abs_moment(p, lam):
    """E|Q|^lam for a standard symmetric p-stable Q, -1 < lam < p."""
    if not 0 < p < 2:
        raise StableException("p must lie in (0, 2), got {}".format(p))
    if not -1 < lam < p:
        raise StableException(
            "moment order {} outside (-1, {})".format(lam, p))
    if lam == 0:
        return 1.0
    return float(2.0 / math.pi * special.gamma(1.0 - lam / p) *
                 special.gamma(lam) * math.sin(math.pi * lam / 2.0))


def log_gme_constant(gme_rows, p):
    if gme_rows <= max(4.0, 4.0 / p):
        raise StableException(
            "gme_rows must exceed max(4, 4/p), got {}".format(gme_rows))
    return -gme_rows * math.log(stable_abs_moment(p, p / float(gme_rows)))


def gme_constant(gme_rows, p):
    return math.exp(log_gme_constant(gme_rows, p))


def gme_second_moment(gme_rows, p):
    """E[est^2] / F_p^2 for one GME estimate over ``gme_rows`` rows.

    Finite only for gme_rows > 2; the variance of the normalised estimate is
    this value minus one.
    """
    if gme_rows <= 2:
        raise StableException(
            "the GME second moment needs more than 2 rows, got {}".format(
                gme_rows))
    return math.exp(2.0 * log_gme_constant(gme_rows, p) + gme_rows *
                    math.log(stable_abs_moment(p, 2.0 * p / gme_rows)))
