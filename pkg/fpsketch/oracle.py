# -*- coding: utf-8 -*-
"""Brute-force ground truth: materialize x and compute F_p exactly."""
import collections
import logging
import math

import numpy as np

import config

log = logging.getLogger(__name__)

OracleResult = collections.namedtuple('OracleResult',
                                      ['fp', 'heavy', 'x', 'y'])


class OracleException(Exception):

    """The universe is too large to materialize."""
    pass


def materialize(indices, deltas, n):
    if n > config.ORACLE_MAX_N:
        raise OracleException(
            "n={} exceeds the oracle limit of {}".format(n,
                                                         config.ORACLE_MAX_N))
    x = np.zeros(n, dtype=np.int64)
    np.add.at(x, np.asarray(indices, dtype=np.int64) - 1,
              np.asarray(deltas, dtype=np.int64))
    return x


def exact_fp(x, p):
    """sum |x_i|^p over the nonzero coordinates, for any p > 0."""
    nz = np.abs(x[x != 0]).astype(np.float64)
    return math.fsum(nz ** p)


def heavy_set(x, p, phi):
    """(index, sign) of every i with |x_i|^p >= phi * F_p, by index."""
    fp = exact_fp(x, p)
    if fp == 0:
        return []
    mass = np.abs(x).astype(np.float64) ** p
    hits = np.nonzero((x != 0) & (mass >= phi * fp))[0]
    return [(int(i) + 1, int(np.sign(x[i]))) for i in hits]


def reduced_vector(reduction, x):
    """y_i = sum over h1(j) = i of sigma(j) x_j, as a vector over [N]."""
    y = np.zeros(reduction.N, dtype=np.int64)
    support = np.nonzero(x)[0] + 1
    if support.size:
        np.add.at(y, reduction.reduce(support) - 1,
                  reduction.signs(support) * x[support - 1])
    return y


def run_oracle(indices, deltas, n, p, phi=None, reduction=None):
    x = materialize(indices, deltas, n)
    heavy = heavy_set(x, p, phi) if phi is not None else []
    y = reduced_vector(reduction, x) if reduction is not None else None
    return OracleResult(exact_fp(x, p), heavy, x, y)


def relative_error(estimate, exact):
    if exact == 0:
        return 0.0 if estimate == 0 else float('inf')
    return abs(estimate - exact) / exact
