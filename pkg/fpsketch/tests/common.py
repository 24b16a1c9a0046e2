# -*- coding: utf-8 -*-
import os

import numpy as np

# Set environment variable so config.py uses a test environment
os.environ['FPSKETCH_ENV'] = 'test'
import config  # noqa
import core
import prg

# p=1, eps=1/4, delta=1/4 keeps every sketch small under the test profile
DEFAULT_PARAMS = dict(p=1.0, eps=0.25, delta=0.25, n=1000, m_bound=5000,
                      M=100)


def make_config(overrides=None, **params):
    merged = dict(DEFAULT_PARAMS)
    merged.update(params)
    return core.derive_config(overrides=overrides, **merged)


def rng(seed=1, label='test'):
    return prg.CounterPRG(seed, label)


def random_updates(n, m, M, seed=0):
    """m updates with indices in [1, n] and deltas in [-M, M]."""
    gen = rng(seed, 'updates').numpy_rng()
    indices = gen.integers(1, n + 1, size=m)
    deltas = gen.integers(-M, M + 1, size=m)
    return indices, deltas


def cancelled(indices, deltas):
    """The stream followed by its exact negation, shuffled."""
    gen = np.random.default_rng(7)
    all_indices = np.concatenate([indices, indices])
    all_deltas = np.concatenate([deltas, -np.asarray(deltas)])
    order = gen.permutation(len(all_indices))
    return all_indices[order], all_deltas[order]


def split(indices, deltas, seed=0):
    """Random partition of a stream into two substreams."""
    gen = np.random.default_rng(seed)
    left = gen.random(len(indices)) < 0.5
    indices = np.asarray(indices)
    deltas = np.asarray(deltas)
    return (indices[left], deltas[left]), (indices[~left], deltas[~left])
