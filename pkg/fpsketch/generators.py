# -*- coding: utf-8 -*-
"""Synthetic turnstile streams for the acceptance batteries and benches.

Every generator takes a numpy Generator (see ``prg.CounterPRG.numpy_rng``)
and returns a StreamFile.
"""
import numpy as np

from streamfile import StreamFile


def _deltas(m, M, rng):
    return rng.integers(1, M + 1, size=m)


def point_mass(n, m, M, rng, index=None):
    if index is None:
        index = int(rng.integers(1, n + 1))
    return StreamFile.from_updates(np.full(m, index), _deltas(m, M, rng),
                                   n, M)


def uniform(n, m, M, rng, support=None):
    support = support or n
    keys = rng.choice(n, size=support, replace=False) + 1
    indices = keys[rng.integers(0, support, size=m)]
    return StreamFile.from_updates(indices, _deltas(m, M, rng), n, M)


def zipf(n, m, M, rng, theta=1.1):
    """Keys drawn with Pr[rank k] proportional to k^-theta; ranks are
    assigned to keys by a random permutation."""
    weights = 1.0 / np.arange(1, n + 1) ** theta
    ranks = rng.choice(n, size=m, p=weights / weights.sum())
    keys = rng.permutation(n) + 1
    return StreamFile.from_updates(keys[ranks], _deltas(m, M, rng), n, M)


def planted(n, m, M, rng, heavy=5, share=0.5, light=None):
    """``heavy`` keys receive ``share`` of the updates, spread evenly; the
    rest go uniformly to ``light`` other keys (default: all others)."""
    keys = rng.permutation(n) + 1
    heavy_keys = keys[:heavy]
    light_keys = keys[heavy:heavy + light] if light else keys[heavy:]
    n_heavy = int(round(share * m))
    indices = np.concatenate([
        heavy_keys[np.arange(n_heavy) % heavy],
        light_keys[rng.integers(0, len(light_keys), size=m - n_heavy)]])
    indices = indices[rng.permutation(m)]
    return StreamFile.from_updates(indices, _deltas(m, M, rng), n, M)


def with_deletions(stream, fraction, rng):
    """Append deletions cancelling ``fraction`` of the updates, then
    shuffle the whole stream."""
    count = int(fraction * len(stream))
    picked = rng.choice(len(stream), size=count, replace=False)
    indices = np.concatenate([stream.indices, stream.indices[picked]])
    deltas = np.concatenate([stream.deltas, -stream.deltas[picked]])
    order = rng.permutation(len(indices))
    h = stream.header
    return StreamFile(h._replace(m=max(h.m, len(indices))),
                      indices[order], deltas[order])


GENERATORS = {
    'point': point_mass,
    'uniform': uniform,
    'zipf': zipf,
    'planted': planted,
}
