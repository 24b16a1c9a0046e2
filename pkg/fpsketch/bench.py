# -*- coding: utf-8 -*-
"""Per-update latency against eps on a fixed synthetic stream."""
import logging
import math
import time

import numpy as np
import psutil

import core
import generators
import prg
from lightestimator import LightState
from pipeline import FpEstimatorInstance

log = logging.getLogger(__name__)

COLUMNS = ('eps', 'mode', 'updates', 'mean_us', 'p50_us', 'p99_us',
           'rss_mb')

MODES = ('light', 'light-unbuffered', 'instance')


def _target(mode, cfg, seed):
    rng = prg.CounterPRG(seed, 'bench')
    if mode == 'instance':
        inst = FpEstimatorInstance(cfg, rng)
        return inst.update_many, lambda: None
    light = LightState.from_config(cfg, rng)
    if mode == 'light-unbuffered':
        return light.update_unbuffered_many, lambda: None
    return light.update_many, light.flush_buffer


def time_updates(mode, cfg, stream, seed):
    """Wall time of every single update, in microseconds.

    A flush is charged to the update that triggers it, so buffered modes
    show the batch cost in their tail percentiles.
    """
    update, finish = _target(mode, cfg, seed)
    out = np.empty(len(stream))
    clock = time.perf_counter
    for k, (i, v) in enumerate(stream.updates()):
        start = clock()
        update([i], [v])
        out[k] = clock() - start
    finish()
    return out * 1e6


def bench_sweep(eps_values, p=1.0, n=10000, m=2000, seed=0,
                modes=('light', 'light-unbuffered')):
    rng = prg.CounterPRG(seed, 'bench-stream').numpy_rng()
    stream = generators.zipf(n, m, 10, rng)
    process = psutil.Process()
    rows = []
    for eps in eps_values:
        cfg = core.derive_config(p, eps, 0.25, n, m, 10)
        for mode in modes:
            lat = time_updates(mode, cfg, stream, seed)
            rows.append({
                'eps': eps,
                'mode': mode,
                'updates': len(lat),
                'mean_us': float(lat.mean()),
                'p50_us': float(np.percentile(lat, 50)),
                'p99_us': float(np.percentile(lat, 99)),
                'rss_mb': process.memory_info().rss / float(1 << 20),
            })
            log.info("eps=%g %s: %.1f us/update", eps, mode,
                     rows[-1]['mean_us'])
    return rows


def fit_exponent(rows, mode):
    """Slope of log(mean latency) against log(1/eps) for one mode."""
    pts = [(math.log(1.0 / r['eps']), math.log(r['mean_us']))
           for r in rows if r['mode'] == mode]
    if len(pts) < 2:
        return None
    xs, ys = zip(*pts)
    return float(np.polyfit(xs, ys, 1)[0])
