# -*- coding: utf-8 -*-
"""Monte-Carlo batteries.

A battery runs one trial function per seed, inline or on the rq queue, and
folds the per-trial dicts into a summary. Trial functions are module-level
and take only plain arguments so a worker can import and run them.
"""
import logging
import math

import numpy as np

import core
import generators
import oracle
import prg
from fphh import FpHH
from highend import HighEndFailure, HighEndSketch
from lightestimator import GmeSketch
from pipeline import AllInstancesFailed, FpEstimator

log = logging.getLogger(__name__)


def make_stream(kind, n, m, M, stream_seed, deletions=0.0, **kwargs):
    rng = prg.CounterPRG(stream_seed, 'stream').numpy_rng()
    stream = generators.GENERATORS[kind](n, m, M, rng, **kwargs)
    if deletions:
        stream = generators.with_deletions(stream, deletions, rng)
    return stream


def _support(stream):
    x = oracle.materialize(stream.indices, stream.deltas, stream.header.n)
    keys = np.nonzero(x)[0] + 1
    return x, keys, x[keys - 1]


def gme_trial(p, eps, kind, seed, n=1000, m=2000, M=10, stream_seed=0):
    stream = make_stream(kind, n, m, M, stream_seed)
    x, keys, values = _support(stream)
    cfg = core.derive_config(p, eps, 0.25, n, m, M)
    sk = GmeSketch.from_config(cfg, prg.CounterPRG(seed, 'gme'))
    sk.update_many(keys, values)
    return {'estimate': sk.estimate(), 'exact': oracle.exact_fp(x, p)}


def summarize_gme(results, eps, **params):
    est = np.array([r['estimate'] for r in results])
    exact = results[0]['exact']
    se = est.std(ddof=1) / math.sqrt(len(est)) if len(est) > 1 else 0.0
    return {
        'trials': len(est),
        'mean_ratio': float(est.mean() / exact),
        'second_moment_ratio': float(np.mean(est ** 2) / exact ** 2),
        'standard_error': float(se / exact),
        'unbiased': bool(abs(est.mean() - exact) <= eps * exact + 3 * se),
    }


def highend_trial(p, eps, seed, n=2000, heavy=5, light=500, alpha=0.02,
                  m=4000, M=10, stream_seed=0):
    stream = make_stream('planted', n, m, M, stream_seed, heavy=heavy,
                         share=0.5, light=light)
    x, keys, values = _support(stream)
    cfg = core.derive_config(p, eps, 0.25, n, m, M)
    sk = HighEndSketch.from_config(cfg, prg.CounterPRG(seed, 'highend'))
    sk.update_many(keys, values)
    L = oracle.heavy_set(x, p, alpha)
    fp = oracle.exact_fp(x, p)
    x_L = math.fsum(abs(float(x[w - 1])) ** p for w, _ in L)
    try:
        psi = sk.estimate(sk.build_isolation([w for w, _ in L]), L)
    except HighEndFailure as e:
        return {'failed': True, 'reason': str(e), 'fp': fp, 'x_L': x_L}
    return {'failed': False, 'psi': psi, 'fp': fp, 'x_L': x_L}


def summarize_highend(results, eps, c=8.0, **params):
    ok = [r for r in results if not r['failed']]
    hits = sum(1 for r in ok if abs(r['psi'] - r['x_L']) < c * eps * r['fp'])
    errors = [abs(r['psi'] - r['x_L']) / r['fp'] for r in ok]
    return {
        'trials': len(results),
        'failed': len(results) - len(ok),
        'success_rate': hits / float(len(results)),
        'median_error_over_eps': float(np.median(errors) / eps)
        if errors else None,
    }


def fphh_trial(p, phi, delta, seed, n=4096, heavy=5, borderline=20, m=20000,
               stream_seed=0, tol=0.05, overrides=None):
    rng = prg.CounterPRG(stream_seed, 'stream').numpy_rng()
    keys = rng.permutation(n)[:heavy + borderline] + 1
    # heavy keys sit at 2 phi of the mass, borderline keys just under phi/2
    x = np.zeros(n, dtype=np.int64)
    heavy_mass = 2 * phi
    rest = 1.0 - heavy * heavy_mass
    border_mass = min(0.45 * phi, rest / borderline)
    scale = float(m)
    x[keys[:heavy] - 1] = np.round((heavy_mass * scale) ** (1.0 / p))
    x[keys[heavy:] - 1] = np.round((border_mass * scale) ** (1.0 / p))
    x[keys - 1] *= np.where(rng.random(len(keys)) < 0.5, -1, 1)
    cfg = core.derive_config(p, 0.25, delta, n, m,
                             max(1, int(np.abs(x).max())), overrides)
    state = FpHH.from_config(cfg, prg.CounterPRG(seed, 'fphh'), phi=phi,
                             universe=n)
    support = np.nonzero(x)[0] + 1
    state.update_many(support, x[support - 1])
    records = state.report()
    truth = dict(oracle.heavy_set(x, p, phi))
    allowed = set(w for w, _ in oracle.heavy_set(x, p, phi / 2.0))
    reported = dict((rec.index, rec) for rec in records)
    mags_ok = all(
        (6.0 / 7 - tol) * abs(x[w - 1]) ** p <= rec.mag_p <=
        (9.0 / 7 + tol) * abs(x[w - 1]) ** p
        for w, rec in reported.items() if w in truth)
    return {
        'recall': all(w in reported for w in truth),
        'sound': all(w in allowed for w in reported),
        'signs': all(reported[w].sign == s for w, s in truth.items()
                     if w in reported),
        'mags': mags_ok,
        'max_frontier': max(state.frontier_sizes or [0]),
    }


def summarize_fphh(results, **params):
    good = sum(1 for r in results if r['recall'] and r['sound'])
    return {
        'trials': len(results),
        'success_rate': good / float(len(results)),
        'sign_rate': sum(r['signs'] for r in results) / float(len(results)),
        'magnitude_rate': sum(r['mags'] for r in results) /
        float(len(results)),
        'max_frontier': max(r['max_frontier'] for r in results),
    }


def end_to_end_trial(p, eps, delta, seed, kind='zipf', n=10000, m=100000,
                     M=10, instances=1, deletions=0.2, stream_seed=0):
    stream = make_stream(kind, n, m, M, stream_seed, deletions=deletions)
    x = oracle.materialize(stream.indices, stream.deltas, n)
    cfg = core.derive_config(p, eps, delta, n, len(stream), M)
    est = FpEstimator(cfg, seed, instances)
    est.update_many(stream.indices, stream.deltas)
    exact = oracle.exact_fp(x, p)
    try:
        record = est.query()
    except AllInstancesFailed:
        return {'failed': True, 'exact': exact}
    return {'failed': False, 'estimate': record.estimate, 'exact': exact,
            'failed_instances': record.failed_instances}


def summarize_end_to_end(results, eps, c=4.0, **params):
    hits = sum(1 for r in results if not r['failed'] and
               oracle.relative_error(r['estimate'], r['exact']) <= c * eps)
    errors = [oracle.relative_error(r['estimate'], r['exact'])
              for r in results if not r['failed']]
    return {
        'trials': len(results),
        'failed': sum(1 for r in results if r['failed']),
        'success_rate': hits / float(len(results)),
        'median_relative_error': float(np.median(errors))
        if errors else None,
    }


BATTERIES = {
    'gme': (gme_trial, summarize_gme),
    'highend': (highend_trial, summarize_highend),
    'fphh': (fphh_trial, summarize_fphh),
    'e2e': (end_to_end_trial, summarize_end_to_end),
}


def trial_seeds(seed, trials):
    root = prg.CounterPRG(seed, 'battery')
    return [root.spawn(str(t)).seed64() for t in range(trials)]


def run_trials(name, trials, seed, use_queue=False, **params):
    trial, _ = BATTERIES[name]
    kwargs = [dict(params, seed=s) for s in trial_seeds(seed, trials)]
    if use_queue:
        import worker
        return worker.run_all(trial, kwargs)
    return [trial(**kw) for kw in kwargs]


def run_battery(name, trials, seed, use_queue=False, **params):
    if name not in BATTERIES:
        raise ValueError("unknown battery {}".format(name))
    results = run_trials(name, trials, seed, use_queue, **params)
    summary = BATTERIES[name][1](results, **params)
    log.info("battery %s: %s", name, summary)
    return summary
