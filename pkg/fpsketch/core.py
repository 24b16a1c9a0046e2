# -*- coding: utf-8 -*-
"""Stream model, parameter derivation and the zero-vector fingerprint."""
import collections
import logging
import math

import numpy as np
from Crypto.Hash import SHA256

import config
import hashing
import stable
from polyeval import MERSENNE_61

log = logging.getLogger(__name__)

StreamUpdate = collections.namedtuple('StreamUpdate', ['index', 'delta'])

# Constants from config.py that derive_config accepts as overrides
KNOBS = (
    'tau', 'c_k', 'c_universe', 'r_factor', 'rh_factor', 'taylor_factor',
    'gme_rows_min', 'n_cap', 'light_bucket_factor', 'fpest_median_factor',
    'fpest_group_failure', 'fpest_eps', 'fphh_phi_divisor', 'fphh_rep_factor',
    'cs_column_factor', 'cs_row_factor', 'sigma_factor', 'z_h1', 'c_h',
    'precision_bits', 'highend_fixed_point', 'instance_factor',
)

FIELDS = (
    'p', 'eps', 'delta', 'n', 'm_bound', 'M',
    'eps_balance', 'alpha', 'N', 'n_capped', 'exact_storage_advised',
    'r', 'T', 't_rows', 's', 'r_h', 'r_g', 'taylor_degree',
    'highend_fixed_point', 'highend_frac_bits',
    'gme_rows', 'k_wise', 'precision_bits', 'R_light', 'reps_light', 'd',
    'fpest_eps', 'fpest_group_failure', 'fpest_second_moment',
    'fpest_group_size', 'fpest_median_factor', 'fpest_k_wise',
    'fpest_groups',
    'phi', 'fphh_phi_divisor', 'fphh_rep_factor', 'fphh_phi_prime', 'fphh_R',
    'fphh_top_level', 'fphh_levels', 'fphh_delta_prime', 'fphh_T_rep',
    'fphh_bucket_groups', 'fphh_global_groups',
    'cs_column_factor', 'cs_row_factor', 'cs_columns', 'cs_rows',
    'sigma_factor', 'sigma_k', 'z_h1', 'c_h', 'c_universe', 'tau', 'c_k',
    'instance_factor', 'instances',
)

_FLOAT_FIELDS = frozenset([
    'p', 'eps', 'delta', 'eps_balance', 'alpha', 'fpest_eps', 'phi',
    'fphh_phi_prime', 'fphh_delta_prime', 'c_universe', 'tau', 'c_k',
    'fpest_group_failure', 'fpest_second_moment',
    'r_factor', 'rh_factor', 'taylor_factor', 'light_bucket_factor',
    'fpest_median_factor', 'fphh_phi_divisor', 'fphh_rep_factor',
    'cs_column_factor', 'cs_row_factor', 'sigma_factor', 'instance_factor',
])
_BOOL_FIELDS = frozenset(['n_capped', 'exact_storage_advised',
                          'highend_fixed_point'])

# Derived values that may be pinned directly instead of derived
PINNABLE = ('r', 'T', 'r_h', 'gme_rows', 'k_wise', 'R_light', 'reps_light',
            'd', 'taylor_degree', 'N', 'instances', 'fpest_group_size')


class ConfigException(Exception):

    """Raised when parameters fall outside the ranges the sketches are
    defined for, or when a config text cannot be parsed back.
    """
    pass


class UpdateException(Exception):

    """Raised for an update outside the declared (n, M) bounds."""
    pass


def odd_ceil(value):
    """Smallest odd integer >= value, and at least 1."""
    out = max(1, int(math.ceil(value)))
    return out if out % 2 else out + 1


def coerce_value(key, value):
    if key in _BOOL_FIELDS:
        return bool(value)
    if key in _FLOAT_FIELDS:
        return float(value)
    return int(value)


def parse_value(key, text):
    """Turn the text form of a config key or knob into its value."""
    if key in _BOOL_FIELDS:
        if text not in ('True', 'False', 'true', 'false', '1', '0'):
            raise ConfigException("{} expects a boolean, got {!r}".format(
                key, text))
        return text in ('True', 'true', '1')
    try:
        if key in _FLOAT_FIELDS:
            return float(text)
        return int(text)
    except ValueError:
        raise ConfigException("bad value {!r} for {}".format(text, key))


class FpConfig(collections.namedtuple('FpConfig', FIELDS)):

    """Immutable derived parameters for every sketch of one estimator."""

    __slots__ = ()

    def to_text(self):
        lines = []
        for key, value in zip(self._fields, self):
            if isinstance(value, float):
                value = repr(value)
            lines.append(u'{}={}'.format(key, value))
        return u'\n'.join(lines) + u'\n'

    @classmethod
    def from_text(cls, text):
        values = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith('#'):
                continue
            key, sep, raw = line.partition('=')
            key = key.strip()
            if not sep or key not in FIELDS:
                raise ConfigException(
                    "line {}: not a config entry: {!r}".format(lineno, line))
            values[key] = parse_value(key, raw.strip())
        missing = set(FIELDS) - set(values)
        if missing:
            raise ConfigException("missing keys: {}".format(
                ', '.join(sorted(missing))))
        return cls(**values)

    @property
    def config_hash(self):
        return SHA256.new(self.to_text().encode('utf-8')).hexdigest()


def heavy_hitter_sizes(phi, delta, universe, p, knobs):
    """Sizes of a heavy-hitter finder at threshold ``phi`` over [universe].

    ``knobs`` is anything with the fphh/fpest/count-sketch knob attributes,
    normally an FpConfig.
    """
    if not 0 < phi < 1:
        raise ConfigException("phi must lie in (0, 1), got {}".format(phi))
    levels = max(1, int(math.ceil(math.log(universe, 2))))
    top = min(int(math.ceil(math.log(math.ceil(1.0 / phi), 2))), levels)
    phi_prime = phi / knobs.fphh_phi_divisor
    log_phi_n = math.log(max(phi * universe, 1.0), 2)
    delta_prime = phi * delta / (12.0 * (log_phi_n + 1.0))
    return {
        'phi': phi,
        'fphh_phi_prime': phi_prime,
        'fphh_R': max(2, int(math.ceil(1.0 / phi_prime))),
        'fphh_top_level': top,
        'fphh_levels': levels,
        'fphh_delta_prime': delta_prime,
        'fphh_T_rep': odd_ceil(math.ceil(
            knobs.fphh_rep_factor * math.log(1.0 / delta_prime, 2)) + 1),
        'fphh_bucket_groups': odd_ceil(
            knobs.fpest_median_factor * math.log(5.0)),
        'fphh_global_groups': odd_ceil(
            knobs.fpest_median_factor * math.log(2.0 / delta)),
        'cs_columns': int(math.ceil(
            knobs.cs_column_factor * 2.0 ** p / phi)),
        'cs_rows': odd_ceil(
            knobs.cs_row_factor * math.log(1.0 / (delta * phi), 2)),
    }


def chebyshev_group_size(second_moment, eps_prime, failure):
    """Group size for which Chebyshev keeps the mean of normalised
    estimates within ``eps_prime`` of 1 except with probability ``failure``.
    """
    return max(1, int(math.ceil(
        (second_moment - 1.0) / (failure * eps_prime ** 2))))


def derive_config(p, eps, delta, n, m_bound, M, overrides=None):
    overrides = dict(overrides or {})
    unknown = set(overrides) - set(KNOBS) - set(PINNABLE)
    if unknown:
        raise ConfigException("unknown override(s): {}".format(
            ', '.join(sorted(unknown))))
    if not 0 < p < 2:
        raise ConfigException("p must lie in (0, 2), got {}".format(p))
    if not 0 < eps < 0.5:
        raise ConfigException("eps must lie in (0, 1/2), got {}".format(eps))
    if not 0 < delta < 0.5:
        raise ConfigException(
            "delta must lie in (0, 1/2), got {}".format(delta))
    if min(n, m_bound, M) < 1:
        raise ConfigException("n, m and M must be positive")

    def knob(name):
        return overrides.get(name, getattr(config, name.upper()))

    def pick(name, computed):
        return int(overrides.get(name, computed))

    v = {'p': float(p), 'eps': float(eps), 'delta': float(delta),
         'n': int(n), 'm_bound': int(m_bound), 'M': int(M)}
    for name in KNOBS:
        if name in FIELDS:
            v[name] = knob(name)
    log_inv_eps = math.log(1.0 / eps, 2)

    v['eps_balance'] = eps * log_inv_eps
    v['alpha'] = v['eps_balance'] ** 2 / (34.0 * v['c_universe'])
    alpha = v['alpha']

    r = max(2, 2 * int(math.ceil(knob('r_factor') * log_inv_eps / 2.0)))
    v['r'] = pick('r', r)
    v['T'] = pick('T', max(1, int(math.ceil(
        v['tau'] * max(log_inv_eps, math.log(2.0 / alpha, 2))))))
    v['t_rows'] = 3 * v['T']
    v['s'] = max(int(math.ceil(4.0 / alpha)),
                 2 * int(math.ceil(2.0 / alpha)))
    v['r_h'] = pick('r_h', max(2, int(math.ceil(
        knob('rh_factor') * math.log(1.0 / alpha, 2)))))
    v['r_g'] = v['r']
    v['taylor_degree'] = pick('taylor_degree', max(2, int(math.ceil(
        knob('taylor_factor') * log_inv_eps))))
    v['highend_frac_bits'] = int(math.ceil(
        math.log(2.0 * m_bound * v['T'] / eps ** 2, 2)))

    v['gme_rows'] = pick('gme_rows', max(knob('gme_rows_min'),
                                         int(math.ceil(4.0 / p)) + 1))
    v['k_wise'] = pick('k_wise', int(math.ceil(v['c_k'] / eps ** p)))
    v['R_light'] = pick('R_light', int(math.ceil(
        knob('light_bucket_factor') / v['eps_balance'] ** 2)))
    v['reps_light'] = pick('reps_light', max(1, int(math.ceil(
        (v['eps_balance'] / eps) ** 2))))
    v['d'] = pick('d', int(math.ceil(1.0 / eps ** p)))

    n_cap = int(knob('n_cap'))
    if 18 * log_inv_eps >= math.log(n_cap, 2):
        full_n = n_cap + 1
    else:
        full_n = int(math.ceil(eps ** -18))
    v['N'] = pick('N', min(full_n, n_cap))
    v['n_capped'] = v['N'] < full_n
    v['exact_storage_advised'] = eps <= 1.0 / math.sqrt(n)

    v['fpest_k_wise'] = int(math.ceil(v['c_k'] / v['fpest_eps'] ** p))
    try:
        v['fpest_second_moment'] = stable.gme_second_moment(v['gme_rows'], p)
    except stable.StableException as e:
        raise ConfigException(str(e))
    v['fpest_group_size'] = pick('fpest_group_size', chebyshev_group_size(
        v['fpest_second_moment'], v['fpest_eps'], v['fpest_group_failure']))
    v['fpest_groups'] = odd_ceil(
        v['fpest_median_factor'] * math.log(2.0 / delta))
    v['sigma_k'] = max(2, int(math.ceil(
        v['sigma_factor'] * math.log(v['N'], 2))))
    v['instances'] = pick('instances', odd_ceil(
        v['instance_factor'] * math.log(1.0 / delta)))

    knobs = collections.namedtuple('Knobs', v.keys())(**v)
    v.update(heavy_hitter_sizes(alpha, delta, v['N'], p, knobs))

    cfg = FpConfig(**dict((k, coerce_value(k, v[k])) for k in FIELDS))
    check_config(cfg)
    if cfg.n_capped:
        log.warning("reduced universe capped at N=%d (1/eps^18 is larger)",
                    cfg.N)
    if cfg.exact_storage_advised:
        log.warning("eps=%g <= 1/sqrt(n): storing x exactly is cheaper",
                    eps)
    return cfg


def check_config(cfg):
    if cfg.r < 2 or cfg.r % 2:
        raise ConfigException("r must be even and >= 2, got {}".format(cfg.r))
    if cfg.t_rows != 3 * cfg.T:
        raise ConfigException("t_rows must equal 3T")
    if cfg.s < 2 * int(math.ceil(2.0 / cfg.alpha)):
        raise ConfigException("s must be at least 2*ceil(2/alpha)")
    if cfg.gme_rows <= max(4.0, 4.0 / cfg.p):
        raise ConfigException(
            "gme_rows must exceed max(4, 4/p), got {}".format(cfg.gme_rows))
    for key in ('k_wise', 'R_light', 'reps_light', 'd', 'N', 'T', 'r_h'):
        if getattr(cfg, key) < 1:
            raise ConfigException("{} must be positive".format(key))
    if not 1 <= cfg.fpest_group_size:
        raise ConfigException("fpest_group_size must be positive")


def coalesce_updates(indices, deltas):
    """One update per distinct index carrying the summed delta; indices
    whose deltas cancel are dropped."""
    keys, inverse = np.unique(np.asarray(indices, dtype=np.int64),
                              return_inverse=True)
    sums = np.zeros(len(keys), dtype=np.int64)
    np.add.at(sums, inverse.ravel(), np.asarray(deltas, dtype=np.int64))
    live = sums != 0
    return keys[live], sums[live]


def check_updates(indices, deltas, n, M):
    """Validate a batch against 1 <= index <= n and |delta| <= M."""
    indices = np.asarray(indices, dtype=np.int64)
    deltas = np.asarray(deltas, dtype=np.int64)
    if indices.shape != deltas.shape:
        raise UpdateException("indices and deltas differ in length")
    if indices.size:
        if indices.min() < 1 or indices.max() > n:
            raise UpdateException("index outside [1, {}]".format(n))
        if np.abs(deltas).max() > M:
            raise UpdateException("|delta| exceeds M={}".format(M))
    return indices, deltas


class ZeroFingerprint(object):

    """acc = sum_i x_i * rho^i mod q; zero whenever x is zero, and nonzero
    otherwise except with probability at most n/q over rho."""

    def __init__(self, coeff_seed, accumulator=0):
        self.coeff_seed = coeff_seed
        self.accumulator = accumulator

    @property
    def rho(self):
        return self.coeff_seed.coeffs[0]

    def is_zero(self):
        return self.accumulator == 0

    def update_many(self, indices, deltas):
        if len(indices) == 0:
            return
        powers = hashing.powmod_many(self.rho, indices)
        terms = hashing.mulmod(powers, hashing.field_of_signed(deltas))
        self.accumulator = (self.accumulator +
                            sum(int(t) for t in terms)) % MERSENNE_61

    def merge(self, other):
        if self.coeff_seed != other.coeff_seed:
            raise ConfigException("fingerprints were drawn with other seeds")
        self.accumulator = (self.accumulator +
                            other.accumulator) % MERSENNE_61

    def space_bits(self):
        return 2 * 61


def fingerprint_new(rng):
    return ZeroFingerprint(hashing.kwise_new(1, MERSENNE_61, rng))


def fingerprint_update(fp, u):
    fp.update_many([u.index], [u.delta])
    return fp
