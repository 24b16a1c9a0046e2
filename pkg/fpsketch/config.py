# -*- coding: utf-8 -*-
"""Default constants for every sketch in fpsketch.

The profile is picked from the FPSKETCH_ENV environment variable:

* ``full`` (the default) uses the constants the analysis is written with.
  Expect it to be slow and memory hungry outside of tiny universes.
* ``dev`` uses desk-scale constants; the command line and the functional
  batteries select it unless FPSKETCH_ENV says otherwise.
* ``test`` shrinks everything so the unit suite runs in seconds (at the
  expense of accuracy - DO NOT use these settings for measurements).

Any constant can be overridden per config through ``core.derive_config``
using its lower-case name as the key.
"""
import os

FPSKETCH_ENV = os.environ.get('FPSKETCH_ENV', 'full')

FPSKETCH_ROOT = os.path.dirname(os.path.abspath(__file__))

# HighEnd: T = tau * max(log(1/eps), log(2/alpha))
TAU = 24
# k-wise independence of stable variates: k = ceil(c_k / eps^p)
C_K = 32
# universal constant C behind alpha = eps_balance^2 / (34 C)
C_UNIVERSE = 4
# r = smallest even integer >= r_factor * log2(1/eps)
R_FACTOR = 4
# r_h = ceil(rh_factor * log2(1/alpha))
RH_FACTOR = 1
# Taylor degree for cos(p arg z): ceil(taylor_factor * log2(1/eps))
TAYLOR_FACTOR = 4
# GME rows: max(gme_rows_min, ceil(4/p) + 1)
GME_ROWS_MIN = 8
# reduced universe N = min(ceil(1/eps^18), n_cap)
N_CAP = 2 ** 24
# LightEstimator buckets R = ceil(light_bucket_factor / eps_balance^2)
LIGHT_BUCKET_FACTOR = 4
# FpEst black box: median of ceil(fpest_median_factor * ln(1/delta')) groups,
# each the mean of enough GME estimates that Chebyshev puts it within
# fpest_eps of F_p except with probability fpest_group_failure
FPEST_MEDIAN_FACTOR = 48
FPEST_GROUP_FAILURE = 0.25
FPEST_EPS = 1.0 / 7
# BasicFpHH buckets R = ceil(fphh_phi_divisor / phi)
FPHH_PHI_DIVISOR = 80
# BasicFpHH repetitions: next odd integer >=
# ceil(fphh_rep_factor * log2(1/delta')) + 1
FPHH_REP_FACTOR = 8
# CountSketch: ceil(cs_column_factor * 2^p / phi) columns,
# ceil(cs_row_factor * log2(1/(delta phi))) rows (odd)
CS_COLUMN_FACTOR = 21
CS_ROW_FACTOR = 2
# sigma: ceil(sigma_factor * log2(N))-wise independent
SIGMA_FACTOR = 1
# independence of h1 on any fixed set
Z_H1 = 2
# failure exponent handed to the uniform-on-set family
C_H = 2
# bits per uniform carved from a 61-bit field element (at most 30)
PRECISION_BITS = 30
# schoolbook remainder below this divisor degree, Newton inverse above
POLYEVAL_CROSSOVER = 32
# schoolbook multiplication below this length, Karatsuba above
KARATSUBA_CUTOFF = 16
HIGHEND_FIXED_POINT = False
# median amplification: ceil(instance_factor * ln(1/delta)) instances (odd)
INSTANCE_FACTOR = 8

ORACLE_MAX_N = 2 ** 26
# updates per ingest batch; each batch materialises a
# (T_rep * group size * gme_rows) x batch array of variates
INGEST_CHUNK = 256

REDIS_URL = os.environ.get('FPSKETCH_REDIS_URL', 'redis://localhost:6379/0')

if FPSKETCH_ENV == 'dev':
    TAU = 4
    C_K = 4
    C_UNIVERSE = 0.25
    N_CAP = 2 ** 14
    FPEST_MEDIAN_FACTOR = 0.5
    FPHH_PHI_DIVISOR = 2
    FPHH_REP_FACTOR = 0.5
    CS_ROW_FACTOR = 1
    INSTANCE_FACTOR = 1
elif FPSKETCH_ENV == 'test':
    # Shrink the constants to speed up tests (at the expense of the
    # guarantees - DO NOT use these settings for measurements)
    TAU = 1
    C_K = 2
    N_CAP = 2 ** 12
    FPEST_MEDIAN_FACTOR = 0.5
    FPHH_PHI_DIVISOR = 0.125
    FPHH_REP_FACTOR = 0.5
    CS_ROW_FACTOR = 1
    INSTANCE_FACTOR = 1
