# -*- coding: utf-8 -*-
"""Polynomial hash families over the Mersenne field Z/(2^61-1).

A degree-(k-1) polynomial with uniformly random coefficients is exactly
k-wise independent over the field; outputs are reduced into a range by
``v mod range``, which biases any bucket by at most range/q < 2^-31 for
ranges below 2^30. Scalar evaluation uses Python ints. ``SeedBank`` stacks
many seeds into a uint64 matrix and evaluates all of them at many points
with vectorised field arithmetic.
"""
import numpy as np

import polyeval
from polyeval import MERSENNE_61

MAX_K = 2 ** 20

_P = np.uint64(MERSENNE_61)
_ZERO = np.uint64(0)
_LO32 = np.uint64(0xFFFFFFFF)
_LO29 = np.uint64((1 << 29) - 1)
_S3 = np.uint64(3)
_S29 = np.uint64(29)
_S32 = np.uint64(32)
_S61 = np.uint64(61)


class HashException(Exception):

    """Raised for seeds that cannot exist: an empty polynomial, a range
    larger than the field, or a vectorised evaluation over a toy field.
    """
    pass


def _fold(v):
    v = (v & _P) + (v >> _S61)
    return v - np.where(v >= _P, _P, _ZERO)


def addmod(a, b):
    """a + b mod 2^61-1 for uint64 arrays with entries below 2^61."""
    return _fold(a + b)


def mulmod(a, b):
    """a * b mod 2^61-1 for uint64 arrays with entries below 2^61.

    Both operands are split into 32-bit halves so no partial product
    overflows 64 bits; 2^64 = 8 and 2^61 = 1 in the field.
    """
    a_hi = a >> _S32
    a_lo = a & _LO32
    b_hi = b >> _S32
    b_lo = b & _LO32
    mid = a_hi * b_lo + a_lo * b_hi
    lo = a_lo * b_lo
    v = (((a_hi * b_hi) << _S3) + (mid >> _S29) + ((mid & _LO29) << _S32) +
         (lo >> _S61) + (lo & _P))
    return _fold(v)


def as_keys(xs):
    return np.asarray(xs, dtype=np.uint64)


def field_of_signed(values):
    """Signed int64 values (|v| < q) as field elements."""
    values = np.asarray(values, dtype=np.int64)
    mags = np.abs(values).astype(np.uint64)
    return np.where(values < 0, _P - mags, mags)


def powmod_many(base, exps):
    """base^e mod 2^61-1 for every e in ``exps``, by square-and-multiply."""
    e = as_keys(exps).copy()
    result = np.ones(e.shape, dtype=np.uint64)
    b = np.full(e.shape, base % MERSENNE_61, dtype=np.uint64)
    one = np.uint64(1)
    while e.any():
        odd = (e & one).astype(bool)
        result = np.where(odd, mulmod(result, b), result)
        b = mulmod(b, b)
        e >>= one
    return result


def horner_bank(coeffs, xs):
    """Evaluate every row of ``coeffs`` (P x k, lowest degree first).

    ``xs`` is either a vector of d points shared by all rows or a P x d
    matrix of per-row points. Returns the P x d matrix of field values.
    """
    xs = as_keys(xs)
    k = coeffs.shape[1]
    acc = coeffs[:, k - 1][:, None]
    for j in range(k - 2, -1, -1):
        acc = addmod(mulmod(acc, xs), coeffs[:, j][:, None])
    shape = np.broadcast(acc, xs).shape
    return np.array(np.broadcast_to(acc, shape), dtype=np.uint64)


class PolyHashSeed(object):

    """Coefficients of one hash polynomial plus the range it maps into."""

    def __init__(self, coeffs, range_m, modulus=MERSENNE_61):
        self.coeffs = [int(c) for c in coeffs]
        self.range_m = int(range_m)
        self.modulus = modulus

    @property
    def k(self):
        return len(self.coeffs)

    def field_value(self, x):
        return polyeval.horner(self.coeffs, x, self.modulus)

    def __eq__(self, other):
        return (isinstance(other, PolyHashSeed) and
                self.coeffs == other.coeffs and
                self.range_m == other.range_m and
                self.modulus == other.modulus)

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return '<PolyHashSeed k=%d range=%d>' % (self.k, self.range_m)


def kwise_new(k, range_m, rng, modulus=MERSENNE_61):
    if k < 1 or k > MAX_K:
        raise HashException("k must be in [1, 2^20], got {}".format(k))
    if range_m < 1 or range_m > modulus:
        raise HashException("range {} outside [1, {}]".format(range_m,
                                                              modulus))
    return PolyHashSeed(rng.field_elements(k, modulus), range_m, modulus)


def kwise_eval(seed, x):
    return seed.field_value(x) % seed.range_m


def sign_eval(seed, x):
    if seed.range_m != 2:
        raise HashException("sign hashes need range 2, got {}".format(
            seed.range_m))
    return 1 - 2 * (seed.field_value(x) & 1)


class SeedBank(object):

    """P seeds of equal k over the Mersenne field, evaluated together."""

    def __init__(self, coeffs, range_m):
        self.coeffs = np.ascontiguousarray(coeffs, dtype=np.uint64)
        if self.coeffs.ndim != 2 or self.coeffs.shape[1] < 1:
            raise HashException("a seed bank needs a P x k coefficient matrix")
        self.range_m = int(range_m)

    @classmethod
    def new(cls, count, k, range_m, rng):
        if k < 1 or k > MAX_K:
            raise HashException("k must be in [1, 2^20], got {}".format(k))
        return cls(rng.field_array((count, k)), range_m)

    @classmethod
    def from_seeds(cls, seeds):
        if any(s.modulus != MERSENNE_61 for s in seeds):
            raise HashException("vectorised evaluation needs the 2^61-1 field")
        if len(set(s.k for s in seeds)) != 1 or \
                len(set(s.range_m for s in seeds)) != 1:
            raise HashException("seeds in a bank must share k and range")
        return cls([s.coeffs for s in seeds], seeds[0].range_m)

    @property
    def count(self):
        return self.coeffs.shape[0]

    @property
    def k(self):
        return self.coeffs.shape[1]

    def seed(self, i):
        return PolyHashSeed(self.coeffs[i].tolist(), self.range_m)

    def field_values(self, xs):
        return horner_bank(self.coeffs, xs)

    def eval_many(self, xs):
        return self.field_values(xs) % np.uint64(self.range_m)

    def signs(self, xs):
        if self.range_m != 2:
            raise HashException("sign hashes need range 2")
        parity = (self.field_values(xs) & np.uint64(1)).astype(np.int64)
        return 1 - 2 * parity

    def __eq__(self, other):
        return (isinstance(other, SeedBank) and
                self.range_m == other.range_m and
                np.array_equal(self.coeffs, other.coeffs))

    def __ne__(self, other):
        return not self == other


class UniformOnSetSeed(object):

    """Hash that is z-wise independent on any fixed set of z keys.

    Realised as a degree-(z-1) polynomial, which makes the independence
    exact rather than holding with probability 1 - O(z^-c); ``c`` is kept
    so a seed still describes the family it was drawn for.
    """

    def __init__(self, poly, z, c):
        self.poly = poly
        self.z = z
        self.c = c
        self._bank = SeedBank.from_seeds([poly])

    @property
    def range_m(self):
        return self.poly.range_m

    def eval(self, x):
        return kwise_eval(self.poly, x)

    def eval_many(self, xs):
        return self._bank.eval_many(xs)[0]

    def __eq__(self, other):
        return (isinstance(other, UniformOnSetSeed) and
                self.poly == other.poly and self.z == other.z and
                self.c == other.c)

    def __ne__(self, other):
        return not self == other


def uniform_on_set_new(z, range_m, c, rng):
    if z < 2:
        raise HashException("z must be at least 2, got {}".format(z))
    if range_m < 2 or range_m > MERSENNE_61:
        raise HashException("range {} outside [2, 2^61-1]".format(range_m))
    return UniformOnSetSeed(kwise_new(z, range_m, rng), z, c)
