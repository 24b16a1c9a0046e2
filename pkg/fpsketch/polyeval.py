# -*- coding: utf-8 -*-
"""Fast multipoint evaluation over a prime field.

Polynomials are lists of Python ints, lowest degree first. A product tree
over the points is built once; evaluating a polynomial then remainders it
down the tree, so a degree-D polynomial costs O(D log^2 D) field operations
against the tree instead of O(D) per point.
"""
import config

MERSENNE_61 = (1 << 61) - 1


class OpCounter(object):

    """Running count of field multiplications done by this module."""

    def __init__(self):
        self.mults = 0

    def reset(self):
        self.mults = 0


counter = OpCounter()


def horner(coeffs, x, modulus=MERSENNE_61):
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % modulus
    return acc


def _schoolbook(a, b, modulus):
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    counter.mults += len(a) * len(b)
    return [c % modulus for c in out]


def _add(a, b, modulus):
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] = (out[i] + c) % modulus
    return out


def _karatsuba(a, b, modulus):
    n = len(a)
    if n <= config.KARATSUBA_CUTOFF:
        return _schoolbook(a, b, modulus)
    half = n // 2
    a0, a1 = a[:half], a[half:]
    b0, b1 = b[:half], b[half:]
    z0 = _karatsuba(a0, b0, modulus)
    z2 = _karatsuba(a1, b1, modulus)
    z1 = _karatsuba(_add(a0, a1, modulus), _add(b0, b1, modulus), modulus)
    out = [0] * (2 * n - 1)
    for i, c in enumerate(z0):
        out[i] += c
        z1[i] -= c
    for i, c in enumerate(z2):
        out[2 * half + i] += c
        z1[i] -= c
    for i, c in enumerate(z1):
        out[half + i] += c
    return [c % modulus for c in out]


def poly_mul(a, b, modulus=MERSENNE_61):
    if not a or not b:
        return []
    if min(len(a), len(b)) <= config.KARATSUBA_CUTOFF:
        return _schoolbook(a, b, modulus)
    out_len = len(a) + len(b) - 1
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    return _karatsuba(a, b, modulus)[:out_len]


def _series_inverse(f, n, modulus):
    """g with f*g = 1 mod X^n, by Newton iteration. Needs f[0] == 1."""
    g = [1]
    prec = 1
    while prec < n:
        prec = min(2 * prec, n)
        fg = poly_mul(f[:prec], g, modulus)[:prec]
        e = [(-c) % modulus for c in fg]
        e += [0] * (prec - len(e))
        e[0] = (e[0] + 2) % modulus
        g = poly_mul(g, e, modulus)[:prec]
    return g


def _rem_schoolbook(a, m, modulus):
    dm = len(m) - 1
    r = list(a)
    for i in range(len(r) - 1, dm - 1, -1):
        c = r[i] % modulus
        if c:
            base = i - dm
            for j in range(dm):
                r[base + j] = (r[base + j] - c * m[j]) % modulus
            counter.mults += dm
        r[i] = 0
    return [c % modulus for c in r[:dm]]


def _rem_newton(a, m, modulus):
    dm = len(m) - 1
    k = len(a) - dm
    inv = _series_inverse(m[::-1], k, modulus)
    quot_rev = poly_mul(a[::-1][:k], inv, modulus)[:k]
    quot_rev += [0] * (k - len(quot_rev))
    prod = poly_mul(quot_rev[::-1], m, modulus)
    return [(a[i] - prod[i]) % modulus for i in range(dm)]


def poly_rem(a, m, modulus=MERSENNE_61):
    """a mod m for monic m, padded to exactly deg(m) coefficients."""
    dm = len(m) - 1
    if len(a) <= dm:
        return [c % modulus for c in a] + [0] * (dm - len(a))
    if dm < config.POLYEVAL_CROSSOVER:
        return _rem_schoolbook(a, m, modulus)
    return _rem_newton(a, m, modulus)


class ProductTree(object):

    """Balanced tree of subproducts of (X - x_i).

    ``levels[0]`` holds the linear leaves and ``levels[-1][0]`` the root;
    the leaf count is padded to a power of two by repeating the last point.
    """

    def __init__(self, points, modulus=MERSENNE_61):
        if not points:
            raise ValueError("a product tree needs at least one point")
        self.modulus = modulus
        self.points = [x % modulus for x in points]
        self.d = len(self.points)
        size = 1
        while size < self.d:
            size *= 2
        padded = self.points + [self.points[-1]] * (size - self.d)
        self.levels = [[[(-x) % modulus, 1] for x in padded]]
        while len(self.levels[-1]) > 1:
            prev = self.levels[-1]
            self.levels.append([poly_mul(prev[i], prev[i + 1], modulus)
                                for i in range(0, len(prev), 2)])

    @property
    def root(self):
        return self.levels[-1][0]

    @property
    def padded_size(self):
        return len(self.levels[0])


def build_product_tree(points, modulus=MERSENNE_61):
    return ProductTree(points, modulus)


def multipoint_eval(coeffs, tree):
    """Values of ``coeffs`` at every point of ``tree``, exact in the field."""
    modulus = tree.modulus
    rems = [poly_rem(list(coeffs), tree.root, modulus)]
    for level in reversed(tree.levels[:-1]):
        rems = [poly_rem(rems[i // 2], node, modulus)
                for i, node in enumerate(level)]
    return [r[0] for r in rems[:tree.d]]
