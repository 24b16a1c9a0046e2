# -*- coding: utf-8 -*-
"""Counter-mode expansion of a 64-bit seed into hash and coefficient material.

A run is replayable from a single integer: the seed and a label are hashed
into an AES-128 key, and the AES-CTR keystream (counter starting at 0) is
the random byte stream. Child streams are derived by hashing the parent key
with a child label, so adding a consumer never shifts the bytes another
consumer sees.
"""
import struct

import numpy as np
from Crypto.Cipher import AES
from Crypto.Hash import SHA256
from Crypto.Util import Counter

AES_key_size = 128
AES_block_size = 128

SEED_MASK = (1 << 64) - 1


def _derive_key(material):
    return SHA256.new(material).digest()[:AES_key_size // 8]


class CounterPRG(object):

    def __init__(self, seed, label='root', key=None):
        self.seed = seed & SEED_MASK
        self.label = label
        if key is None:
            key = _derive_key(struct.pack('<Q', self.seed) +
                              label.encode('utf-8'))
        self.key = key
        self.initialize_cipher()

    def initialize_cipher(self):
        self.ctr = Counter.new(AES_block_size, initial_value=0)
        self.cipher = AES.new(self.key, AES.MODE_CTR, counter=self.ctr)

    def spawn(self, label):
        """Independent child stream named ``label``."""
        child_label = '{}/{}'.format(self.label, label)
        key = _derive_key(self.key + label.encode('utf-8'))
        return CounterPRG(self.seed, child_label, key=key)

    def read(self, nbytes):
        return self.cipher.encrypt(b'\x00' * nbytes)

    def randbits(self, bits):
        nbytes = (bits + 7) // 8
        value = int.from_bytes(self.read(nbytes), 'little')
        return value & ((1 << bits) - 1)

    def randbelow(self, bound):
        """Uniform integer in [0, bound) by rejection."""
        if bound < 1:
            raise ValueError("bound must be positive")
        bits = max(1, (bound - 1).bit_length())
        while True:
            value = self.randbits(bits)
            if value < bound:
                return value

    def field_elements(self, count, modulus):
        """``count`` uniform elements of Z/modulus as Python ints."""
        if modulus == (1 << 61) - 1:
            return [int(v) for v in self.field_array(count)]
        return [self.randbelow(modulus) for _ in range(count)]

    def field_array(self, shape):
        """Uniform elements of Z/(2^61-1) as a uint64 array of ``shape``."""
        count = int(np.prod(shape)) if np.ndim(shape) else int(shape)
        modulus = np.uint64((1 << 61) - 1)
        out = np.empty(0, dtype=np.uint64)
        while out.size < count:
            want = count - out.size
            # rejection rate is 2^-61, one extra word per block is plenty
            raw = np.frombuffer(self.read(8 * (want + 1)), dtype='<u8')
            raw = raw.astype(np.uint64) & modulus
            out = np.concatenate([out, raw[raw < modulus]])
        return out[:count].reshape(shape)

    def seed64(self):
        return self.randbits(64)

    def numpy_rng(self):
        """numpy Generator seeded from this stream, for synthetic data."""
        return np.random.default_rng(self.seed64())
