# -*- coding: utf-8 -*-
"""Versioned little-endian binary format for sketch state.

A blob is ``FPSK`` + u16 version + length-prefixed kind tag, followed by
fields written by the sketch in a fixed order. Field elements are 8-byte
little-endian words; arrays carry their dtype tag and shape.
"""
import struct

import numpy as np

import hashing

MAGIC = b'FPSK'
VERSION = 2

_DTYPES = {
    b'u8': '<u8',
    b'i8': '<i8',
    b'f8': '<f8',
    b'c16': '<c16',
}
_TAGS = dict((np.dtype(v), k) for k, v in _DTYPES.items())


class CodecException(Exception):

    """Raised when a blob is truncated, of another kind, or of an
    unsupported version."""
    pass


class Writer(object):

    def __init__(self, kind):
        self.parts = [MAGIC, struct.pack('<H', VERSION)]
        self.blob(kind.encode('utf-8'))

    def u32(self, value):
        self.parts.append(struct.pack('<I', value))

    def u64(self, value):
        self.parts.append(struct.pack('<Q', value))

    def f64(self, value):
        self.parts.append(struct.pack('<d', value))

    def blob(self, data):
        self.u32(len(data))
        self.parts.append(data)

    def array(self, arr):
        arr = np.asarray(arr)
        dtype = np.dtype(_DTYPES[_TAGS[arr.dtype.newbyteorder('<')]])
        self.blob(_TAGS[dtype])
        self.u32(arr.ndim)
        for dim in arr.shape:
            self.u64(dim)
        self.parts.append(np.ascontiguousarray(arr, dtype=dtype).tobytes())

    def bank(self, bank):
        self.u64(bank.range_m)
        self.array(bank.coeffs)

    def getvalue(self):
        return b''.join(self.parts)


class Reader(object):

    def __init__(self, data, kind):
        self.data = data
        self.pos = 0
        if self._take(4) != MAGIC:
            raise CodecException("not an fpsketch blob")
        version, = self._unpack('<H')
        if version != VERSION:
            raise CodecException("unsupported version {}".format(version))
        found = self.blob().decode('utf-8')
        if found != kind:
            raise CodecException("expected a {} blob, got {}".format(kind,
                                                                    found))

    def _take(self, nbytes):
        if self.pos + nbytes > len(self.data):
            raise CodecException("blob truncated at byte {}".format(self.pos))
        out = self.data[self.pos:self.pos + nbytes]
        self.pos += nbytes
        return out

    def _unpack(self, fmt):
        return struct.unpack(fmt, self._take(struct.calcsize(fmt)))

    def u32(self):
        return self._unpack('<I')[0]

    def u64(self):
        return self._unpack('<Q')[0]

    def f64(self):
        return self._unpack('<d')[0]

    def blob(self):
        return self._take(self.u32())

    def array(self):
        tag = self.blob()
        if tag not in _DTYPES:
            raise CodecException("unknown array dtype {!r}".format(tag))
        dtype = np.dtype(_DTYPES[tag])
        shape = tuple(self.u64() for _ in range(self.u32()))
        count = int(np.prod(shape)) if shape else 1
        raw = self._take(count * dtype.itemsize)
        return np.frombuffer(raw, dtype=dtype).reshape(shape).astype(
            dtype.newbyteorder('='))

    def bank(self):
        range_m = self.u64()
        return hashing.SeedBank(self.array(), range_m)

    def finish(self):
        if self.pos != len(self.data):
            raise CodecException("{} trailing bytes".format(
                len(self.data) - self.pos))
