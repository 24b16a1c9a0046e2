# -*- coding: utf-8 -*-
"""Turnstile stream files.

Text streams start with a ``FPSTREAM 1 n m M text`` header line followed by
one ``index delta`` pair per line; blank lines and ``#`` comments are
skipped. Binary streams start with ``FPSB``, a u16 version, u32 n, u64 m and
u64 M, followed by records of little-endian u32 index and i64 delta.
"""
import collections
import io
import logging
import struct

import numpy as np

log = logging.getLogger(__name__)

TEXT_MAGIC = u'FPSTREAM'
BINARY_MAGIC = b'FPSB'
VERSION = 1
FORMATS = ('text', 'binary')

_BINARY_HEADER = struct.Struct('<4sHIQQ')
_RECORD = np.dtype([('index', '<u4'), ('delta', '<i8')])

StreamHeader = collections.namedtuple('StreamHeader', ['n', 'm', 'M'])


class StreamFormatException(Exception):

    """A stream file does not parse or breaks its own header bounds."""

    def __init__(self, message, line=None):
        if line is not None:
            message = "line {}: {}".format(line, message)
        super(StreamFormatException, self).__init__(message)
        self.line = line


class StreamFile(object):

    def __init__(self, header, indices, deltas):
        self.header = header
        self.indices = np.asarray(indices, dtype=np.int64)
        self.deltas = np.asarray(deltas, dtype=np.int64)

    @classmethod
    def from_updates(cls, indices, deltas, n=None, M=None):
        indices = np.asarray(indices, dtype=np.int64)
        deltas = np.asarray(deltas, dtype=np.int64)
        if n is None:
            n = int(indices.max()) if indices.size else 1
        if M is None:
            M = int(np.abs(deltas).max()) if deltas.size else 1
        return cls(StreamHeader(n, max(1, len(indices)), M), indices, deltas)

    def __len__(self):
        return len(self.indices)

    def updates(self):
        return zip(self.indices.tolist(), self.deltas.tolist())


def _check_record(header, index, delta, line=None):
    if not 1 <= index <= header.n:
        raise StreamFormatException(
            "index {} outside [1, {}]".format(index, header.n), line)
    if abs(delta) > header.M:
        raise StreamFormatException(
            "|delta| {} exceeds M={}".format(delta, header.M), line)


def parse_text(text):
    lines = text.splitlines()
    header = None
    indices = []
    deltas = []
    for lineno, line in enumerate(lines, 1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if header is None:
            if len(fields) != 6 or fields[0] != TEXT_MAGIC:
                raise StreamFormatException("missing FPSTREAM header",
                                            lineno)
            try:
                version, n, m, M = (int(f) for f in fields[1:5])
            except ValueError:
                raise StreamFormatException("bad header numbers", lineno)
            if version != VERSION or fields[5] != 'text':
                raise StreamFormatException("unsupported header", lineno)
            header = StreamHeader(n, m, M)
            continue
        if len(fields) != 2:
            raise StreamFormatException("expected 'index delta'", lineno)
        try:
            index, delta = int(fields[0]), int(fields[1])
        except ValueError:
            raise StreamFormatException("non-integer record", lineno)
        _check_record(header, index, delta, lineno)
        indices.append(index)
        deltas.append(delta)
        if len(indices) > header.m:
            raise StreamFormatException(
                "more than m={} records".format(header.m), lineno)
    if header is None:
        raise StreamFormatException("missing FPSTREAM header", 1)
    return StreamFile(header, indices, deltas)


def format_text(stream):
    out = io.StringIO()
    h = stream.header
    out.write(u'{} {} {} {} {} text\n'.format(TEXT_MAGIC, VERSION, h.n, h.m,
                                              h.M))
    for index, delta in stream.updates():
        out.write(u'{} {}\n'.format(index, delta))
    return out.getvalue()


def parse_binary(data):
    if len(data) < _BINARY_HEADER.size:
        raise StreamFormatException("binary header truncated")
    magic, version, n, m, M = _BINARY_HEADER.unpack_from(data)
    if magic != BINARY_MAGIC or version != VERSION:
        raise StreamFormatException("not a version {} binary stream".format(
            VERSION))
    body = data[_BINARY_HEADER.size:]
    if len(body) % _RECORD.itemsize:
        raise StreamFormatException("trailing partial record")
    records = np.frombuffer(body, dtype=_RECORD)
    header = StreamHeader(n, m, M)
    if len(records) > m:
        raise StreamFormatException("more than m={} records".format(m))
    indices = records['index'].astype(np.int64)
    deltas = records['delta'].astype(np.int64)
    bad = np.nonzero((indices < 1) | (indices > n) | (np.abs(deltas) > M))[0]
    if bad.size:
        first = int(bad[0])
        _check_record(header, int(indices[first]), int(deltas[first]),
                      first + 1)
    return StreamFile(header, indices, deltas)


def format_binary(stream):
    h = stream.header
    records = np.empty(len(stream), dtype=_RECORD)
    records['index'] = stream.indices
    records['delta'] = stream.deltas
    return _BINARY_HEADER.pack(BINARY_MAGIC, VERSION, h.n, h.m, h.M) + \
        records.tobytes()


def detect_format(data):
    return 'binary' if data[:4] == BINARY_MAGIC else 'text'


def read_stream(path, fmt=None):
    with open(path, 'rb') as fp:
        data = fp.read()
    fmt = fmt or detect_format(data)
    if fmt == 'binary':
        stream = parse_binary(data)
    else:
        try:
            text = data.decode('utf-8')
        except UnicodeDecodeError:
            raise StreamFormatException("text stream is not UTF-8")
        stream = parse_text(text)
    log.debug("read %d updates from %s (%s)", len(stream), path, fmt)
    return stream


def write_stream(path, stream, fmt='text'):
    if fmt not in FORMATS:
        raise ValueError("unknown stream format {}".format(fmt))
    if fmt == 'binary':
        data = format_binary(stream)
    else:
        data = format_text(stream).encode('utf-8')
    with open(path, 'wb') as fp:
        fp.write(data)
