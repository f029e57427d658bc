"""RXW1 weight files.

Layout, all integers little-endian ``u32``::

    b"RXW1"
    version                      (1)
    charset size                 (num_classes - 1)
    n_conv, conv filters...
    n_rnn, rnn units...
    input_h, input_w
    tensor count
    per tensor:
        name length, UTF-8 name
        rank, extents...
        raw little-endian float64 data
"""

from __future__ import annotations

import struct

import numpy as np

from ..errors import BadMagic, ShapeMismatch, TruncatedFile, VersionMismatch
from .model import Model, ModelConfig

MAGIC = b"RXW1"
VERSION = 1


def encode_model(model):
    cfg = model.config
    parts = [MAGIC]
    u32 = []
    u32 += [VERSION, cfg.num_classes - 1]
    u32 += [len(cfg.conv_filters), *cfg.conv_filters]
    u32 += [len(cfg.rnn_units), *cfg.rnn_units]
    u32 += [cfg.input_h, cfg.input_w, len(model.weights)]
    parts.append(struct.pack(f"<{len(u32)}I", *u32))
    for name, tensor in model.weights.items():
        raw_name = name.encode("utf-8")
        parts.append(struct.pack("<I", len(raw_name)) + raw_name)
        parts.append(struct.pack(f"<I{tensor.ndim}I", tensor.ndim, *tensor.shape))
        parts.append(np.ascontiguousarray(tensor, dtype="<f8").tobytes())
    return b"".join(parts)


class _Reader:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def take(self, n):
        if self.pos + n > len(self.data):
            raise TruncatedFile(f"weight file truncated at byte {len(self.data)}")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def u32(self, count=1):
        vals = struct.unpack(f"<{count}I", self.take(4 * count))
        return vals if count != 1 else vals[0]


def decode_model(data, num_classes=None):
    """Parse RXW1 bytes.  ``num_classes``, when given, must match the file."""
    if data[:4] != MAGIC:
        raise BadMagic(f"not an RXW1 weight file (magic {data[:4]!r})")
    r = _Reader(data)
    r.take(4)
    version = r.u32()
    if version != VERSION:
        raise VersionMismatch(f"weight file version {version}, expected {VERSION}")
    charset_size = r.u32()
    conv = r.u32(r.u32())
    rnn = r.u32(r.u32())
    input_h, input_w = r.u32(2)
    count = r.u32()
    try:
        config = ModelConfig(charset_size + 1, tuple(np.atleast_1d(conv)),
                             tuple(np.atleast_1d(rnn)), input_h, input_w)
    except ValueError as exc:
        raise ShapeMismatch(f"invalid embedded config: {exc}") from None
    if num_classes is not None and num_classes != config.num_classes:
        raise ShapeMismatch(
            f"model has {config.num_classes} classes, charset needs {num_classes}")
    expected = config.weight_shapes()
    if count != len(expected):
        raise ShapeMismatch(f"file holds {count} tensors, config needs {len(expected)}")
    weights = {}
    for _ in range(count):
        name = r.take(r.u32()).decode("utf-8")
        rank = r.u32()
        shape = tuple(np.atleast_1d(r.u32(rank))) if rank else ()
        shape = tuple(int(s) for s in shape)
        if expected.get(name) != shape:
            raise ShapeMismatch(f"{name}: shape {shape} != {expected.get(name)}")
        size = int(np.prod(shape)) * 8
        weights[name] = np.frombuffer(r.take(size), dtype="<f8").reshape(shape).astype(np.float64)
    if r.pos != len(data):
        raise ShapeMismatch(f"{len(data) - r.pos} trailing bytes after last tensor")
    return Model(config, weights)


def save_model(model, path):
    with open(path, "wb") as fh:
        fh.write(encode_model(model))


def load_model(path, num_classes=None):
    with open(path, "rb") as fh:
        return decode_model(fh.read(), num_classes)
