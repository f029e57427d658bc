"""Binary Netpbm (P5 gray, P6 color) reading and writing.

Only ``maxval`` 255 is accepted.  PNG files are read through Pillow when it is
installed, behind the same :func:`read_image` entry point.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import ImageFormatError

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"


def _header_tokens(data, count):
    """Parse ``count`` whitespace-separated header tokens, skipping comments.

    Returns the tokens and the offset of the first raster byte, which follows
    exactly one whitespace character after the last token.
    """
    tokens = []
    pos = 0
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise ImageFormatError("truncated Netpbm header")
        tokens.append(data[start:pos])
    if pos >= n or not data[pos:pos + 1].isspace():
        raise ImageFormatError("missing whitespace after Netpbm header")
    return tokens, pos + 1


def decode_netpbm(data):
    """Decode P5/P6 bytes into a ``uint8`` array, (H, W) or (H, W, 3)."""
    magic = data[:2]
    if magic not in (b"P5", b"P6"):
        raise ImageFormatError(f"unsupported Netpbm magic {magic!r}")
    tokens, offset = _header_tokens(data[2:], 3)
    offset += 2
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise ImageFormatError(f"bad Netpbm header: {exc}") from None
    if width < 1 or height < 1:
        raise ImageFormatError(f"bad image size {width}x{height}")
    if maxval != 255:
        raise ImageFormatError(f"maxval {maxval} unsupported (need 255)")
    channels = 3 if magic == b"P6" else 1
    size = width * height * channels
    raster = data[offset:offset + size]
    if len(raster) != size:
        raise ImageFormatError(f"raster has {len(raster)} bytes, expected {size}")
    arr = np.frombuffer(raster, dtype=np.uint8).copy()
    shape = (height, width, 3) if channels == 3 else (height, width)
    return arr.reshape(shape)


def encode_pgm(img):
    img = np.asarray(img)
    if img.ndim != 2 or img.dtype != np.uint8:
        raise ValueError("PGM needs a 2-D uint8 array")
    h, w = img.shape
    return b"P5\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(img).tobytes()


def encode_ppm(img):
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3 or img.dtype != np.uint8:
        raise ValueError("PPM needs an (H, W, 3) uint8 array")
    h, w, _ = img.shape
    return b"P6\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(img).tobytes()


def write_pgm(path, img):
    with open(path, "wb") as fh:
        fh.write(encode_pgm(img))


def write_ppm(path, img):
    with open(path, "wb") as fh:
        fh.write(encode_ppm(img))


def _decode_png(data):
    try:
        from PIL import Image
    except ImportError:  # pragma: no cover
        raise ImageFormatError("PNG input needs Pillow installed") from None
    import io

    with Image.open(io.BytesIO(data)) as im:
        mode = "L" if im.mode in ("1", "L", "LA") else "RGB"
        return np.asarray(im.convert(mode), dtype=np.uint8)


def read_image(path):
    """Load a P5, P6 or PNG file as a gray (H, W) or color (H, W, 3) array."""
    with open(os.fspath(path), "rb") as fh:
        data = fh.read()
    if data.startswith(PNG_SIGNATURE):
        return _decode_png(data)
    return decode_netpbm(data)
