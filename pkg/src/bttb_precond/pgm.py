"""Minimal reader and writer for grayscale PGM files (P2 ASCII and P5 binary)."""
from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .errors import NonSquare, UnsupportedFormat

__all__ = ["read_pgm", "write_pgm", "read_image", "write_image"]

_TOKEN = re.compile(rb"(#[^\n]*\n?)|(\S+)")


def _header(data: bytes):
    """Parse magic, width, height, maxval; return them and the raster offset."""
    tokens = []
    pos = 0
    while len(tokens) < 4:
        m = _TOKEN.search(data, pos)
        if m is None:
            raise UnsupportedFormat("truncated PGM header")
        pos = m.end()
        if m.group(2) is not None:
            tokens.append(m.group(2))
    magic = tokens[0]
    if magic not in (b"P2", b"P5"):
        raise UnsupportedFormat(f"not a grayscale PGM (magic {magic!r})")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise UnsupportedFormat("malformed PGM header") from None
    if width < 1 or height < 1 or not 1 <= maxval <= 65535:
        raise UnsupportedFormat(f"bad PGM dimensions or maxval: {width}x{height}, {maxval}")
    # exactly one whitespace byte separates the header from a binary raster
    return magic, width, height, maxval, pos + 1


def read_pgm(path):
    """Return the raw integer raster and its maxval."""
    data = Path(path).read_bytes()
    magic, width, height, maxval, offset = _header(data)
    count = width * height
    if magic == b"P5":
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        raster = np.frombuffer(data, dtype=dtype, count=count, offset=offset) if len(
            data) >= offset + count * dtype.itemsize else None
    else:
        body = re.sub(rb"#[^\n]*", b"", data[offset - 1 :])
        values = body.split()
        raster = np.array(values[:count], dtype=np.int64) if len(values) >= count else None
    if raster is None:
        raise UnsupportedFormat("PGM raster shorter than its header claims")
    return raster.reshape(height, width).astype(np.int64), maxval


def write_pgm(path, raster, maxval=255, binary=True):
    raster = np.asarray(raster)
    if raster.ndim != 2:
        raise ValueError("PGM raster must be 2-D")
    if not 1 <= maxval <= 65535:
        raise ValueError("maxval must be in [1, 65535]")
    if raster.min(initial=0) < 0 or raster.max(initial=0) > maxval:
        raise ValueError("raster values outside [0, maxval]")
    h, w = raster.shape
    if binary:
        dtype = ">u2" if maxval > 255 else "u1"
        payload = f"P5\n{w} {h}\n{maxval}\n".encode() + raster.astype(dtype).tobytes()
    else:
        lines = [" ".join(str(int(v)) for v in row) for row in raster]
        payload = (f"P2\n{w} {h}\n{maxval}\n" + "\n".join(lines) + "\n").encode()
    Path(path).write_bytes(payload)


def read_image(path, require_square=False) -> np.ndarray:
    """Read a PGM file as floats in [0, 1]."""
    raster, maxval = read_pgm(path)
    if require_square and raster.shape[0] != raster.shape[1]:
        raise NonSquare(f"image is {raster.shape[0]}x{raster.shape[1]}, a square one is required")
    return raster / float(maxval)


def write_image(image, path, maxval=255, binary=True):
    """Clamp ``image`` to [0, 1], quantize to ``maxval`` levels and write it."""
    image = np.nan_to_num(np.asarray(image, dtype=float), nan=0.0)
    raster = np.rint(np.clip(image, 0.0, 1.0) * maxval).astype(np.int64)
    write_pgm(path, raster, maxval, binary)
