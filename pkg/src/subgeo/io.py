"""Point-set files.

Text: a header line ``GPTS 1 <n> <d>`` followed by ``n`` lines of ``d``
numbers separated by single spaces, written with 17 significant digits.

Binary: ``b"GPTS"``, a version byte (1), ``n`` as little-endian uint64,
``d`` as little-endian uint32, then ``n*d`` little-endian float64 values in
row-major order.
"""

from __future__ import annotations

import os
import struct

import numpy as np

from .errors import FormatError, InputError
from .geometry import PointSet

__all__ = ["MAGIC", "VERSION", "write_text", "read_text", "write_binary", "read_binary",
           "read_points", "write_points"]

MAGIC = b"GPTS"
VERSION = 1
_HEAD = struct.Struct("<4sBQI")


def _matrix(P) -> np.ndarray:
    X = P.coords if isinstance(P, PointSet) else np.asarray(P, dtype=np.float64)
    if X.ndim != 2:
        raise InputError("points must form an (n, d) array")
    if not np.all(np.isfinite(X)):
        raise InputError("points must be finite")
    return X


def write_text(path, P) -> None:
    X = _matrix(P)
    n, d = X.shape
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(f"GPTS {VERSION} {n} {d}\n")
        for row in X:
            fh.write(" ".join(format(float(v), ".17g") for v in row))
            fh.write("\n")


def read_text(path) -> PointSet:
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise FormatError(f"{path}: empty file (line 1)")
    head = lines[0].split(" ")
    if len(head) != 4 or head[0] != "GPTS":
        raise FormatError(f"{path}: line 1: bad magic, expected 'GPTS 1 <n> <d>'")
    if head[1] != str(VERSION):
        raise FormatError(f"{path}: line 1: unsupported version {head[1]!r}")
    try:
        n, d = int(head[2]), int(head[3])
    except ValueError:
        raise FormatError(f"{path}: line 1: n and d must be integers") from None
    if n < 0 or d < 1:
        raise FormatError(f"{path}: line 1: need n >= 0 and d >= 1")
    if len(lines) - 1 < n:
        raise FormatError(f"{path}: line {len(lines) + 1}: truncated, expected {n} rows")
    if len(lines) - 1 > n:
        raise FormatError(f"{path}: line {n + 2}: trailing data after {n} rows")
    X = np.empty((n, d))
    for i in range(n):
        parts = lines[i + 1].split(" ")
        if len(parts) != d:
            raise FormatError(f"{path}: line {i + 2}: expected {d} values, found {len(parts)}")
        try:
            X[i] = [float(t) for t in parts]
        except ValueError:
            raise FormatError(f"{path}: line {i + 2}: not a number") from None
        if not np.all(np.isfinite(X[i])):
            raise FormatError(f"{path}: line {i + 2}: non-finite value")
    if n == 0:
        raise FormatError(f"{path}: line 1: empty point set")
    return PointSet(X)


def write_binary(path, P) -> None:
    X = _matrix(P)
    n, d = X.shape
    with open(path, "wb") as fh:
        fh.write(_HEAD.pack(MAGIC, VERSION, n, d))
        fh.write(np.ascontiguousarray(X, dtype="<f8").tobytes())


def read_binary(path) -> PointSet:
    with open(path, "rb") as fh:
        buf = fh.read()
    if len(buf) < 4 or buf[:4] != MAGIC:
        raise FormatError(f"{path}: byte 0: bad magic")
    if len(buf) < 5:
        raise FormatError(f"{path}: byte 4: truncated header")
    if buf[4] != VERSION:
        raise FormatError(f"{path}: byte 4: unsupported version {buf[4]}")
    if len(buf) < _HEAD.size:
        raise FormatError(f"{path}: byte {len(buf)}: truncated header")
    _, _, n, d = _HEAD.unpack_from(buf, 0)
    if n < 1 or d < 1:
        raise FormatError(f"{path}: byte 5: need n >= 1 and d >= 1")
    need = _HEAD.size + 8 * n * d
    if len(buf) < need:
        # offset of the first missing byte
        raise FormatError(f"{path}: byte {len(buf)}: truncated, expected {need} bytes")
    if len(buf) > need:
        raise FormatError(f"{path}: byte {need}: trailing data")
    X = np.frombuffer(buf, dtype="<f8", count=n * d, offset=_HEAD.size).astype(np.float64)
    bad = np.flatnonzero(~np.isfinite(X))
    if bad.size:
        raise FormatError(f"{path}: byte {_HEAD.size + 8 * int(bad[0])}: non-finite value")
    return PointSet(X.reshape(n, d))


def _is_binary(path) -> bool:
    with open(path, "rb") as fh:
        head = fh.read(5)
    return len(head) == 5 and head[:4] == MAGIC and head[4] != ord(" ")


def read_points(path) -> PointSet:
    """Read either format, sniffing the fifth byte."""
    if not os.path.exists(path):
        raise InputError(f"{path}: no such file")
    return read_binary(path) if _is_binary(path) else read_text(path)


def write_points(path, P, fmt: str | None = None) -> None:
    """Write in ``fmt`` (``"text"``/``"binary"``); by default binary for a
    ``.bin`` suffix and text otherwise."""
    if fmt is None:
        fmt = "binary" if str(path).endswith(".bin") else "text"
    if fmt == "text":
        write_text(path, P)
    elif fmt == "binary":
        write_binary(path, P)
    else:
        raise InputError(f"unknown format {fmt!r}")
