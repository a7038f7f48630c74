"""Binary vector interchange and CSV matrix helpers.

Vector format: 8-byte magic "SPRSREC1", little-endian u64 length, then
that many little-endian float64 values.  Bit-exact across tools.
"""

from __future__ import annotations

import struct

import numpy as np

from sparserec.errors import UsageError

MAGIC = b"SPRSREC1"


def vector_to_bytes(x: np.ndarray) -> bytes:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise UsageError("expected a 1-d vector")
    return MAGIC + struct.pack("<Q", x.size) + x.astype("<f8").tobytes()


def vector_from_bytes(blob: bytes) -> np.ndarray:
    if len(blob) < 16 or blob[:8] != MAGIC:
        raise UsageError("bad magic: not a SPRSREC1 vector")
    (length,) = struct.unpack("<Q", blob[8:16])
    expected = 16 + 8 * length
    if len(blob) != expected:
        raise UsageError(f"expected {expected} bytes, got {len(blob)}")
    return np.frombuffer(blob[16:], dtype="<f8").copy()


def write_vector(path, x: np.ndarray):
    with open(path, "wb") as fh:
        fh.write(vector_to_bytes(x))


def read_vector(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return vector_from_bytes(fh.read())


def write_matrix_csv(path, matrix: np.ndarray):
    matrix = np.asarray(matrix, dtype=np.float64)
    with open(path, "w") as fh:
        for row in matrix:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_matrix_csv(path) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append([float(v) for v in line.split(",")])
    if not rows:
        raise UsageError("empty matrix file")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise UsageError("ragged rows in matrix file")
    return np.array(rows)
