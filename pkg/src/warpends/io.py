"""Export of solution fields: CSV tables and the ``ENDS`` binary tensor format.

Binary layout (all little-endian)::

    magic    4 bytes   b"ENDS"
    version  u32       1
    ndim     u32
    dims     ndim x u32
    payload  prod(dims) x f64, C order
"""
from __future__ import annotations

import csv
import struct
from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = ["MAGIC", "VERSION", "FormatError", "write_ends", "read_ends", "write_csv", "read_csv"]

MAGIC = b"ENDS"
VERSION = 1


class FormatError(ValueError):
    """Malformed ``ENDS`` file."""


def write_ends(path, array) -> None:
    a = np.ascontiguousarray(array, dtype="<f8")
    header = MAGIC + struct.pack("<II", VERSION, a.ndim) + struct.pack(f"<{a.ndim}I", *a.shape)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(a.tobytes(order="C"))


def read_ends(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise FormatError(f"{path}: bad magic {data[:4]!r}")
    if len(data) < 12:
        raise FormatError(f"{path}: truncated header")
    version, ndim = struct.unpack_from("<II", data, 4)
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    off = 12 + 4 * ndim
    if len(data) < off:
        raise FormatError(f"{path}: truncated header")
    dims = struct.unpack_from(f"<{ndim}I", data, 12)
    count = int(np.prod(dims, dtype=np.int64))
    if len(data) != off + 8 * count:
        raise FormatError(f"{path}: payload has {len(data) - off} bytes, expected {8 * count}")
    return np.frombuffer(data, dtype="<f8", offset=off, count=count).reshape(dims).astype(float)


def write_csv(path, coords: Sequence[str], omega_nodes: Sequence[np.ndarray],
              radii: np.ndarray, u: np.ndarray) -> None:
    """One row per grid node: the cross-section coordinates, ``r``, then ``u``.

    ``u`` has shape ``(len(omega_nodes[0]), ..., len(radii))``. Values are
    written with ``repr`` precision so the table round-trips exactly.
    """
    mesh = np.meshgrid(*omega_nodes, radii, indexing="ij")
    if u.shape != mesh[0].shape:
        raise ValueError(f"field shape {u.shape} does not match grid {mesh[0].shape}")
    cols = [m.ravel() for m in mesh] + [np.asarray(u).ravel()]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([*coords, "r", "u"])
        for row in zip(*cols):
            w.writerow([repr(float(x)) for x in row])


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)
