"""Binary latent-tensor file format.

Layout: 8-byte magic ``VPLT0001``, u32 rank, rank x u32 dims, then the
payload as little-endian float32 in row-major order.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"VPLT0001"


def write_latent(path, arr: np.ndarray) -> None:
    arr = np.ascontiguousarray(arr, dtype="<f4")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", arr.ndim))
        f.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        f.write(arr.tobytes(order="C"))


def read_latent(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < len(MAGIC) + 4 or data[: len(MAGIC)] != MAGIC:
        raise ValueError(f"{path}: not a latent file (bad magic)")
    off = len(MAGIC)
    (rank,) = struct.unpack_from("<I", data, off)
    off += 4
    if rank == 0 or rank > 8:
        raise ValueError(f"{path}: implausible rank {rank}")
    dims = struct.unpack_from(f"<{rank}I", data, off)
    off += 4 * rank
    count = int(np.prod(dims))
    payload = data[off : off + 4 * count]
    if len(payload) != 4 * count:
        raise ValueError(f"{path}: truncated payload")
    return np.frombuffer(payload, dtype="<f4").reshape(dims).astype(np.float32)
