"""Common signature codebook and header <-> column mapping."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "SignatureCodebook",
    "column_to_header",
    "generate",
    "header_to_column",
]


@dataclass(frozen=True, eq=False)
class SignatureCodebook:
    """``n_chips x t_size`` matrix whose columns are unit-norm signatures."""

    columns: np.ndarray

    def __post_init__(self):
        cols = np.asarray(self.columns, dtype=np.float64)
        if cols.ndim != 2:
            raise ValueError("codebook must be a 2-D matrix")
        cols.setflags(write=False)
        object.__setattr__(self, "columns", cols)

    @property
    def n_chips(self) -> int:
        return self.columns.shape[0]

    @property
    def t_size(self) -> int:
        return self.columns.shape[1]

    @property
    def b_header(self) -> int:
        return int(self.t_size).bit_length() - 1

    def __getitem__(self, idx):
        return self.columns[:, idx]

    def dump(self, path: str | Path) -> None:
        """Write ``n_chips``, ``t_size`` (uint32 LE) then row-major float64 LE entries."""
        with open(path, "wb") as fh:
            fh.write(struct.pack("<II", self.n_chips, self.t_size))
            fh.write(np.ascontiguousarray(self.columns, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path: str | Path) -> "SignatureCodebook":
        raw = Path(path).read_bytes()
        if len(raw) < 8:
            raise ValueError("codebook file too short for its header")
        n_chips, t_size = struct.unpack("<II", raw[:8])
        expected = 8 + 8 * n_chips * t_size
        if len(raw) != expected:
            raise ValueError(f"codebook file has {len(raw)} bytes, expected {expected}")
        data = np.frombuffer(raw, dtype="<f8", offset=8).reshape(n_chips, t_size)
        return cls(data.astype(np.float64))


def generate(n_chips: int, t_size: int, seed: int) -> SignatureCodebook:
    """Draw i.i.d. N(0, 1) entries with PCG64(seed) and normalise every column."""
    if n_chips < 1 or t_size < 1:
        raise ValueError("codebook dimensions must be positive")
    rng = np.random.Generator(np.random.PCG64(seed))
    a = rng.standard_normal((n_chips, t_size))
    a /= np.linalg.norm(a, axis=0, keepdims=True)
    return SignatureCodebook(a)


def header_to_column(header_bits) -> int:
    """Big-endian bits -> column index. The bit count sets T = 2**len(bits)."""
    bits = np.asarray(header_bits).ravel()
    if bits.size == 0:
        raise ValueError("empty header")
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("header must be binary")
    return int(bits.astype(np.int64) @ (1 << np.arange(bits.size - 1, -1, -1, dtype=np.int64)))


def column_to_header(index: int, b_header: int) -> np.ndarray:
    """Inverse of :func:`header_to_column` for a ``b_header``-bit header."""
    index = int(index)
    if not 0 <= index < 2 ** b_header:
        raise IndexError(f"column {index} outside [0, {2 ** b_header})")
    return ((index >> np.arange(b_header - 1, -1, -1)) & 1).astype(np.uint8)


def headers_to_columns(headers: np.ndarray) -> np.ndarray:
    """Vectorised :func:`header_to_column` over the rows of a bit matrix."""
    headers = np.asarray(headers, dtype=np.int64)
    weights = 1 << np.arange(headers.shape[1] - 1, -1, -1, dtype=np.int64)
    return headers @ weights
