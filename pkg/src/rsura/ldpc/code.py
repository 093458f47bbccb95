"""Binary linear block codes given by a sparse parity-check matrix."""

from __future__ import annotations

from functools import cached_property
from pathlib import Path

import numpy as np

__all__ = [
    "AlistError",
    "ParityCheckMatrix",
    "encode",
    "gf2_rank",
    "load_alist",
    "syndrome_check",
    "to_alist",
]


class AlistError(ValueError):
    """Raised for malformed or inconsistent alist text."""


def _gf2_rref(mat: np.ndarray, col_order=None):
    """Row-reduce a 0/1 matrix over GF(2).

    Columns are scanned in ``col_order`` (default left to right). Returns the
    reduced matrix and the list of pivot columns, one per non-zero row.
    """
    r = (np.asarray(mat) & 1).astype(bool).copy()
    rows = r.shape[0]
    cols = range(r.shape[1]) if col_order is None else col_order
    pivots = []
    row = 0
    for c in cols:
        if row == rows:
            break
        hit = np.flatnonzero(r[row:, c])
        if hit.size == 0:
            continue
        p = row + hit[0]
        if p != row:
            r[[row, p]] = r[[p, row]]
        others = np.flatnonzero(r[:, c])
        others = others[others != row]
        r[others] ^= r[row]
        pivots.append(c)
        row += 1
    return r[:row], pivots


def gf2_rank(mat: np.ndarray) -> int:
    return len(_gf2_rref(mat)[1])


class ParityCheckMatrix:
    """Parity-check matrix ``H`` with its Tanner-graph adjacency.

    The code is systematic when the last ``cols - k`` columns of ``H`` carry
    full rank; then the payload sits in the first ``k`` codeword positions
    and :func:`encode` works. Other matrices can still be decoded.
    """

    def __init__(self, h: np.ndarray):
        h = np.asarray(h)
        if h.ndim != 2 or h.size == 0:
            raise ValueError("H must be a non-empty 2-D matrix")
        if np.any((h != 0) & (h != 1)):
            raise ValueError("H must be binary")
        self.h = h.astype(np.uint8)
        self.h.setflags(write=False)
        self.rows, self.cols = self.h.shape
        check_idx, var_idx = np.nonzero(self.h)
        self.edge_check = check_idx
        self.edge_var = var_idx
        self.check_to_vars = [np.flatnonzero(r) for r in self.h]
        self.var_to_checks = [np.flatnonzero(c) for c in self.h.T]
        if any(v.size == 0 for v in self.var_to_checks):
            raise ValueError("every variable node needs at least one check")

    @property
    def n_edges(self) -> int:
        return self.edge_check.size

    @cached_property
    def rank(self) -> int:
        return gf2_rank(self.h)

    @property
    def k(self) -> int:
        return self.cols - self.rank

    @cached_property
    def _parity_map(self) -> np.ndarray | None:
        # Pivot on the trailing columns first so parity lands at positions k..n-1.
        reduced, pivots = _gf2_rref(self.h, col_order=range(self.cols - 1, -1, -1))
        if sorted(pivots) != list(range(self.k, self.cols)):
            return None
        order = np.argsort(pivots)
        # Row i: parity[pivot_i] = sum_j reduced[i, j] * payload[j] over info columns.
        return reduced[order][:, : self.k].astype(np.uint8)

    @property
    def is_systematic(self) -> bool:
        return self._parity_map is not None

    def __repr__(self):
        return f"ParityCheckMatrix({self.rows}x{self.cols}, k={self.k}, edges={self.n_edges})"


def _ints(line: str, lineno: int) -> list[int]:
    try:
        return [int(tok) for tok in line.split()]
    except ValueError as exc:
        raise AlistError(f"line {lineno}: non-integer token") from exc


def load_alist(text: str, rows: int | None = None, cols: int | None = None) -> ParityCheckMatrix:
    """Parse MacKay's alist format (1-indexed, zero padding tolerated).

    ``rows``/``cols``, when given, are checked against the header.
    """
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 4:
        raise AlistError("alist needs at least four header lines")
    head = _ints(lines[0], 1)
    if len(head) != 2:
        raise AlistError("first line must hold 'n m'")
    n, m = head
    if n < 1 or m < 1:
        raise AlistError("dimensions must be positive")
    maxes = _ints(lines[1], 2)
    if len(maxes) != 2:
        raise AlistError("second line must hold the two maximum degrees")
    col_deg = _ints(lines[2], 3)
    row_deg = _ints(lines[3], 4)
    if len(col_deg) != n or len(row_deg) != m:
        raise AlistError("degree lists do not match the dimensions")
    if max(col_deg) != maxes[0] or max(row_deg) != maxes[1]:
        raise AlistError("maximum degrees disagree with the degree lists")
    if sum(col_deg) != sum(row_deg):
        raise AlistError("column and row degrees count different edge totals")
    if len(lines) < 4 + n + m:
        raise AlistError(f"truncated alist: expected {4 + n + m} lines, found {len(lines)}")

    h = np.zeros((m, n), dtype=np.uint8)
    for j in range(n):
        idx = [v for v in _ints(lines[4 + j], 5 + j) if v != 0]
        if len(idx) != col_deg[j]:
            raise AlistError(f"column {j + 1}: {len(idx)} entries, degree says {col_deg[j]}")
        if len(set(idx)) != len(idx) or not all(1 <= v <= m for v in idx):
            raise AlistError(f"column {j + 1}: duplicate or out-of-range row index")
        h[np.asarray(idx) - 1, j] = 1
    h_rows = np.zeros_like(h)
    for i in range(m):
        idx = [v for v in _ints(lines[4 + n + i], 5 + n + i) if v != 0]
        if len(idx) != row_deg[i]:
            raise AlistError(f"row {i + 1}: {len(idx)} entries, degree says {row_deg[i]}")
        if len(set(idx)) != len(idx) or not all(1 <= v <= n for v in idx):
            raise AlistError(f"row {i + 1}: duplicate or out-of-range column index")
        h_rows[i, np.asarray(idx) - 1] = 1
    if not np.array_equal(h, h_rows):
        raise AlistError("column and row adjacency lists disagree")
    if rows is not None and rows != m or cols is not None and cols != n:
        raise AlistError(f"expected a {rows}x{cols} matrix, alist describes {m}x{n}")
    return ParityCheckMatrix(h)


def read_alist(path: str | Path, **dims) -> ParityCheckMatrix:
    return load_alist(Path(path).read_text(), **dims)


def to_alist(code: ParityCheckMatrix) -> str:
    h = code.h
    col_deg = h.sum(axis=0)
    row_deg = h.sum(axis=1)
    dv, dc = int(col_deg.max()), int(row_deg.max())
    out = [f"{code.cols} {code.rows}", f"{dv} {dc}",
           " ".join(map(str, col_deg)), " ".join(map(str, row_deg))]
    for idx in code.var_to_checks:
        out.append(" ".join(str(v + 1) for v in idx) + " 0" * (dv - idx.size))
    for idx in code.check_to_vars:
        out.append(" ".join(str(v + 1) for v in idx) + " 0" * (dc - idx.size))
    return "\n".join(out) + "\n"


def encode(payload, code: ParityCheckMatrix) -> np.ndarray:
    """Systematic encoding: ``[payload | parity]``. Accepts one word or a batch (rows)."""
    pmap = code._parity_map
    if pmap is None:
        raise ValueError("code is not systematic in its leading positions")
    u = np.asarray(payload)
    if u.shape[-1] != code.k:
        raise ValueError(f"payload must have {code.k} bits, got {u.shape[-1]}")
    if np.any((u != 0) & (u != 1)):
        raise ValueError("payload must be binary")
    u = u.astype(np.uint8)
    parity = (u.astype(np.int32) @ pmap.T.astype(np.int32)) & 1
    return np.concatenate([u, parity.astype(np.uint8)], axis=-1)


def syndrome(bits, code: ParityCheckMatrix) -> np.ndarray:
    b = np.asarray(bits)
    if b.shape[-1] != code.cols:
        raise ValueError(f"word must have {code.cols} bits, got {b.shape[-1]}")
    return (b.astype(np.int32) @ code.h.T.astype(np.int32)) & 1


def syndrome_check(bits, code: ParityCheckMatrix):
    """True iff ``H @ bits == 0`` over GF(2); batched over leading axes."""
    ok = ~syndrome(bits, code).any(axis=-1)
    return bool(ok) if ok.ndim == 0 else ok
