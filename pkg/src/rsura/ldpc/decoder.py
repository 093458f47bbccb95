"""Sum-product belief propagation with full-posterior soft output.

LLRs follow the BPSK convention 0 -> +1: a positive value favours bit 0.
Decoding runs over a batch of independent words (one per row); the message
passing itself is a compiled flooding-schedule kernel.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .code import ParityCheckMatrix

__all__ = ["LLR_CLIP", "decode_siso", "hard_decision"]

LLR_CLIP = 30.0
_T_MAX = math.tanh(LLR_CLIP / 2)


class _Graph:
    """CSR adjacency of the Tanner graph: edges ordered check-major."""

    def __init__(self, code: ParityCheckMatrix):
        self.check_ptr = np.concatenate([[0], np.cumsum(code.h.sum(axis=1))]).astype(np.int64)
        self.edge_var = code.edge_var.astype(np.int64)
        self.var_edges = np.argsort(code.edge_var, kind="stable").astype(np.int64)
        self.var_ptr = np.concatenate([[0], np.cumsum(code.h.sum(axis=0))]).astype(np.int64)
        self.max_dc = int(np.diff(self.check_ptr).max())


def _graph(code: ParityCheckMatrix) -> _Graph:
    g = code.__dict__.get("_bp_graph")
    if g is None:
        g = code.__dict__["_bp_graph"] = _Graph(code)
    return g


@njit(cache=True, fastmath=True)
def _bp(llr, check_ptr, edge_var, var_ptr, var_edges, max_dc, iters, posterior, ok):
    n_words, n = llr.shape
    m = check_ptr.size - 1
    n_edges = edge_var.size
    v2c = np.empty(n_edges)
    c2v = np.empty(n_edges)
    t = np.empty(max_dc)
    pre = np.empty(max_dc + 1)
    for w in range(n_words):
        ch = llr[w]
        tot = posterior[w]
        for e in range(n_edges):
            v2c[e] = ch[edge_var[e]]
        for _ in range(iters):
            # check nodes: leave-one-out product of tanh(v2c / 2)
            for c in range(m):
                lo = check_ptr[c]
                d = check_ptr[c + 1] - lo
                pre[0] = 1.0
                for j in range(d):
                    t[j] = math.tanh(0.5 * v2c[lo + j])
                    pre[j + 1] = pre[j] * t[j]
                suf = 1.0
                for j in range(d - 1, -1, -1):
                    p = pre[j] * suf
                    if p > _T_MAX:
                        p = _T_MAX
                    elif p < -_T_MAX:
                        p = -_T_MAX
                    c2v[lo + j] = 2.0 * math.atanh(p)
                    suf *= t[j]
            # variable nodes: posterior = channel + all incoming check messages
            for v in range(n):
                s = ch[v]
                for j in range(var_ptr[v], var_ptr[v + 1]):
                    s += c2v[var_edges[j]]
                tot[v] = s
            good = True
            for v in range(n):
                if tot[v] == 0.0:
                    good = False
                    break
            if good:
                for c in range(m):
                    par = 0
                    for e in range(check_ptr[c], check_ptr[c + 1]):
                        if tot[edge_var[e]] < 0.0:
                            par ^= 1
                    if par:
                        good = False
                        break
            if good:
                ok[w] = True
                break
            for e in range(n_edges):
                x = tot[edge_var[e]] - c2v[e]
                if x > LLR_CLIP:
                    x = LLR_CLIP
                elif x < -LLR_CLIP:
                    x = -LLR_CLIP
                v2c[e] = x


def decode_siso(channel_llrs, code: ParityCheckMatrix, bp_iters: int = 20):
    """Run up to ``bp_iters`` flooding sum-product iterations.

    Parameters
    ----------
    channel_llrs : array, shape (n,) or (batch, n)
        Channel LLRs; clipped to +-30 on entry.
    code : ParityCheckMatrix
    bp_iters : int
        Iteration cap. At least one iteration always runs; a word stops as
        soon as its hard decisions satisfy every check.

    Returns
    -------
    posterior : ndarray
        Full a-posteriori LLRs (channel plus all incoming check messages).
    syndrome_ok : bool or ndarray of bool
        True where the hard decisions form a codeword. A zero posterior LLR
        is an undecided bit and never counts as satisfied.
    """
    llr = np.asarray(channel_llrs, dtype=np.float64)
    single = llr.ndim == 1
    llr = np.atleast_2d(llr)
    if llr.shape[-1] != code.cols:
        raise ValueError(f"expected {code.cols} LLRs per word, got {llr.shape[-1]}")
    if bp_iters < 1:
        raise ValueError("bp_iters must be >= 1")
    llr = np.ascontiguousarray(np.clip(np.nan_to_num(llr, nan=0.0), -LLR_CLIP, LLR_CLIP))
    g = _graph(code)
    posterior = np.empty_like(llr)
    ok = np.zeros(llr.shape[0], dtype=np.bool_)
    _bp(llr, g.check_ptr, g.edge_var, g.var_ptr, g.var_edges, g.max_dc, int(bp_iters),
        posterior, ok)
    if single:
        return posterior[0], bool(ok[0])
    return posterior, ok


def hard_decision(llrs) -> np.ndarray:
    return (np.asarray(llrs) < 0).astype(np.uint8)
