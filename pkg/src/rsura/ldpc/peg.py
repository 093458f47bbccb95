"""Progressive edge growth (PEG) construction of sparse parity-check matrices.

Used offline to build the shipped (264, 88) code; kept in the package so the
asset can be regenerated and audited.
"""

from __future__ import annotations

import numpy as np

from .code import ParityCheckMatrix, _gf2_rref


def peg(n_checks: int, var_degrees, rng: np.random.Generator) -> np.ndarray:
    """Place edges one at a time, each on a check as far as possible from the variable.

    Variables are processed in order of increasing degree. Among candidate
    checks at maximal depth (or unreachable), the least-loaded is chosen,
    ties broken at random.
    """
    var_degrees = np.asarray(var_degrees)
    n = var_degrees.size
    check_adj: list[set[int]] = [set() for _ in range(n_checks)]
    var_adj: list[set[int]] = [set() for _ in range(n)]
    check_deg = np.zeros(n_checks, dtype=int)

    for v in np.argsort(var_degrees, kind="stable"):
        for k in range(var_degrees[v]):
            if k == 0:
                candidates = np.arange(n_checks)
            else:
                candidates = _farthest_checks(v, var_adj, check_adj, n_checks)
            loads = check_deg[candidates]
            best = candidates[loads == loads.min()]
            c = int(rng.choice(best))
            var_adj[v].add(c)
            check_adj[c].add(v)
            check_deg[c] += 1

    h = np.zeros((n_checks, n), dtype=np.uint8)
    for v, checks in enumerate(var_adj):
        h[list(checks), v] = 1
    return h


def _farthest_checks(v, var_adj, check_adj, n_checks) -> np.ndarray:
    reached = set(var_adj[v])
    frontier = set(var_adj[v])
    seen_vars = {v}
    while True:
        next_vars = set()
        for c in frontier:
            next_vars |= check_adj[c]
        next_vars -= seen_vars
        seen_vars |= next_vars
        new_checks = set()
        for u in next_vars:
            new_checks |= var_adj[u]
        new_checks -= reached
        if len(reached | new_checks) == n_checks and new_checks:
            # Everything reachable at the next depth: keep the last full layer's complement.
            return np.array(sorted(new_checks))
        if not new_checks:
            unreached = np.setdiff1d(np.arange(n_checks), np.fromiter(reached, int))
            if unreached.size:
                return unreached
            return np.array(sorted(frontier))
        reached |= new_checks
        frontier = new_checks


def systematic_order(h: np.ndarray) -> np.ndarray | None:
    """Permute columns so an information set comes first; None if H is rank deficient."""
    m, n = h.shape
    _, pivots = _gf2_rref(h)
    if len(pivots) != m:
        return None
    info = [j for j in range(n) if j not in set(pivots)]
    return h[:, info + list(pivots)]


def build_code(n: int, k: int, var_degrees, seed: int, attempts: int = 50) -> ParityCheckMatrix:
    """PEG code with info bits first; retries seeds until H has full rank."""
    rng = np.random.default_rng(seed)
    for _ in range(attempts):
        h = peg(n - k, var_degrees, rng)
        h = systematic_order(h)
        if h is not None:
            code = ParityCheckMatrix(h)
            assert code.k == k and code.is_systematic
            return code
    raise RuntimeError("no full-rank PEG matrix found")
