"""Per-user probability of error, false alarms and the minimum-Eb/N0 search."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "BracketError",
    "TrialResult",
    "bisect_min_ebn0",
    "false_alarm_rate",
    "pupe",
    "pupe_ci95",
    "trial_misses",
]


@dataclass
class TrialResult:
    """Outcome of one Monte-Carlo trial.

    ``sent`` and ``recovered`` are bit matrices with one message per row;
    ``sent`` may contain duplicates, ``recovered`` never does.
    """

    sent: np.ndarray
    recovered: np.ndarray
    per_iteration_ber: list[float] = field(default_factory=list)
    sic_rounds: int = 0
    ese_iters: int = 0
    wall_time: float = 0.0

    @property
    def ka(self) -> int:
        return self.sent.shape[0]


def _keys(msgs: np.ndarray) -> list[bytes]:
    return [np.asarray(m, dtype=np.uint8).tobytes() for m in msgs]


def trial_misses(result: TrialResult) -> int:
    """Sent messages (counted with multiplicity) absent from the recovered list.

    One recovered copy covers a single multiplicity unit of a duplicated message.
    """
    sent = Counter(_keys(result.sent))
    got = Counter(_keys(result.recovered))
    return sum(max(n - got[k], 0) for k, n in sent.items())


def trial_false_alarms(result: TrialResult) -> int:
    sent = set(_keys(result.sent))
    return sum(k not in sent for k in _keys(result.recovered))


def pupe(results: Sequence[TrialResult]) -> float:
    if not results:
        raise ValueError("pupe needs at least one trial")
    return float(np.mean([trial_misses(r) / r.ka for r in results]))


def pupe_ci95(results: Sequence[TrialResult]) -> float:
    """Half-width of the normal-approximation 95% interval over all (trial, user) pairs."""
    p = pupe(results)
    n = sum(r.ka for r in results)
    return 1.96 * math.sqrt(p * (1.0 - p) / n)


def false_alarm_rate(results: Sequence[TrialResult]) -> float:
    if not results:
        raise ValueError("false_alarm_rate needs at least one trial")
    return float(np.mean([trial_false_alarms(r) / r.ka for r in results]))


class BracketError(ValueError):
    """The search interval does not straddle the target."""

    def __init__(self, lo_db, hi_db, pupe_lo, pupe_hi, target):
        super().__init__(
            f"PUPE({hi_db} dB) = {pupe_hi:.4g} exceeds the target {target} "
            f"(PUPE({lo_db} dB) = {pupe_lo:.4g}); widen the bracket"
        )
        self.lo_db, self.hi_db = lo_db, hi_db
        self.pupe_lo, self.pupe_hi = pupe_lo, pupe_hi


def bisect_min_ebn0(pupe_at: Callable[[float], float], target: float, lo_db: float,
                    hi_db: float, resolution: float = 0.1):
    """Smallest tested Eb/N0 whose empirical PUPE meets ``target``.

    Returns ``(ebn0_db, evaluations)`` where ``evaluations`` maps every tested
    Eb/N0 to its PUPE. If the lower end already meets the target it is
    returned immediately.
    """
    if not lo_db < hi_db:
        raise ValueError("need lo_db < hi_db")
    seen: dict[float, float] = {}

    def at(x):
        x = round(x, 9)
        if x not in seen:
            seen[x] = pupe_at(x)
        return seen[x]

    if at(lo_db) <= target:
        return lo_db, seen
    if at(hi_db) > target:
        raise BracketError(lo_db, hi_db, seen[round(lo_db, 9)], seen[round(hi_db, 9)], target)
    lo, hi = lo_db, hi_db
    while hi - lo > resolution + 1e-9:
        mid = 0.5 * (lo + hi)
        if at(mid) <= target:
            hi = mid
        else:
            lo = mid
    return round(hi, 9), seen
