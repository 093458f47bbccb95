"""Seeded Monte-Carlo harness: trials, sweeps, convergence studies, Eb/N0 search.

Every random draw of a trial (messages and noise) comes from a seed derived
from ``(master seed, Ka, trial index)``; the codebook comes from the master
seed alone. Results therefore do not depend on how trials are spread over
worker processes. The trial seed deliberately ignores Eb/N0: every point of
a sweep sees the same messages and the same unit-variance noise pattern
(common random numbers), which keeps PUPE-vs-Eb/N0 curves smooth.
"""

from __future__ import annotations

import csv
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from .codebook import SignatureCodebook, generate
from .config import SystemConfig
from .ldpc import ParityCheckMatrix, default_code
from .metrics import TrialResult, bisect_min_ebn0, false_alarm_rate, pupe, pupe_ci95
from .phy import encode_users, transmit
from .receiver import IterativeGaussianReceiver, Truth

__all__ = [
    "CSV_VERSION",
    "ConvergenceResult",
    "PointSummary",
    "SweepSpec",
    "min_ebn0_search",
    "run_convergence",
    "run_sweep",
    "run_trial",
    "run_trials",
    "summarize",
    "trial_seed",
]

logger = logging.getLogger(__name__)

CSV_VERSION = 1
SWEEP_COLUMNS = ["ka", "ebn0_db", "trials", "pupe", "pupe_ci95", "false_alarm",
                 "mean_sic_rounds", "mean_ese_iters", "wall_time_s"]


def trial_seed(master: int, ka: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=master, spawn_key=(ka, index))


@lru_cache(maxsize=4)
def _codebook(n_chips: int, t_size: int, seed: int) -> SignatureCodebook:
    return generate(n_chips, t_size, seed)


def run_trial(cfg: SystemConfig, index: int, *, codebook: SignatureCodebook | None = None,
              code: ParityCheckMatrix | None = None, genie_detect: bool = False,
              genie_verify: bool = False) -> TrialResult:
    """Draw ``cfg.ka`` uniform messages, send them through the channel and decode."""
    start = time.perf_counter()
    codebook = codebook or _codebook(cfg.n_chips, cfg.t_size, cfg.seed)
    code = code or default_code()
    msg_seed, noise_seed = trial_seed(cfg.seed, cfg.ka, index).spawn(2)
    messages = np.random.default_rng(msg_seed).integers(0, 2, (cfg.ka, cfg.b_total), dtype=np.uint8)
    frames = encode_users(messages, cfg.b_header, code, cfg.power)
    out = transmit(frames, codebook, cfg.sigma2, noise_seed, cfg.n_symbols)

    truth = Truth(messages, cfg.b_header)
    rx = IterativeGaussianReceiver.from_config(cfg, genie_detect=genie_detect,
                                               genie_verify=genie_verify)
    rx.fit(codebook, code, cfg.power)
    decoded = rx.decode(out, truth)

    first = rx.diagnostics_[0] if rx.diagnostics_ else None
    ber = list(first.ber) if first is not None else []
    if ber:
        ber += [ber[-1]] * (cfg.max_ese_iters - len(ber))
    return TrialResult(
        sent=messages,
        recovered=decoded.messages(cfg.b_total),
        per_iteration_ber=ber,
        sic_rounds=sum(1 for d in rx.diagnostics_ if d.n_detected > 0),
        ese_iters=sum(d.iterations for d in rx.diagnostics_),
        wall_time=time.perf_counter() - start,
    )


def _trial_job(args):
    cfg, index, genie_detect, genie_verify = args
    with threadpool_limits(1):
        return run_trial(cfg, index, genie_detect=genie_detect, genie_verify=genie_verify)


def run_trials(cfg: SystemConfig, n_trials: int | None = None, *, workers: int = 1,
               genie_detect: bool = False, genie_verify: bool = False,
               first_index: int = 0) -> list[TrialResult]:
    """Run trials ``first_index .. first_index + n - 1`` in index order.

    BLAS is pinned to one thread per process so results are bit-identical
    for any ``workers``.
    """
    n_trials = cfg.trials if n_trials is None else n_trials
    jobs = [(cfg, first_index + i, genie_detect, genie_verify) for i in range(n_trials)]
    if workers <= 1:
        return [_trial_job(j) for j in jobs]
    chunk = max(1, len(jobs) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_trial_job, jobs, chunksize=chunk))


@dataclass
class PointSummary:
    ka: int
    ebn0_db: float
    trials: int
    pupe: float
    pupe_ci95: float
    false_alarm: float
    mean_sic_rounds: float
    mean_ese_iters: float
    wall_time_s: float

    def row(self) -> list[str]:
        return [str(self.ka), repr(float(self.ebn0_db)), str(self.trials), repr(self.pupe),
                repr(self.pupe_ci95), repr(self.false_alarm), repr(self.mean_sic_rounds),
                repr(self.mean_ese_iters), f"{self.wall_time_s:.3f}"]


def summarize(cfg: SystemConfig, results: Sequence[TrialResult]) -> PointSummary:
    return PointSummary(
        ka=cfg.ka,
        ebn0_db=cfg.ebn0_db,
        trials=len(results),
        pupe=pupe(results),
        pupe_ci95=pupe_ci95(results),
        false_alarm=false_alarm_rate(results),
        mean_sic_rounds=float(np.mean([r.sic_rounds for r in results])),
        mean_ese_iters=float(np.mean([r.ese_iters for r in results])),
        wall_time_s=float(sum(r.wall_time for r in results)),
    )


@dataclass
class SweepSpec:
    variable: str
    values: Sequence[float]
    trials_per_point: int
    output_path: str | Path | None = None

    def __post_init__(self):
        if self.variable not in ("ebn0_db", "ka"):
            raise ValueError("sweep variable must be 'ebn0_db' or 'ka'")
        if len(self.values) == 0:
            raise ValueError("sweep needs at least one value")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("sweep values must be strictly increasing")
        if self.trials_per_point < 1:
            raise ValueError("trials_per_point must be >= 1")


def _meta(kind: str, cfg: SystemConfig, **extra) -> str:
    fields = {"kind": kind, "version": CSV_VERSION, "seed": cfg.seed, "n_chips": cfg.n_chips,
              "n_symbols": cfg.n_symbols, "b_header": cfg.b_header, "b_payload": cfg.b_payload,
              "max_ese_iters": cfg.max_ese_iters, "bp_iters": cfg.bp_iters,
              "llr_scale": cfg.llr_scale,
              "amplitudes": "/".join(repr(a) for a in cfg.power.amplitudes)}
    fields.update(extra)
    return "# rsura " + " ".join(f"{k}={v}" for k, v in fields.items())


def _open_out(path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", newline="", encoding="utf-8")


def write_sweep_csv(path, cfg: SystemConfig, rows: Sequence[PointSummary], **meta) -> None:
    with _open_out(path) as fh:
        fh.write(_meta("sweep", cfg, **meta) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in rows:
            w.writerow(r.row())


def run_sweep(spec: SweepSpec, cfg: SystemConfig, *, workers: int = 1,
              genie_detect: bool = False) -> list[PointSummary]:
    """One aggregate row per sweep value; written to ``spec.output_path`` if set."""
    rows = []
    for value in spec.values:
        point = cfg.with_(**{spec.variable: int(value) if spec.variable == "ka" else float(value)})
        results = run_trials(point, spec.trials_per_point, workers=workers, genie_detect=genie_detect)
        rows.append(summarize(point, results))
        logger.info("ka=%d ebn0=%.3f pupe=%.4g", point.ka, point.ebn0_db, rows[-1].pupe)
    if spec.output_path is not None:
        write_sweep_csv(spec.output_path, cfg, rows, variable=spec.variable,
                        genie_detect=int(genie_detect))
    return rows


@dataclass
class ConvergenceResult:
    """Per-trial BER trajectories (trials x iterations) per Eb/N0."""

    ebn0_db: list[float]
    ber: list[np.ndarray]

    def mean(self, i: int) -> np.ndarray:
        return self.ber[i].mean(axis=0)

    def ci95(self, i: int) -> np.ndarray:
        b = self.ber[i]
        return 1.96 * b.std(axis=0, ddof=1) / math.sqrt(b.shape[0]) if b.shape[0] > 1 else np.zeros(b.shape[1])

    def write_csv(self, path, cfg: SystemConfig) -> None:
        with _open_out(path) as fh:
            fh.write(_meta("converge", cfg, ka=cfg.ka, genie_detect=1) + "\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["ebn0_db", "iteration", "trials", "ber", "ber_ci95"])
            for i, e in enumerate(self.ebn0_db):
                mean, ci = self.mean(i), self.ci95(i)
                for it in range(mean.size):
                    w.writerow([repr(float(e)), it + 1, self.ber[i].shape[0], repr(float(mean[it])),
                                repr(float(ci[it]))])


def run_convergence(cfg: SystemConfig, ebn0_list: Sequence[float], trials: int | None = None, *,
                    workers: int = 1, output_path=None) -> ConvergenceResult:
    """BER of the detected users' payload bits after each ESE iteration, genie detection on.

    A trial that stops early (all users verified) keeps its final BER for
    the remaining iterations.
    """
    out = ConvergenceResult([], [])
    for e in ebn0_list:
        point = cfg.with_(ebn0_db=float(e))
        results = run_trials(point, trials, workers=workers, genie_detect=True)
        out.ebn0_db.append(float(e))
        out.ber.append(np.array([r.per_iteration_ber for r in results]))
    if output_path is not None:
        out.write_csv(output_path, cfg)
    return out


def min_ebn0_search(cfg: SystemConfig, target_pupe: float, lo_db: float, hi_db: float,
                    trials_per_point: int | None = None, *, workers: int = 1,
                    resolution: float = 0.1, output_path=None,
                    cache: dict[float, PointSummary] | None = None):
    """Bisection for the smallest Eb/N0 whose empirical PUPE is at most ``target_pupe``.

    Returns ``(ebn0_db, summaries)`` with one summary per tested point.
    ``cache`` maps Eb/N0 to an already computed summary at the same trial
    count; it is filled in place, so a sweep and a search can share points.
    """
    summaries: dict[float, PointSummary] = {}
    cache = {} if cache is None else cache

    def pupe_at(ebn0):
        point = cfg.with_(ebn0_db=float(ebn0))
        hit = cache.get(ebn0)
        if hit is None:
            hit = cache[ebn0] = summarize(point, run_trials(point, trials_per_point, workers=workers))
        summaries[ebn0] = hit
        logger.info("search: %.4f dB -> PUPE %.4g", ebn0, summaries[ebn0].pupe)
        return summaries[ebn0].pupe

    best, _ = bisect_min_ebn0(pupe_at, target_pupe, lo_db, hi_db, resolution)
    rows = [summaries[k] for k in sorted(summaries)]
    if output_path is not None:
        write_sweep_csv(output_path, cfg, rows, target_pupe=target_pupe, min_ebn0_db=repr(best))
    return best, rows
