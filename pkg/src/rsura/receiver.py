"""Iterative Gaussian-approximation receiver with successive interference cancellation.

One SIC round detects active signatures on the residual, runs the
ESE <-> decoder loop on the detected users, keeps the messages that pass
verification and subtracts their reconstructed signals. Rounds repeat until
the decoded list stops growing.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_observations, check_sigma2
from .codebook import SignatureCodebook, column_to_header
from .config import PowerProfile, SystemConfig
from .detect import somp
from .ese import EseState, build_filter, project
from .ldpc import ParityCheckMatrix, decode_siso, default_code, encode
from .phy import TransmitFrame, bpsk, superpose

__all__ = [
    "DecodedEntry",
    "DecodedList",
    "IterativeGaussianReceiver",
    "SicState",
    "sic_subtract",
    "write_diagnostics_csv",
]

logger = logging.getLogger(__name__)

# Floor on the noise variance used to build the MMSE filter (noiseless runs).
SIGMA2_FLOOR = 1e-10


@dataclass(frozen=True, eq=False)
class DecodedEntry:
    bits: np.ndarray
    column: int
    sic_round: int
    frame: TransmitFrame
    verified: bool = True

    @property
    def key(self) -> bytes:
        return np.packbits(self.bits).tobytes() + self.bits.size.to_bytes(4, "little")


@dataclass
class DecodedList:
    """Recovered messages, distinct by their bits, in decoding order."""

    entries: list[DecodedEntry] = field(default_factory=list)

    def __post_init__(self):
        self._keys = {e.key for e in self.entries}

    def add(self, entry: DecodedEntry) -> bool:
        if entry.key in self._keys:
            return False
        self._keys.add(entry.key)
        self.entries.append(entry)
        return True

    def __contains__(self, bits) -> bool:
        bits = np.asarray(bits, dtype=np.uint8)
        return np.packbits(bits).tobytes() + bits.size.to_bytes(4, "little") in self._keys

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def messages(self, b_total: int | None = None) -> np.ndarray:
        if not self.entries:
            return np.zeros((0, b_total or 0), dtype=np.uint8)
        return np.stack([e.bits for e in self.entries])


@dataclass
class SicState:
    residual: np.ndarray
    round: int = 0
    verified_frames: list[TransmitFrame] = field(default_factory=list)


def sic_subtract(state: SicState, verified: Sequence[TransmitFrame], codebook: SignatureCodebook) -> SicState:
    """Remove ``sum p_l a_l x_l`` of the verified frames and advance the round."""
    residual = state.residual
    if verified:
        residual = residual - superpose(verified, codebook, residual.shape[1])
    return SicState(residual, state.round + 1, state.verified_frames + list(verified))


@dataclass
class EseDiagnostics:
    """Per-iteration trace of one SIC round."""

    n_detected: int = 0
    iterations: int = 0
    verified: list[int] = field(default_factory=list)
    mean_abs_llr: list[float] = field(default_factory=list)
    ber: list[float] = field(default_factory=list)


@dataclass(frozen=True, eq=False)
class Truth:
    """Ground truth of a trial, used for genie modes and BER tracking."""

    messages: np.ndarray
    b_header: int

    @property
    def columns(self) -> np.ndarray:
        h = self.messages[:, : self.b_header].astype(np.int64)
        return h @ (1 << np.arange(self.b_header - 1, -1, -1, dtype=np.int64))


class IterativeGaussianReceiver(BaseEstimator):
    """Unsourced random-access receiver for the random-spreading GMAC.

    ``fit`` binds the shared codebook, channel code and power profile;
    ``predict`` decodes a received matrix into a :class:`DecodedList`.

    Parameters
    ----------
    ka : int
        Number of active users assumed known at the receiver.
    sigma2 : float
        Noise variance per received entry.
    max_ese_iters : int
        Cap on ESE <-> decoder iterations per SIC round.
    max_sic_rounds : int
    bp_iters : int
        Belief-propagation iterations per decoder call.
    llr_scale : {"paper", "half"}
        ``paper`` uses the prefactor 4 in the ESE LLR, ``half`` uses 2.
    detection_mode : {"fixed", "threshold"}
    detection_budget : int, optional
        Detections per round; defaults to ``ka`` minus messages already decoded.
    detection_threshold : float
    genie_detect, genie_verify : bool
        Replace activity detection / message verification with the ground
        truth passed to :meth:`decode`.
    """

    def __init__(self, ka=25, sigma2=1.0, max_ese_iters=20, max_sic_rounds=8, bp_iters=20,
                 llr_scale="paper", detection_mode="fixed", detection_budget=None,
                 detection_threshold=0.05, genie_detect=False, genie_verify=False):
        self.ka = ka
        self.sigma2 = sigma2
        self.max_ese_iters = max_ese_iters
        self.max_sic_rounds = max_sic_rounds
        self.bp_iters = bp_iters
        self.llr_scale = llr_scale
        self.detection_mode = detection_mode
        self.detection_budget = detection_budget
        self.detection_threshold = detection_threshold
        self.genie_detect = genie_detect
        self.genie_verify = genie_verify

    @classmethod
    def from_config(cls, cfg: SystemConfig, **kwargs) -> "IterativeGaussianReceiver":
        params = dict(
            ka=cfg.ka, sigma2=cfg.sigma2, max_ese_iters=cfg.max_ese_iters,
            max_sic_rounds=cfg.max_sic_rounds, bp_iters=cfg.bp_iters, llr_scale=cfg.llr_scale,
            detection_mode=cfg.detection.mode, detection_budget=cfg.detection.budget,
            detection_threshold=cfg.detection.threshold,
        )
        params.update(kwargs)
        return cls(**params)

    def fit(self, codebook: SignatureCodebook, code: ParityCheckMatrix | None = None,
            power: PowerProfile | None = None):
        if not isinstance(codebook, SignatureCodebook):
            codebook = SignatureCodebook(codebook)
        code = default_code() if code is None else code
        if not code.is_systematic:
            raise ValueError("the receiver needs a systematic code for re-encoding")
        power = PowerProfile((1.0,), codebook.t_size) if power is None else power
        if power.t_size != codebook.t_size:
            raise ValueError("power profile and codebook disagree on the number of columns")
        check_sigma2(self.sigma2)
        self.codebook_ = codebook
        self.code_ = code
        self.power_ = power
        self.column_amplitudes_ = power.column_amplitudes()
        self.b_header_ = codebook.b_header
        return self

    def predict(self, y) -> DecodedList:
        return self.decode(y)

    def decode(self, y, truth: Truth | None = None) -> DecodedList:
        """Run all SIC rounds; per-round traces land in ``diagnostics_``."""
        check_is_fitted(self, "codebook_")
        if (self.genie_detect or self.genie_verify) and truth is None:
            raise ValueError("genie modes need the ground truth")
        resid = check_observations(getattr(y, "y", y))
        if resid.shape != (self.codebook_.n_chips, self.code_.cols):
            raise ValueError(
                f"received matrix must be {self.codebook_.n_chips}x{self.code_.cols}, got {resid.shape}"
            )
        state = SicState(resid.copy())
        decoded = DecodedList()
        self.diagnostics_: list[EseDiagnostics] = []
        while state.round < self.max_sic_rounds:
            new, diag = self.decode_round(state, decoded, truth)
            self.diagnostics_.append(diag)
            if not new:
                break
            for entry in new:
                decoded.add(entry)
            state = sic_subtract(state, [e.frame for e in new], self.codebook_)
        self.sic_state_ = state
        return decoded

    def _active_columns(self, state: SicState, decoded: DecodedList, truth: Truth | None) -> np.ndarray:
        if self.genie_detect:
            pending = [c for bits, c in zip(truth.messages, truth.columns) if bits not in decoded]
            return np.unique(np.asarray(pending, dtype=int))
        budget = self.detection_budget if self.detection_budget is not None else self.ka - len(decoded)
        if budget <= 0:
            return np.zeros(0, dtype=int)
        found = somp(state.residual, self.codebook_, budget, self.detection_mode,
                     self.detection_threshold)
        return found.columns

    def decode_round(self, state: SicState, decoded: DecodedList, truth: Truth | None = None):
        """One pass of detection and the ESE <-> decoder iteration.

        Returns the newly verified entries and an :class:`EseDiagnostics`.
        """
        diag = EseDiagnostics()
        cols = self._active_columns(state, decoded, truth)
        diag.n_detected = int(cols.size)
        if cols.size == 0:
            return [], diag

        code, k = self.code_, self.code_.k
        amps = self.column_amplitudes_[cols]
        filt = build_filter(self.codebook_.columns[:, cols], amps, max(self.sigma2, SIGMA2_FLOOR))
        ese = EseState(filt, project(state.residual, filt), self.llr_scale)

        ref = self._reference_payloads(cols, truth)
        hard_payload = np.zeros((cols.size, k), dtype=np.uint8)
        new: list[DecodedEntry] = []
        for _ in range(self.max_ese_iters):
            live = np.flatnonzero(~ese.frozen)
            llr = ese.ese_llr()[live]
            posterior, syn_ok = decode_siso(llr, code, self.bp_iters)
            hard = (posterior < 0).astype(np.uint8)
            hard_payload[live] = hard[:, :k]
            ese.set_decoder_output(live, posterior)
            for r in self._verify(live, hard, syn_ok, cols, truth):
                row = live[r]
                symbols = bpsk(encode(hard[r, :k], code))
                bits = np.concatenate([column_to_header(cols[row], self.b_header_), hard[r, :k]])
                frame = TransmitFrame(int(cols[row]), float(amps[row]), symbols)
                entry = DecodedEntry(bits, int(cols[row]), state.round, frame)
                if bits not in decoded and all(e.key != entry.key for e in new):
                    new.append(entry)
                ese.freeze(row, symbols)
            ese.symbol_moments()
            ese.interference_moments()

            diag.iterations += 1
            diag.verified.append(int(ese.frozen.sum()))
            diag.mean_abs_llr.append(float(np.mean(np.abs(llr))) if llr.size else float("nan"))
            if ref is not None:
                diag.ber.append(float(np.mean(hard_payload != ref)))
            if ese.frozen.all():
                break
        return new, diag

    def _verify(self, live, hard, syn_ok, cols, truth) -> Iterable[int]:
        """Rows (into ``live``) whose decision is accepted as a message."""
        if self.genie_verify:
            sent = {(int(c), m[self.b_header_:].tobytes())
                    for m, c in zip(truth.messages, truth.columns)}
            k = self.code_.k
            return [r for r in range(live.size)
                    if (int(cols[live[r]]), hard[r, :k].tobytes()) in sent]
        ok = np.flatnonzero(syn_ok)
        if ok.size == 0:
            return []
        reenc = encode(hard[ok, : self.code_.k], self.code_)
        consistent = (reenc == hard[ok]).all(axis=1)
        return ok[consistent].tolist()

    def _reference_payloads(self, cols, truth: Truth | None):
        if truth is None:
            return None
        by_col = {}
        for m, c in zip(truth.messages, truth.columns):
            by_col.setdefault(int(c), m[self.b_header_:])
        k = self.code_.k
        ref = np.zeros((cols.size, k), dtype=np.uint8)
        known = np.zeros(cols.size, dtype=bool)
        for i, c in enumerate(cols):
            if int(c) in by_col:
                ref[i] = by_col[int(c)]
                known[i] = True
        # A falsely detected column has no sender: every bit of it counts as an error.
        return np.where(known[:, None], ref, 2)


def write_diagnostics_csv(diagnostics: Sequence[EseDiagnostics], path) -> None:
    """One row per (SIC round, ESE iteration)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["sic_round", "iteration", "n_detected", "verified", "mean_abs_llr", "ber"])
        for q, d in enumerate(diagnostics):
            for it in range(d.iterations):
                ber = d.ber[it] if it < len(d.ber) else ""
                w.writerow([q, it + 1, d.n_detected, d.verified[it], repr(d.mean_abs_llr[it]),
                            repr(ber) if ber != "" else ""])
