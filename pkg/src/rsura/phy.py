"""Transmitter chain and real Gaussian multiple-access channel."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .codebook import SignatureCodebook, header_to_column, headers_to_columns
from .config import PowerProfile, amplitude_for
from .ldpc import ParityCheckMatrix, encode

__all__ = [
    "ChannelOutput",
    "TransmitFrame",
    "UserMessage",
    "bpsk",
    "encode_user",
    "encode_users",
    "split_message",
    "transmit",
]


@dataclass(frozen=True, eq=False)
class UserMessage:
    bits: np.ndarray
    b_header: int

    @property
    def header(self) -> np.ndarray:
        return self.bits[: self.b_header]

    @property
    def payload(self) -> np.ndarray:
        return self.bits[self.b_header:]


@dataclass(frozen=True, eq=False)
class TransmitFrame:
    column: int
    amplitude: float
    symbols: np.ndarray


@dataclass(frozen=True, eq=False)
class ChannelOutput:
    """Received ``n_chips x n_symbols`` matrix; ``noise`` keeps the realised noise for diagnostics."""

    y: np.ndarray
    sigma2: float
    noise: np.ndarray | None = None


def split_message(bits, b_header: int) -> UserMessage:
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.ndim != 1 or not 0 < b_header < bits.size:
        raise ValueError(f"cannot split {bits.size} bits with a {b_header}-bit header")
    if np.any(bits > 1):
        raise ValueError("message must be binary")
    return UserMessage(bits, b_header)


def bpsk(bits) -> np.ndarray:
    """0 -> +1, 1 -> -1."""
    bits = np.asarray(bits)
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("bpsk expects binary input")
    return 1.0 - 2.0 * bits


def encode_user(msg: UserMessage, codebook: SignatureCodebook, code: ParityCheckMatrix,
                power: PowerProfile) -> TransmitFrame:
    if msg.payload.size != code.k:
        raise ValueError(f"payload has {msg.payload.size} bits, code expects {code.k}")
    if 2 ** msg.b_header != codebook.t_size:
        raise ValueError("header length does not match the codebook size")
    column = header_to_column(msg.header)
    return TransmitFrame(column, amplitude_for(power, column), bpsk(encode(msg.payload, code)))


def encode_users(messages: np.ndarray, b_header: int, code: ParityCheckMatrix,
                 power: PowerProfile) -> list[TransmitFrame]:
    """Batch version of :func:`encode_user` over the rows of a message matrix."""
    messages = np.asarray(messages, dtype=np.uint8)
    if messages.shape[0] == 0:
        return []
    columns = headers_to_columns(messages[:, :b_header])
    symbols = bpsk(encode(messages[:, b_header:], code))
    amps = power.column_amplitudes()[columns]
    return [TransmitFrame(int(c), float(a), s) for c, a, s in zip(columns, amps, symbols)]


def superpose(frames: Sequence[TransmitFrame], codebook: SignatureCodebook, n_symbols: int) -> np.ndarray:
    """Noiseless sum of ``p_i a_i x_i`` over all frames."""
    if not frames:
        return np.zeros((codebook.n_chips, n_symbols))
    cols = np.array([f.column for f in frames])
    amps = np.array([f.amplitude for f in frames])
    x = np.stack([f.symbols for f in frames])
    if x.shape[1] != n_symbols:
        raise ValueError(f"frames carry {x.shape[1]} symbols, expected {n_symbols}")
    return (codebook.columns[:, cols] * amps) @ x


def transmit(frames: Sequence[TransmitFrame], codebook: SignatureCodebook, sigma2: float,
             seed, n_symbols: int | None = None) -> ChannelOutput:
    """Superpose all users and add i.i.d. N(0, sigma2) noise drawn from ``seed``.

    The noise is drawn as ``sqrt(sigma2) * Z`` with ``Z`` standard normal, so
    the same seed gives the same noise shape at every Eb/N0.
    """
    if n_symbols is None:
        if not frames:
            raise ValueError("n_symbols is required when there are no frames")
        n_symbols = frames[0].symbols.size
    if sigma2 < 0:
        raise ValueError("noise variance must be non-negative")
    signal = superpose(frames, codebook, n_symbols)
    rng = np.random.default_rng(seed)
    noise = np.sqrt(sigma2) * rng.standard_normal(signal.shape)
    return ChannelOutput(signal + noise, float(sigma2), noise)
