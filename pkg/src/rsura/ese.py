"""Gaussian-approximation elementary signal estimator (ESE).

For each detected user ``i`` the received matrix is filtered with the MMSE
matrix ``F = (sigma2 I + A_d A_d^T)^-1`` and projected on the user's
signature, giving the scalar model

    y_ij = d_i x_ij + xi_ij,    d_i = p_i a_i^T F a_i,

where the residual ``xi_ij`` (other users plus noise) is treated as
Gaussian. Its mean and variance are refreshed from the decoder's soft
symbols every iteration; all updates read the previous iteration's snapshot
(Jacobi schedule).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .ldpc import LLR_CLIP

__all__ = ["EseState", "MmseFilter", "build_filter", "project"]

_LLR_PREFACTOR = {"paper": 4.0, "half": 2.0}


@dataclass(frozen=True, eq=False)
class MmseFilter:
    """MMSE filter for one detected set.

    ``signatures`` holds the unit-norm columns ``a_i``; ``a_d`` the scaled
    columns ``p_i a_i``; ``f_a`` the products ``F a_i``.
    """

    f: np.ndarray
    signatures: np.ndarray
    amplitudes: np.ndarray
    sigma2: float
    f_a: np.ndarray

    @property
    def a_d(self) -> np.ndarray:
        return self.signatures * self.amplitudes

    @property
    def n_users(self) -> int:
        return self.signatures.shape[1]

    def gains(self) -> np.ndarray:
        """``g_il = a_i^T F a_l``."""
        return self.signatures.T @ self.f_a

    def noise_terms(self) -> np.ndarray:
        """``c_i = sigma2 a_i^T F F^T a_i``."""
        return self.sigma2 * np.einsum("ij,ij->j", self.f_a, self.f_a)


def build_filter(signatures, amplitudes, sigma2: float) -> MmseFilter:
    """Factorise ``sigma2 I + A_d A_d^T`` (Cholesky) and form ``F`` and ``F a_i``."""
    a = np.asarray(signatures, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    p = np.broadcast_to(np.asarray(amplitudes, dtype=np.float64), (a.shape[1],)).copy()
    if not sigma2 > 0:
        raise ValueError("the MMSE filter needs a strictly positive noise variance")
    a_d = a * p
    s = sigma2 * np.eye(a.shape[0]) + a_d @ a_d.T
    factor = cho_factor(s, lower=True)
    f = cho_solve(factor, np.eye(a.shape[0]))
    f = 0.5 * (f + f.T)
    f_a = cho_solve(factor, a)
    return MmseFilter(f, a, p, float(sigma2), f_a)


def project(y, filt: MmseFilter) -> np.ndarray:
    """Row ``i`` is ``a_i^T F Y``."""
    return filt.f_a.T @ np.asarray(getattr(y, "y", y))


class EseState:
    """Per-user statistics of the ESE <-> decoder iteration.

    All per-symbol arrays have shape ``(n_users, n_symbols)``. Users flagged
    in ``frozen`` are treated as known: their symbol means are fixed and
    their rows are not updated.
    """

    def __init__(self, filt: MmseFilter, projected: np.ndarray, llr_scale: str = "paper"):
        if llr_scale not in _LLR_PREFACTOR:
            raise ValueError(f"llr_scale must be one of {sorted(_LLR_PREFACTOR)}")
        self.filter = filt
        self.projected = np.asarray(projected, dtype=np.float64)
        k, n = self.projected.shape
        if k != filt.n_users:
            raise ValueError("projection rows must match the detected users")
        self.prefactor = _LLR_PREFACTOR[llr_scale]
        self.gains = filt.gains()
        self.self_gain = filt.amplitudes * np.diag(self.gains)
        self.noise_term = filt.noise_terms()
        # cross[i, l] = p_l g_il for l != i
        self.cross = self.gains * filt.amplitudes[None, :]
        np.fill_diagonal(self.cross, 0.0)
        self.cross_sq = self.cross**2
        self.frozen = np.zeros(k, dtype=bool)
        self.xi_mean = np.zeros((k, n))
        self.xi_var = np.empty((k, n))
        self.x_mean = np.zeros((k, n))
        self.x_var = np.ones((k, n))
        self.llr_ese = np.zeros((k, n))
        self.llr_dec = np.zeros((k, n))
        self.init_moments()

    @classmethod
    def from_observation(cls, y, filt: MmseFilter, llr_scale: str = "paper") -> "EseState":
        return cls(filt, project(y, filt), llr_scale)

    @property
    def n_users(self) -> int:
        return self.projected.shape[0]

    def init_moments(self) -> None:
        """Zero interference mean; variance from unit-variance, zero-mean interferers."""
        self.x_mean[~self.frozen] = 0.0
        self.x_var[~self.frozen] = 1.0
        self.xi_mean[:] = 0.0
        self.xi_var[:] = (self.cross_sq.sum(axis=1) + self.noise_term)[:, None]

    def ese_llr(self) -> np.ndarray:
        """Extrinsic LLRs of the unfrozen users, clipped to +-30."""
        live = ~self.frozen
        num = self.prefactor * self.self_gain[live, None] * (self.projected[live] - self.xi_mean[live])
        self.llr_ese[live] = np.clip(num / self.xi_var[live], -LLR_CLIP, LLR_CLIP)
        return self.llr_ese

    def set_decoder_output(self, rows, posterior: np.ndarray) -> None:
        """Store decoder extrinsics: posterior minus the ESE LLR that was fed in."""
        self.llr_dec[rows] = posterior - self.llr_ese[rows]

    def symbol_moments(self) -> None:
        live = ~self.frozen
        self.x_mean[live] = np.tanh(0.5 * np.clip(self.llr_dec[live], -LLR_CLIP, LLR_CLIP))
        self.x_var[live] = 1.0 - self.x_mean[live] ** 2

    def interference_moments(self) -> None:
        self.xi_mean = self.cross @ self.x_mean
        self.xi_var = self.cross_sq @ self.x_var + self.noise_term[:, None]

    def freeze(self, row: int, symbols: np.ndarray) -> None:
        """Mark a user as known with the given +-1 symbols."""
        self.frozen[row] = True
        self.x_mean[row] = symbols
        self.x_var[row] = 0.0
