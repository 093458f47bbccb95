"""Active-signature detection with simultaneous orthogonal matching pursuit.

The received matrix follows the multiple-measurement-vector model
``Y = A diag(gamma) X + N``: all ``n_symbols`` columns of ``Y`` share the
same row support of ``X``, so columns of ``A`` are scored jointly across
every measurement vector.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_dictionary, check_observations
from .config import DetectionPolicy

__all__ = ["SOMP", "ActiveSet", "somp"]

logger = logging.getLogger(__name__)

_RANK_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class ActiveSet:
    """Detected codebook columns in selection order."""

    columns: np.ndarray
    scores: np.ndarray
    residual_energy: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __len__(self):
        return int(self.columns.size)

    def __iter__(self):
        return iter(int(c) for c in self.columns)


def somp(y, dictionary, budget: int, mode: str = "fixed", threshold: float = 0.05,
         exclude=None) -> ActiveSet:
    """Greedy joint-sparse support recovery.

    Each step picks the unselected column ``i`` maximising ``||a_i^T R||_2``
    (lowest index on ties), then removes from the residual ``R`` its
    component along the new orthonormalised direction, so ``R`` always
    equals ``Y`` projected onto the orthogonal complement of the selected
    columns' span.

    Parameters
    ----------
    y : ndarray or ChannelOutput, shape (n_chips, n_symbols)
    dictionary : ndarray or SignatureCodebook, shape (n_chips, T)
    budget : int
        Maximum number of columns to select.
    mode : {"fixed", "threshold"}
        ``fixed`` stops at ``budget``; ``threshold`` additionally stops once
        residual energy over initial energy drops to ``threshold``.
    exclude : iterable of int, optional
        Columns that may not be selected.

    Columns that are numerically in the span of the current selection are
    skipped with a warning and do not use up budget.
    """
    y = check_observations(getattr(y, "y", y))
    a = check_dictionary(getattr(dictionary, "columns", dictionary))
    if a.shape[0] != y.shape[0]:
        raise ValueError(f"dictionary has {a.shape[0]} rows, observations have {y.shape[0]}")
    if mode not in ("fixed", "threshold"):
        raise ValueError(f"unknown mode {mode!r}")
    if budget < 0:
        raise ValueError("budget must be non-negative")

    n_rows, t_size = a.shape
    energy0 = float(np.sum(y * y))
    blocked = np.zeros(t_size, dtype=bool)
    if exclude is not None:
        blocked[np.asarray(list(exclude), dtype=int)] = True
    budget = min(budget, n_rows, t_size - int(blocked.sum()))

    chosen: list[int] = []
    scores: list[float] = []
    energies = [energy0]
    if energy0 == 0.0 or budget <= 0:
        return ActiveSet(np.array(chosen, dtype=int), np.array(scores), np.array(energies))

    # With Q the orthonormal basis of the selection, R = Y - Q Q^T Y, so a new
    # direction q (orthogonal to Q) has q^T R = q^T Y, and the column scores
    # ||a_i^T R||^2 can be downdated without ever forming R or A^T R.
    aty = a.T @ y
    score = np.einsum("ij,ij->i", aty, aty)
    basis = np.zeros((n_rows, budget))
    atq = np.zeros((t_size, budget))
    qty = np.zeros((budget, y.shape[1]))
    col_norms = np.linalg.norm(a, axis=0)
    energy = energy0
    while len(chosen) < budget:
        s = np.where(blocked, -np.inf, score)
        i = int(np.argmax(s))
        if s[i] == -np.inf:
            break
        blocked[i] = True
        k = len(chosen)
        q = a[:, i] - basis[:, :k] @ (basis[:, :k].T @ a[:, i])
        nq = np.linalg.norm(q)
        if nq <= _RANK_TOL * max(col_norms[i], 1.0):
            logger.warning("column %d is linearly dependent on the selection; dropped", i)
            continue
        q /= nq
        z = q @ y
        u = a.T @ q
        # (A^T R) z for the residual before this step
        w = aty @ z - atq[:, :k] @ (qty[:k] @ z)
        score -= 2.0 * u * w - u * u * (z @ z)
        basis[:, k] = q
        atq[:, k] = u
        qty[k] = z
        energy = max(energy - float(z @ z), 0.0)
        chosen.append(i)
        scores.append(float(np.sqrt(max(s[i], 0.0))))
        energies.append(energy)
        if mode == "threshold" and energy <= threshold * energy0:
            break
    return ActiveSet(np.array(chosen, dtype=int), np.array(scores), np.array(energies))


def somp_with_policy(y, dictionary, policy: DetectionPolicy, budget: int, exclude=None) -> ActiveSet:
    return somp(y, dictionary, budget, policy.mode, policy.threshold, exclude)


class SOMP(RegressorMixin, BaseEstimator):
    """Simultaneous OMP as a multi-target linear regressor.

    Follows the scikit-learn ``OrthogonalMatchingPursuit`` layout: ``X`` is
    the dictionary (n_samples x n_features) and ``y`` holds one measurement
    vector per column (n_samples x n_targets). All targets share one support.

    Parameters
    ----------
    n_nonzero_coefs : int, optional
        Support size; defaults to ``n_samples``.
    mode : {"fixed", "threshold"}
    threshold : float
        Relative residual energy at which ``threshold`` mode stops.

    Attributes
    ----------
    support_ : ndarray of int
        Selected columns in selection order.
    coef_ : ndarray, shape (n_targets, n_features)
        Least-squares coefficients on the support, zero elsewhere.
    residual_energy_ : ndarray
        Residual energy before the first and after every selection.
    """

    def __init__(self, n_nonzero_coefs=None, mode="fixed", threshold=0.05):
        self.n_nonzero_coefs = n_nonzero_coefs
        self.mode = mode
        self.threshold = threshold

    def fit(self, X, y):
        X = check_dictionary(X)
        y = check_observations(y)
        budget = X.shape[0] if self.n_nonzero_coefs is None else int(self.n_nonzero_coefs)
        found = somp(y, X, budget, self.mode, self.threshold)
        self.support_ = found.columns
        self.scores_ = found.scores
        self.residual_energy_ = found.residual_energy
        self.coef_ = np.zeros((y.shape[1], X.shape[1]))
        if found.columns.size:
            sol, *_ = np.linalg.lstsq(X[:, found.columns], y, rcond=None)
            self.coef_[:, found.columns] = sol.T
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_dictionary(X)
        return X @ self.coef_.T
