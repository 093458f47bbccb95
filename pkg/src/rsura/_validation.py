"""Input checks shared by the estimators and the functional API."""

from __future__ import annotations

import numpy as np
from sklearn.utils import check_array


def check_observations(y) -> np.ndarray:
    """Received matrix: finite 2-D float64."""
    return check_array(y, dtype=np.float64, ensure_2d=True, ensure_min_samples=1,
                       ensure_min_features=1, input_name="y")


def check_dictionary(a) -> np.ndarray:
    return check_array(a, dtype=np.float64, ensure_2d=True, input_name="X")


def check_llrs(llr, n_symbols: int | None = None) -> np.ndarray:
    llr = np.asarray(llr, dtype=np.float64)
    if n_symbols is not None and llr.shape[-1] != n_symbols:
        raise ValueError(f"expected {n_symbols} LLRs per row, got {llr.shape[-1]}")
    return llr


def check_sigma2(sigma2) -> float:
    sigma2 = float(sigma2)
    if not np.isfinite(sigma2) or sigma2 < 0:
        raise ValueError(f"noise variance must be finite and non-negative, got {sigma2}")
    return sigma2
