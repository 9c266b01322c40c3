"""Input validation helpers shared by the estimator and the CLI."""

from __future__ import annotations

import numpy as np

__all__ = ["check_channel_array", "check_user_weights"]


def check_channel_array(X) -> np.ndarray:
    """Coerce X to a finite complex (K, n_r, n_t) array."""
    X = np.asarray(X)
    if X.ndim == 2:
        X = X[None, :, :]
    if X.ndim != 3:
        raise ValueError(
            f"channels must be a (K, n_r, n_t) array (2-D accepted for one user),"
            f" got ndim={X.ndim}"
        )
    X = X.astype(complex, copy=False)
    if min(X.shape) < 1:
        raise ValueError(f"channel dimensions must be positive, got {X.shape}")
    if not np.all(np.isfinite(X.view(float))):
        raise ValueError("channel entries must be finite")
    return X


def check_user_weights(weights, K: int) -> np.ndarray:
    """Coerce to K non-negative finite weights; None means equal weights."""
    if weights is None:
        return np.ones(K)
    w = np.asarray(weights, dtype=float)
    if w.shape != (K,):
        raise ValueError(f"expected {K} weights, got shape {w.shape}")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and non-negative")
    return w
