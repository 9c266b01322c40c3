"""Exact projection of covariance blocks onto the sum-power PSD set.

The feasible set is Omega_+(P) = {Q_i >= 0, sum_i Tr(Q_i) <= P}. Stacking the
blocks on the diagonal of one matrix D, the Euclidean projection is
D~ = U (Lambda - mu* I)_+ U^H: shift every eigenvalue down by a water level
mu* >= 0 and clamp at zero. The water level maximizes the one-dimensional
concave dual

    psi(mu) = -1/2 sum_j max(0, lambda_j - mu)^2 - mu P + 1/2 ||D||_F^2,

which is piecewise quadratic between consecutive sorted eigenvalues, so an
index sweep over at most K*n_r + 1 pieces finds the maximizer exactly. The
block structure of D means only per-block eigendecompositions are ever taken.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import eigh_descending_stack, hermitian_part

__all__ = [
    "ProjectionOutcome",
    "block_eigenvalues",
    "dual_psi",
    "water_level_search",
    "project_sum_power",
]

# Closed-interval slack for piece membership; exact-boundary water levels must
# not be dropped by floating-point jitter.
_INTERVAL_TOL = 1e-12


@dataclass(frozen=True)
class ProjectionOutcome:
    projected: np.ndarray   # (K, n_r, n_r) PSD blocks
    water_level: float
    active_index: int       # sweep index at termination, <= K * n_r
    dual_value: float
    trace_after: float


def block_eigenvalues(blocks: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Merged spectrum of a block-diagonal matrix plus per-block factors.

    Returns ``(merged, w, U)`` where ``merged`` is the full spectrum sorted
    non-increasing (stable, block index breaking ties), and ``w``/``U`` are the
    per-block eigenvalues (non-increasing) and eigenvector matrices used for
    reconstruction.
    """
    blocks = np.asarray(blocks, dtype=complex)
    if blocks.ndim != 3 or blocks.shape[-1] != blocks.shape[-2]:
        raise ValueError(f"expected a stack of square blocks, got shape {blocks.shape}")
    w, U = eigh_descending_stack(blocks)
    flat = w.ravel()
    merged = flat[np.argsort(-flat, kind="stable")]
    return merged, w, U


def dual_psi(mu: float, eigenvalues: np.ndarray, P: float, norm_D_sq: float) -> float:
    """Dual objective psi(mu) of the projection problem."""
    if mu < 0:
        raise ValueError(f"water level must be non-negative, got {mu}")
    lam = np.asarray(eigenvalues, dtype=float)
    clipped = np.maximum(lam - mu, 0.0)
    return float(-0.5 * np.dot(clipped, clipped) - mu * P + 0.5 * norm_D_sq)


def _check_sorted_desc(lam: np.ndarray) -> None:
    if np.any(np.diff(lam) > 1e-12):
        raise ValueError("eigenvalues must be sorted non-increasing")


def water_level_search(eigenvalues: np.ndarray, P: float) -> tuple[float, int]:
    """Maximize psi(mu) over mu >= 0 by sweeping the pieces of its domain.

    ``eigenvalues`` is the merged spectrum sorted non-increasing. On piece
    I >= 1 (mu between the I-th and (I+1)-th eigenvalue) the unconstrained
    stationary point is (sum of top-I eigenvalues - P) / I; it is accepted
    when it falls inside the piece intersected with the non-negative axis.
    Otherwise the piece maximum sits at an endpoint and the sweep either stops
    (value dropped) or advances. At most len(eigenvalues) + 1 steps.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.size == 0:
        raise ValueError("empty spectrum")
    if not P > 0:
        raise ValueError(f"power budget must be positive, got {P}")
    _check_sorted_desc(lam)
    N = lam.size
    norm_sq = float(np.dot(lam, lam))
    prefix = np.concatenate([[0.0], np.cumsum(lam)])

    phi_star = None
    mu_star = 0.0
    for I in range(N + 1):
        if I >= 1:
            cand = (prefix[I] - P) / I
            hi = lam[I - 1]
            lo = lam[I] if I < N else -np.inf
            lo = max(lo, 0.0)  # the R+ intersection of the piece
            if hi >= -_INTERVAL_TOL and lo - _INTERVAL_TOL <= cand <= hi + _INTERVAL_TOL:
                mu = float(np.clip(cand, lo, max(hi, lo)))
                return mu, I
        # Endpoint step: the first pass (I = 0) always advances, seeding the
        # running best from psi at the largest eigenvalue.
        endpoint = max(lam[I], 0.0) if I < N else 0.0
        psi_end = dual_psi(endpoint, lam, P, norm_sq)
        if phi_star is not None and psi_end < phi_star:
            return mu_star, I
        mu_star, phi_star = endpoint, psi_end
    return mu_star, N


def project_sum_power(Q_in: np.ndarray, P: float) -> ProjectionOutcome:
    """Project Hermitian blocks onto Omega_+(P), minimizing the Frobenius distance.

    Inputs are post-gradient-step iterates: Hermitian but not necessarily PSD
    or within the trace budget. Members of Omega_+(P) come back unchanged (to
    eigendecomposition accuracy).
    """
    if not P > 0:
        raise ValueError(f"power budget must be positive, got {P}")
    blocks = np.asarray(Q_in, dtype=complex)
    merged, w, U = block_eigenvalues(blocks)
    mu, active = water_level_search(merged, P)
    clamped = np.maximum(w - mu, 0.0)
    projected = hermitian_part((U * clamped[:, None, :]) @ np.conj(np.swapaxes(U, -1, -2)))
    return ProjectionOutcome(
        projected=projected,
        water_level=mu,
        active_index=active,
        dual_value=dual_psi(mu, merged, P, float(np.dot(merged, merged))),
        trace_after=float(clamped.sum()),
    )
