"""Dense Hermitian matrix operations.

Everything here works on plain complex numpy arrays. Covariance and gradient
matrices drift off the Hermitian manifold under floating point updates, so
every operation that should produce a Hermitian result re-symmetrizes before
returning.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "hermitian_part",
    "is_hermitian",
    "eig_hermitian",
    "eigh_descending_stack",
    "logdet_hpd",
    "logdet_hpd_stack",
    "frobenius_distance",
    "psd_part",
    "nsd_part",
]


def hermitian_part(A: np.ndarray) -> np.ndarray:
    """Return (A + A^H)/2. Accepts a square matrix or a stack of them."""
    A = np.asarray(A)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise ValueError(f"expected square matrix, got shape {A.shape}")
    return 0.5 * (A + np.conj(np.swapaxes(A, -1, -2)))


def is_hermitian(A: np.ndarray, rtol: float = 1e-12) -> bool:
    """Check max |A - A^H| <= rtol * (1 + max |A|)."""
    A = np.asarray(A)
    if A.shape[-1] != A.shape[-2]:
        return False
    gap = np.max(np.abs(A - np.conj(np.swapaxes(A, -1, -2))))
    return bool(gap <= rtol * (1.0 + np.max(np.abs(A), initial=0.0)))


def eig_hermitian(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix, eigenvalues non-increasing.

    Parameters
    ----------
    A : np.ndarray
        Hermitian matrix (n x n).

    Returns
    -------
    (w, U) : (np.ndarray, np.ndarray)
        Real eigenvalues sorted non-increasing and the unitary matrix whose
        column k pairs with w[k], so that ``U @ diag(w) @ U^H == A``.

    Raises
    ------
    numpy.linalg.LinAlgError
        If the underlying iteration fails to converge.
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected one square matrix, got shape {A.shape}")
    w, U = np.linalg.eigh(A)
    # Stable sort keeps LAPACK's tie order deterministic.
    order = np.argsort(-w, kind="stable")
    return w[order], U[:, order]


def eigh_descending_stack(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched eig_hermitian over a stack of Hermitian matrices (..., n, n)."""
    w, U = np.linalg.eigh(A)
    order = np.argsort(-w, kind="stable", axis=-1)
    w = np.take_along_axis(w, order, axis=-1)
    U = np.take_along_axis(U, order[..., None, :], axis=-1)
    return w, U


def logdet_hpd(A: np.ndarray) -> float:
    """log det A (natural log) for a Hermitian positive-definite matrix.

    Computed from a Cholesky factorization; raises
    ``numpy.linalg.LinAlgError`` when a pivot fails, which signals an input
    that is not positive definite.
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected one square matrix, got shape {A.shape}")
    L = np.linalg.cholesky(A)
    return 2.0 * float(np.sum(np.log(np.real(np.diagonal(L)))))


def logdet_hpd_stack(A: np.ndarray) -> np.ndarray:
    """Batched ``logdet_hpd`` over a stack (..., n, n) -> (...,)."""
    L = np.linalg.cholesky(A)
    return 2.0 * np.sum(np.log(np.real(np.diagonal(L, axis1=-2, axis2=-1))), axis=-1)


def frobenius_distance(A: np.ndarray, B: np.ndarray) -> float:
    """Frobenius distance (Tr[(A-B)^H (A-B)])^(1/2) between equal-shape matrices."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape:
        raise ValueError(f"shape mismatch: {A.shape} vs {B.shape}")
    return float(np.linalg.norm(np.ravel(A - B)))


def _clamped_reconstruction(A: np.ndarray, clamp) -> np.ndarray:
    w, U = eig_hermitian(np.asarray(A))
    return hermitian_part((U * clamp(w)) @ np.conj(U.T))


def psd_part(A: np.ndarray) -> np.ndarray:
    """Projection of a Hermitian matrix onto the PSD cone: U max(L, 0) U^H."""
    return _clamped_reconstruction(A, lambda w: np.maximum(w, 0.0))


def nsd_part(A: np.ndarray) -> np.ndarray:
    """Projection of a Hermitian matrix onto the NSD cone: U min(L, 0) U^H."""
    return _clamped_reconstruction(A, lambda w: np.minimum(w, 0.0))
