"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy.ndarray`` objects of complex dtype. Elements of
su(n) are skew-Hermitian traceless matrices; Hamiltonians are Hermitian.
All lengths on su(n) are measured with the Ad-invariant inner product

    <X, Y> = -2n Re Tr(X Y)

which is the Killing form of su(n).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

STRUCTURE_TOL = 1e-12
TRACE_WARN_TOL = 1e-8
DEFAULT_RANK_TOL = 1e-10


class MatrixError(ValueError):
    """Raised when a matrix violates a structural precondition."""


@dataclass(frozen=True)
class EigenSystem:
    """Eigen-decomposition ``H = V diag(eigenvalues) V^dagger``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_matrix(a) -> np.ndarray:
    m = np.array(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise MatrixError(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise MatrixError("matrix has non-finite entries")
    return m


def _scale(m: np.ndarray) -> float:
    return max(1.0, float(np.linalg.norm(m)))


def is_hermitian(h: np.ndarray, tol: float = STRUCTURE_TOL) -> bool:
    return float(np.linalg.norm(h - h.conj().T)) <= tol * _scale(h)


def is_skew_hermitian(a: np.ndarray, tol: float = STRUCTURE_TOL) -> bool:
    return float(np.linalg.norm(a + a.conj().T)) <= tol * _scale(a)


def require_hermitian(h, tol: float = STRUCTURE_TOL) -> np.ndarray:
    h = as_matrix(h)
    if not is_hermitian(h, tol):
        raise MatrixError("matrix is not Hermitian")
    return h


def require_skew_hermitian(a, tol: float = STRUCTURE_TOL) -> np.ndarray:
    a = as_matrix(a)
    if not is_skew_hermitian(a, tol):
        raise MatrixError("matrix is not skew-Hermitian")
    return a


def remove_trace(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Subtract ``(Tr m / n) * 1``, warning if the removed part is not negligible."""
    n = m.shape[0]
    tr = np.trace(m) / n
    if abs(tr) <= 1e-15 * _scale(m):
        # traceless up to rounding; leave the bits alone so reloads are stable
        return m
    if abs(tr) * np.sqrt(n) > TRACE_WARN_TOL * _scale(m):
        log.warning("%s is not traceless (Tr/n = %.3g); projecting out the identity part", name, abs(tr))
    return m - tr * np.eye(n)


def killing_inner(x: np.ndarray, y: np.ndarray, n: int | None = None) -> float:
    """Killing-form inner product ``-2n Re Tr(XY)`` of two elements of su(n)."""
    if x.shape != y.shape or x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise MatrixError(f"dimension mismatch: {x.shape} vs {y.shape}")
    if n is None:
        n = x.shape[0]
    elif n != x.shape[0]:
        raise MatrixError(f"dimension mismatch: n={n} but matrices are {x.shape}")
    # Tr(XY) = sum_ij X_ij Y_ji
    return float(-2.0 * n * np.real(np.sum(x * y.T)))


def killing_norm(x: np.ndarray) -> float:
    return float(np.sqrt(max(killing_inner(x, x), 0.0)))


def eig_hermitian(h) -> EigenSystem:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix."""
    h = require_hermitian(h)
    # symmetrize so that the eigensolver sees an exactly Hermitian input
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    return EigenSystem(w, v)


def expm_skew(a) -> np.ndarray:
    """Exponential of a skew-Hermitian matrix, computed spectrally.

    With ``A = iH`` and ``H = V diag(lam) V^dagger`` this returns
    ``V diag(exp(i lam)) V^dagger``, which is unitary up to eigensolver error.
    """
    a = require_skew_hermitian(a)
    es = eig_hermitian(-1j * a)
    v = es.eigenvectors
    return (v * np.exp(1j * es.eigenvalues)) @ v.conj().T


def expm_hermitian_batch(h: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i h_k t)`` for a stack of Hermitian matrices ``h`` of shape (N, n, n)."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * t * w)[:, None, :]) @ np.swapaxes(v.conj(), -1, -2)


def to_real_vector(x: np.ndarray) -> np.ndarray:
    """Real coordinates in which the Killing form is the Euclidean dot product.

    For skew-Hermitian X, ``-Tr(XY) = Re Tr(X^dagger Y)``, so stacking real and
    imaginary parts and scaling by ``sqrt(2n)`` gives an isometry onto R^(2n^2).
    """
    n = x.shape[-1]
    flat = x.reshape(*x.shape[:-2], n * n)
    return np.sqrt(2.0 * n) * np.concatenate([flat.real, flat.imag], axis=-1)


def from_real_vector(v: np.ndarray, n: int) -> np.ndarray:
    half = n * n
    flat = (v[..., :half] + 1j * v[..., half:]) / np.sqrt(2.0 * n)
    return flat.reshape(*v.shape[:-1], n, n)


def orthonormalize(vecs, n: int, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Killing-orthonormal basis for the real span of skew-Hermitian matrices.

    Modified Gram-Schmidt with one re-orthogonalization pass. A vector is
    dropped when its residual norm after projection is at most ``tol`` times
    its original norm. Returns an array of shape (d, n, n).
    """
    mats = [require_skew_hermitian(v, tol=1e-8) for v in vecs]
    basis: list[np.ndarray] = []
    for m in mats:
        if m.shape != (n, n):
            raise MatrixError(f"expected {n}x{n} matrices, got {m.shape}")
        r = to_real_vector(m)
        norm0 = float(np.linalg.norm(r))
        if norm0 == 0.0:
            continue
        for _ in range(2):
            for b in basis:
                r = r - np.dot(b, r) * b
        norm = float(np.linalg.norm(r))
        if norm <= tol * norm0:
            continue
        basis.append(r / norm)
    if not basis:
        return np.zeros((0, n, n), dtype=complex)
    return from_real_vector(np.array(basis), n)


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def unitarity_defect(u: np.ndarray) -> float:
    n = u.shape[-1]
    return float(np.linalg.norm(u.conj().T @ u - np.eye(n)))
