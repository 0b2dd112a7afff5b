"""Dense complex linear algebra used throughout the package.

Everything here works on plain ``numpy`` arrays in complex128. Eigen-pairs
are always returned in descending eigenvalue order.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITIAN_TOL = 1e-10
PINV_REL_TOL = 1e-12


class ContractError(ValueError):
    """Raised when an input violates a documented precondition."""


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues (descending) with unit-norm eigenvectors as columns."""

    values: np.ndarray
    vectors: np.ndarray

    def __len__(self) -> int:
        return self.values.shape[0]

    def top(self, q: int) -> "EigenSystem":
        return EigenSystem(self.values[:q], self.vectors[:, :q])

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T


def as_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] == 0 or m.shape[1] == 0:
        raise ContractError(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ContractError("matrix has non-finite entries")
    return m


def hermitian_defect(m: np.ndarray) -> float:
    """Largest entrywise ``|m - m^H|`` relative to ``max(1, max|m|)``."""
    scale = max(1.0, float(np.max(np.abs(m))))
    return float(np.max(np.abs(m - m.conj().T))) / scale


def _check_hermitian(m: np.ndarray) -> np.ndarray:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ContractError(f"expected a square matrix, got shape {m.shape}")
    defect = hermitian_defect(m)
    if defect > HERMITIAN_TOL:
        raise ContractError(f"matrix is not Hermitian (defect {defect:.3e})")
    return 0.5 * (m + m.conj().T)


def eigh(m) -> EigenSystem:
    """Hermitian eigendecomposition with descending eigenvalues.

    Ties keep LAPACK's order (reversed along with everything else); only
    projectors ``u u^H`` are used downstream so the basis choice inside a
    degenerate eigenspace does not matter.
    """
    m = _check_hermitian(m)
    values, vectors = np.linalg.eigh(m)
    return EigenSystem(values[::-1].copy(), vectors[:, ::-1].copy())


def herm_sqrt(m, neg_tol: float = 1e-10) -> np.ndarray:
    """Hermitian PSD square root ``S`` with ``S @ S == m``."""
    es = eigh(m)
    scale = max(1.0, float(abs(es.values[0])))
    if es.values[-1] < -neg_tol * scale:
        raise ContractError(
            f"matrix is indefinite (min eigenvalue {es.values[-1]:.3e})")
    root = np.sqrt(np.clip(es.values, 0.0, None))
    s = (es.vectors * root) @ es.vectors.conj().T
    return 0.5 * (s + s.conj().T)


def solve_or_pinv(m, b, rel_tol: float = PINV_REL_TOL) -> np.ndarray:
    """Apply ``m^{-1}`` to ``b``, falling back to the pseudo-inverse.

    ``m`` is treated as singular when its smallest eigenvalue magnitude is at
    or below ``rel_tol`` times the largest; eigen-directions under that
    threshold are then dropped.
    """
    m = _check_hermitian(m)
    b = np.asarray(b, dtype=np.complex128)
    if b.shape[0] != m.shape[0]:
        raise ContractError(
            f"dimension mismatch: matrix {m.shape}, right-hand side {b.shape}")
    es = eigh(m)
    mags = np.abs(es.values)
    cutoff = rel_tol * mags.max() if mags.max() > 0 else np.inf
    if mags.min() > cutoff:
        return np.linalg.solve(m, b)
    keep = mags > cutoff
    u = es.vectors[:, keep]
    coeffs = u.conj().T @ b
    if b.ndim == 1:
        return u @ (coeffs / es.values[keep])
    return u @ (coeffs / es.values[keep][:, None])
