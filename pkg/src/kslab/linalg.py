"""Dense complex linear algebra substrate: vectorization, partial traces,
Hermitian spectral decompositions and tolerance-aware PSD tests.

Conventions used throughout the package:

* vectorization is column-stacking: ``vec(X)`` lists column 1 first;
* block operators on C^k (x) C^d use the global index ``(block row)*d + row``,
  i.e. the k-factor sits on the left of every Kronecker product.
"""

from __future__ import annotations

import numpy as np

HERMITICITY_RTOL = 1e-10
PSD_TOL = 1e-9


class HermiticityError(ValueError):
    """Input expected to be Hermitian is not, beyond tolerance."""


def vec(X: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization of a matrix."""
    return np.asarray(X).flatten(order="F")


def unvec(x: np.ndarray, rows: int, cols: int | None = None) -> np.ndarray:
    """Inverse of :func:`vec`."""
    if cols is None:
        cols = rows
    return np.asarray(x).reshape(rows, cols, order="F")


def dagger(A: np.ndarray) -> np.ndarray:
    """Conjugate transpose A*."""
    return np.asarray(A).conj().T


def hermitianize(A: np.ndarray) -> np.ndarray:
    """Hermitian part (A + A*)/2."""
    return (A + dagger(A)) / 2


def hs_inner(A: np.ndarray, B: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product Tr(A* B)."""
    return complex(np.vdot(A, B))


def hs_norm(A: np.ndarray) -> float:
    """Hilbert-Schmidt (Frobenius) norm."""
    return float(np.linalg.norm(A))


def check_dimensions(X: np.ndarray, k: int, d: int) -> None:
    X = np.asarray(X)
    if X.shape != (k * d, k * d):
        raise ValueError(
            f"matrix of shape {X.shape} does not match block structure k={k}, d={d}"
        )


def partial_trace_second(X: np.ndarray, k: int, d: int) -> np.ndarray:
    """Trace out the d-dimensional (right) factor of a kd x kd matrix.

    Entry (i, j) of the result is the trace of the d x d block X_{ij};
    for X = M (x) Y this gives M * Tr(Y).
    """
    check_dimensions(X, k, d)
    return np.trace(np.asarray(X).reshape(k, d, k, d), axis1=1, axis2=3)


def blocks(X: np.ndarray, k: int, d: int) -> np.ndarray:
    """View a kd x kd matrix as a (k, k, d, d) array of blocks."""
    check_dimensions(X, k, d)
    return np.asarray(X).reshape(k, d, k, d).transpose(0, 2, 1, 3)


def from_blocks(B: np.ndarray) -> np.ndarray:
    """Inverse of :func:`blocks`."""
    k, k2, d, d2 = B.shape
    assert k == k2 and d == d2
    return B.transpose(0, 2, 1, 3).reshape(k * d, k * d)


def _require_hermitian(A: np.ndarray, rtol: float = HERMITICITY_RTOL) -> np.ndarray:
    A = np.asarray(A)
    scale = hs_norm(A)
    defect = hs_norm(A - dagger(A))
    if defect > rtol * max(scale, 1.0):
        raise HermiticityError(
            f"matrix is not Hermitian: ||A - A*||_HS = {defect:.3e} "
            f"exceeds {rtol:.1e} * max(||A||_HS, 1) = {rtol * max(scale, 1.0):.3e}"
        )
    return hermitianize(A)


def spectral_decomposition(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a (nearly) Hermitian matrix.

    Returns (eigenvalues ascending, unitary of column eigenvectors) of the
    Hermitianized input.
    """
    H = _require_hermitian(A)
    w, U = np.linalg.eigh(H)
    return w, U


def min_eigenvalue(A: np.ndarray) -> float:
    """Smallest eigenvalue of the Hermitianized input.

    Rejects inputs that are not Hermitian within tolerance.
    """
    H = _require_hermitian(A)
    return float(np.linalg.eigvalsh(H)[0])


def is_psd(A: np.ndarray, tol: float = PSD_TOL) -> bool:
    """True iff min_eigenvalue(A) >= -tol."""
    return min_eigenvalue(A) >= -tol


def ginibre(rng: np.random.Generator, rows: int, cols: int | None = None) -> np.ndarray:
    """Complex Ginibre matrix (iid standard complex Gaussian entries)."""
    if cols is None:
        cols = rows
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_hermitian(rng: np.random.Generator, n: int) -> np.ndarray:
    return hermitianize(ginibre(rng, n))


def haar_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-distributed unitary via QR of a Ginibre matrix."""
    Q, R = np.linalg.qr(ginibre(rng, n))
    return Q * (np.diagonal(R) / np.abs(np.diagonal(R)))


def haar_isometry(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """Random isometry V (rows x cols, rows >= cols) with V* V = I."""
    Q, R = np.linalg.qr(ginibre(rng, rows, cols))
    return Q * (np.diagonal(R) / np.abs(np.diagonal(R)))
