"""Linear maps on B(H_d): transfer-matrix representation, Choi matrix,
Kraus form, amplification id_k (x) Phi, Hilbert-Schmidt dual and norm.

The canonical internal form is the d^2 x d^2 transfer matrix acting on
column-vectorized operators; Choi and Kraus are conversions. The Choi
matrix uses the unnormalized convention C = sum_ij E_ij (x) Phi(E_ij),
so the Choi of a trace-preserving map has trace d.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .linalg import dagger, hs_norm, unvec, vec

STRUCT_TOL = 1e-10


@dataclass(frozen=True)
class BlockOperator:
    """Element of M_k(B(H_d)) stored as a kd x kd matrix."""

    k: int
    d: int
    data: np.ndarray

    def __post_init__(self):
        linalg.check_dimensions(self.data, self.k, self.d)


class QuantumMap:
    """A linear map Phi: B(H_d) -> B(H_d) stored as a transfer matrix.

    Structural flags (unital, trace-preserving, hermiticity-preserving)
    are computed once at construction and cached; they are never taken
    on trust from the caller.
    """

    def __init__(self, transfer: np.ndarray, label: str = ""):
        transfer = np.asarray(transfer, dtype=complex)
        n = transfer.shape[0]
        d = int(round(np.sqrt(n)))
        if transfer.shape != (n, n) or d * d != n:
            raise ValueError(f"transfer matrix shape {transfer.shape} is not (d^2, d^2)")
        if not np.all(np.isfinite(transfer)):
            raise ValueError("transfer matrix contains non-finite entries")
        self.transfer = transfer
        self.d = d
        self.label = label
        I = np.eye(d)
        self.unital = hs_norm(self(I) - I) <= STRUCT_TOL
        # Tr Phi(X) = <vec(I), T vec(X)>; trace-preserving iff T* vec(I) = vec(I)
        self.trace_preserving = (
            np.linalg.norm(dagger(transfer) @ vec(I) - vec(I)) <= STRUCT_TOL
        )
        C = self.choi()
        self.hermiticity_preserving = hs_norm(C - dagger(C)) <= STRUCT_TOL * max(
            hs_norm(C), 1.0
        )

    # -- evaluation ----------------------------------------------------

    def __call__(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X)
        if X.shape != (self.d, self.d):
            raise ValueError(f"operand shape {X.shape} does not match d={self.d}")
        return unvec(self.transfer @ vec(X), self.d)

    def apply_amplified(self, X: np.ndarray, k: int) -> np.ndarray:
        """(id_k (x) Phi)(X) for a kd x kd matrix X, applied block-wise."""
        d = self.d
        if k == 1:
            return self(X)
        linalg.check_dimensions(X, k, d)
        # columns of V are vec's of the d x d blocks X_ij
        V = np.asarray(X).reshape(k, d, k, d).transpose(3, 1, 0, 2).reshape(d * d, k * k)
        W = self.transfer @ V
        return W.reshape(d, d, k, k).transpose(2, 1, 3, 0).reshape(k * d, k * d)

    def amplify(self, k: int) -> "AmplifiedMap":
        return AmplifiedMap(self, k)

    # -- representations ----------------------------------------------

    def choi(self) -> np.ndarray:
        """Unnormalized Choi matrix sum_ij E_ij (x) Phi(E_ij)."""
        d = self.d
        T4 = self.transfer.reshape(d, d, d, d)  # [q, p, j, i] of T[qd+p, jd+i]
        return T4.transpose(3, 1, 2, 0).reshape(d * d, d * d)

    @classmethod
    def from_choi(cls, C: np.ndarray, label: str = "") -> "QuantumMap":
        C = np.asarray(C, dtype=complex)
        n = C.shape[0]
        d = int(round(np.sqrt(n)))
        if C.shape != (n, n) or d * d != n:
            raise ValueError(f"Choi matrix shape {C.shape} is not (d^2, d^2)")
        C4 = C.reshape(d, d, d, d)  # [(i, p), (j, q)]
        T = C4.transpose(3, 1, 2, 0).reshape(d * d, d * d)
        return cls(T, label=label)

    @classmethod
    def from_kraus(cls, kraus: list[np.ndarray], label: str = "") -> "QuantumMap":
        """Phi(X) = sum_i K_i X K_i*."""
        T = sum(np.kron(K.conj(), K) for K in kraus)
        return cls(T, label=label)

    def kraus(self, tol: float = 1e-10) -> list[np.ndarray]:
        """Kraus operators from the Choi eigendecomposition.

        Requires the map to be CP within tolerance (Choi PSD).
        """
        d = self.d
        C = linalg.hermitianize(self.choi())
        w, U = np.linalg.eigh(C)
        if w[0] < -tol * max(w[-1], 1.0):
            raise ValueError(
                f"map is not completely positive: Choi eigenvalue {w[0]:.3e}"
            )
        ops = []
        for lam, v in zip(w, U.T):
            if lam > tol:
                # v[(i, p)] = K[p, i] / sqrt(lam)
                ops.append(np.sqrt(lam) * v.reshape(d, d).T)
        return ops

    @classmethod
    def identity(cls, d: int, label: str = "identity") -> "QuantumMap":
        return cls(np.eye(d * d), label=label)

    # -- algebra -------------------------------------------------------

    def dual(self) -> "QuantumMap":
        """Hilbert-Schmidt dual: (Phi*(A), B)_HS = (A, Phi(B))_HS."""
        return QuantumMap(dagger(self.transfer), label=f"dual({self.label})")

    def hs_norm(self) -> float:
        """Operator norm of Phi w.r.t. the HS norm (largest singular value
        of the transfer matrix); Phi is an HS contraction iff <= 1."""
        return float(np.linalg.norm(self.transfer, 2))

    def compose(self, other: "QuantumMap") -> "QuantumMap":
        """Map X -> self(other(X))."""
        if self.d != other.d:
            raise ValueError("cannot compose maps of different dimension")
        return QuantumMap(
            self.transfer @ other.transfer, label=f"{self.label}∘{other.label}"
        )

    def __matmul__(self, other: "QuantumMap") -> "QuantumMap":
        return self.compose(other)

    def scale(self, c: float, label: str = "") -> "QuantumMap":
        return QuantumMap(c * self.transfer, label=label or f"{c}·{self.label}")


class AmplifiedMap:
    """id_k (x) Phi acting on M_k(B(H_d))."""

    def __init__(self, base: QuantumMap, k: int):
        if k < 1:
            raise ValueError("k must be >= 1")
        self.base = base
        self.k = k
        self.d = base.d
        self._transfer: np.ndarray | None = None

    def __call__(self, X: np.ndarray | BlockOperator) -> np.ndarray:
        if isinstance(X, BlockOperator):
            X = X.data
        return self.base.apply_amplified(X, self.k)

    def dual(self) -> "AmplifiedMap":
        return AmplifiedMap(self.base.dual(), self.k)

    def transfer_matrix(self) -> np.ndarray:
        """(kd)^2 x (kd)^2 transfer matrix of id_k (x) Phi on column-vectorized
        kd x kd operators (built once and cached)."""
        if self._transfer is None:
            n = self.k * self.d
            T = np.empty((n * n, n * n), dtype=complex)
            E = np.zeros((n, n), dtype=complex)
            for c in range(n):
                for r in range(n):
                    E[r, c] = 1.0
                    T[:, c * n + r] = self(E).flatten(order="F")
                    E[r, c] = 0.0
            self._transfer = T
        return self._transfer


def mix(maps_and_weights: list[tuple[float, QuantumMap]], label: str = "") -> QuantumMap:
    """Affine combination sum_i w_i Phi_i."""
    T = sum(w * Phi.transfer for w, Phi in maps_and_weights)
    return QuantumMap(T, label=label)
