"""Dense complex linear-algebra kernel.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Column vectors
are handled as 1-D arrays internally; the JSON matrix format in
:mod:`dilatekit.io` converts them to ``(n, 1)`` on output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

SPARSITY_ZERO = 1e-14
PSD_TOL = 1e-10
NORMAL_TOL = 1e-10


class NotPSDError(ValueError):
    """Raised when a matrix that must be positive semidefinite is not."""

    def __init__(self, eigenvalue: float):
        super().__init__(f"matrix is not PSD: smallest eigenvalue {eigenvalue!r}")
        self.eigenvalue = eigenvalue


def as_matrix(M, *, square: bool = False, name: str = "matrix") -> np.ndarray:
    A = np.asarray(M, dtype=complex)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {A.shape}")
    if square and A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return A


def as_vector(v, *, name: str = "vector") -> np.ndarray:
    x = np.asarray(v, dtype=complex)
    if x.ndim == 2 and x.shape[1] == 1:
        x = x[:, 0]
    if x.ndim != 1:
        raise ValueError(f"{name} must be a column vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} has non-finite entries")
    return x


def dagger(M: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(M, -1, -2))


def norm2(M) -> float:
    """Spectral norm (largest singular value); 2-norm for vectors."""
    M = np.asarray(M)
    if M.ndim == 1:
        return float(np.linalg.norm(M))
    return float(np.linalg.norm(M, 2))


def is_hermitian(M: np.ndarray, tol: float = 1e-12) -> bool:
    return bool(np.max(np.abs(M - dagger(M)), initial=0.0) <= tol * max(1.0, np.max(np.abs(M), initial=0.0)))


def is_unitary(U: np.ndarray, tol: float = 1e-10) -> bool:
    return unitarity_error(U) <= tol


def unitarity_error(U: np.ndarray) -> float:
    U = np.asarray(U)
    return norm2(dagger(U) @ U - np.eye(U.shape[0]))


def _is_normal(M: np.ndarray) -> bool:
    comm = M @ dagger(M) - dagger(M) @ M
    scale = max(1.0, float(np.max(np.abs(M), initial=0.0)) ** 2)
    return float(np.linalg.norm(comm)) <= NORMAL_TOL * scale


def matrix_exp(M) -> np.ndarray:
    """Return ``e^M``.

    Hermitian and skew-Hermitian inputs go through ``eigh`` so the result of
    ``exp(-iHt)`` is unitary to machine precision. Other normal matrices use
    the complex Schur form (diagonal for normal ``M``); everything else falls
    back to scaling-and-squaring Padé (``scipy.linalg.expm``).

    Raises:
        ValueError: non-square or non-finite input.
        OverflowError: the exponential does not fit in double precision.
    """
    M = as_matrix(M, square=True)
    with np.errstate(over="ignore", invalid="ignore"):
        if is_hermitian(M):
            w, Q = np.linalg.eigh((M + dagger(M)) / 2)
            E = (Q * np.exp(w)) @ dagger(Q)
        elif is_hermitian(1j * M):
            K = (1j * M + dagger(1j * M)) / 2  # M = -iK
            w, Q = np.linalg.eigh(K)
            E = (Q * np.exp(-1j * w)) @ dagger(Q)
        elif _is_normal(M):
            T, Z = la.schur(M, output="complex")
            E = (Z * np.exp(np.diag(T))) @ dagger(Z)
        else:
            E = la.expm(M)
    if not np.all(np.isfinite(E)):
        raise OverflowError(f"matrix exponential overflows (||M||_2 = {norm2(M):.6g})")
    return E


def unitary_evolution(H, t: float) -> np.ndarray:
    """``exp(-i H t)`` for a Hermitian ``H`` or a stack of them (``(..., n, n)``)."""
    H = np.asarray(H, dtype=complex)
    w, Q = np.linalg.eigh(H)
    return (Q * np.exp(-1j * t * w)[..., None, :]) @ dagger(Q)


def matrix_sqrt_psd(M, tol: float = PSD_TOL) -> np.ndarray:
    """Hermitian PSD square root; eigenvalues in ``[-tol, 0)`` are clamped to zero."""
    M = as_matrix(M, square=True)
    w, Q = np.linalg.eigh((M + dagger(M)) / 2)
    if w.size and w[0] < -tol:
        raise NotPSDError(float(w[0]))
    w = np.clip(w, 0.0, None)
    S = (Q * np.sqrt(w)) @ dagger(Q)
    return (S + dagger(S)) / 2


@dataclass(frozen=True)
class SpectralProfile:
    lambda0: float
    norm2: float
    norm_max: float
    sparsity: int
    tau: float


@dataclass(frozen=True)
class HermitianSplit:
    """``A = h1 + i h2`` with both parts Hermitian."""

    h1: np.ndarray
    h2: np.ndarray
    profile: SpectralProfile

    @property
    def dim(self) -> int:
        return self.h1.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return self.h1 + 1j * self.h2

    @property
    def h1_min_eig(self) -> float:
        return float(np.linalg.eigvalsh(self.h1)[0])


def sparsity(A) -> int:
    """Most nonzeros in any row or column (the two agree for Hermitian input)."""
    nz = np.abs(np.asarray(A)) > SPARSITY_ZERO
    return int(max(np.max(nz.sum(axis=1), initial=0), np.max(nz.sum(axis=0), initial=0)))


def spectral_profile(A, T: float = 0.0) -> SpectralProfile:
    A = as_matrix(A, square=True)
    # LinAlgError from a non-converged eigensolver propagates as is
    eig = np.linalg.eigvals(A)
    s = sparsity(A)
    nmax = float(np.max(np.abs(A)))
    return SpectralProfile(
        lambda0=float(np.min(eig.real)),
        norm2=norm2(A),
        norm_max=nmax,
        sparsity=s,
        tau=s * nmax * float(T),
    )


def hermitian_split(A, T: float = 0.0) -> HermitianSplit:
    A = as_matrix(A, square=True, name="A")
    if T < 0:
        raise ValueError(f"T must be nonnegative, got {T}")
    h1 = (A + dagger(A)) / 2
    h2 = (A - dagger(A)) / 2j
    return HermitianSplit(h1=h1, h2=h2, profile=spectral_profile(A, T))


def split_from_parts(h1, h2, T: float = 0.0) -> HermitianSplit:
    """Build a split directly from two Hermitian matrices."""
    h1 = as_matrix(h1, square=True, name="h1")
    h2 = as_matrix(h2, square=True, name="h2")
    if h1.shape != h2.shape:
        raise ValueError(f"h1 and h2 shapes differ: {h1.shape} vs {h2.shape}")
    if not (is_hermitian(h1) and is_hermitian(h2)):
        raise ValueError("h1 and h2 must be Hermitian")
    return HermitianSplit(h1=h1, h2=h2, profile=spectral_profile(h1 + 1j * h2, T))
