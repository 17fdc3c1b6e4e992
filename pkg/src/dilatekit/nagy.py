"""Explicit Sz.-Nagy unitary dilations of a finite-dimensional contraction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix, dagger, matrix_sqrt_psd, norm2

CONTRACTION_TOL = 1e-10


class NotContractionError(ValueError):
    def __init__(self, norm: float):
        super().__init__(f"not a contraction: ||V||_2 = {norm!r} > 1")
        self.norm = norm


@dataclass(frozen=True)
class DilationMatrix:
    u: np.ndarray
    block_dim: int
    copies: int

    @property
    def max_exact_power(self) -> int:
        """Largest ``k`` for which ``compress(self, k) == V**k`` is guaranteed."""
        return self.copies - 1


def check_contraction(V) -> np.ndarray:
    V = as_matrix(V, square=True, name="V")
    nv = norm2(V)
    if nv > 1 + CONTRACTION_TOL:
        raise NotContractionError(nv)
    return V


def defect_operators(V: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(D_V, D_{V†}) = (sqrt(I - V†V), sqrt(I - VV†))``."""
    eye = np.eye(V.shape[0])
    # ||V|| = 1 + eps puts an eigenvalue of I - V†V near -2 eps
    tol = 3 * CONTRACTION_TOL
    return (matrix_sqrt_psd(eye - dagger(V) @ V, tol=tol),
            matrix_sqrt_psd(eye - V @ dagger(V), tol=tol))


def dilate_single(V) -> DilationMatrix:
    """The 2n x 2n unitary ``[[V, D_{V†}], [D_V, -V†]]``."""
    V = check_contraction(V)
    n = V.shape[0]
    d_v, d_vt = defect_operators(V)
    u = np.block([[V, d_vt], [d_v, -dagger(V)]])
    return DilationMatrix(u=u, block_dim=n, copies=2)


def dilate_chain(V, N: int) -> DilationMatrix:
    """(N+1)-block dilation whose powers compress to ``V**k`` for ``k <= N``.

    Block layout: row 0 is ``(V, 0, ..., 0, D_{V†})``, row 1 is
    ``(D_V, 0, ..., 0, -V†)`` and rows ``2..N`` carry shifted identities that
    walk the defect component down to the last block column.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    V = check_contraction(V)
    n = V.shape[0]
    d_v, d_vt = defect_operators(V)
    u = np.zeros(((N + 1) * n, (N + 1) * n), dtype=complex)

    def blk(i: int, j: int) -> tuple[slice, slice]:
        return slice(i * n, (i + 1) * n), slice(j * n, (j + 1) * n)

    u[blk(0, 0)] = V
    u[blk(1, 0)] = d_v
    u[blk(0, N)] = d_vt
    u[blk(1, N)] = -dagger(V)
    for i in range(2, N + 1):
        u[blk(i, i - 1)] = np.eye(n)
    return DilationMatrix(u=u, block_dim=n, copies=N + 1)


def compress(dil: DilationMatrix, k: int) -> np.ndarray:
    """Top-left ``block_dim`` block of ``u**k``, by repeated multiplication."""
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    n = dil.block_dim
    # only the first block column of u**k is needed
    col = np.zeros((dil.u.shape[0], n), dtype=complex)
    col[:n] = np.eye(n)
    for _ in range(k):
        col = dil.u @ col
    return col[:n].copy()


def compression_defects(dil: DilationMatrix, V, K: int) -> list[float]:
    """``||compress(dil, k) - V**k||_2`` for ``k = 0..K``."""
    V = as_matrix(V, square=True)
    out = []
    Vk = np.eye(V.shape[0], dtype=complex)
    for k in range(K + 1):
        out.append(norm2(compress(dil, k) - Vk))
        Vk = V @ Vk
    return out
