"""Block-encodings as executable contracts.

Convention: the ancilla register is the leading tensor factor, so the encoded
block is ``u[:n, :n]`` (ancilla index 0). Quantum-native constructions are
replaced by exact dense stand-ins; their query costs live in
:mod:`dilatekit.complexity`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    HermitianSplit,
    as_matrix,
    is_hermitian,
    matrix_exp,
    norm2,
    sparsity,
    unitarity_error,
)
from .nagy import dilate_single

UNITARY_TOL = 1e-10
# largest unitary dimension we are willing to materialise from factors
MAX_DENSE_DIM = 4096


@dataclass(frozen=True, eq=False)
class BlockEncoding:
    """An ``(alpha, ancillas, declared_error)``-block-encoding.

    Either holds the unitary ``u`` directly or, for products, the two factor
    encodings. In the latter case the encoded block is composed eagerly and
    ``u`` is only assembled on request.
    """

    alpha: float
    ancillas: int
    declared_error: float
    system_dim: int
    _u: np.ndarray | None = field(default=None, repr=False)
    _factors: tuple[BlockEncoding, BlockEncoding] | None = field(default=None, repr=False)
    _block: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def from_unitary(
        cls,
        u,
        alpha: float,
        ancillas: int,
        declared_error: float = 0.0,
        system_dim: int | None = None,
    ) -> BlockEncoding:
        u = as_matrix(u, square=True, name="u")
        if alpha <= 0:
            raise ValueError(f"alpha must be positive, got {alpha}")
        if ancillas < 0 or declared_error < 0:
            raise ValueError("ancillas and declared_error must be nonnegative")
        if system_dim is None:
            system_dim, rem = divmod(u.shape[0], 2**ancillas)
            if rem:
                raise ValueError(f"dimension {u.shape[0]} is not divisible by 2**{ancillas}")
        if u.shape[0] != system_dim * 2**ancillas:
            raise ValueError(f"u has dimension {u.shape[0]}, expected {system_dim} * 2**{ancillas}")
        err = unitarity_error(u)
        if err > UNITARY_TOL:
            raise ValueError(f"u is not unitary: ||u^dag u - I||_2 = {err:.3g}")
        return cls(alpha=float(alpha), ancillas=int(ancillas), declared_error=float(declared_error),
                   system_dim=int(system_dim), _u=u)

    @property
    def dim(self) -> int:
        return self.system_dim * 2**self.ancillas

    @property
    def factors(self) -> tuple[BlockEncoding, BlockEncoding] | None:
        return self._factors

    def block(self) -> np.ndarray:
        """Top-left ``system_dim`` block of ``u`` (no ``alpha`` scaling)."""
        if self._block is not None:
            return self._block
        n = self.system_dim
        return self._u[:n, :n]

    @property
    def u(self) -> np.ndarray:
        if self._u is not None:
            return self._u
        if self.dim > MAX_DENSE_DIM:
            raise MemoryError(f"refusing to materialise a {self.dim}-dimensional unitary")
        left, right = self._factors
        return _lift_left(left.u, right.ancillas) @ _lift_right(right.u, left.ancillas, self.system_dim)


def _lift_left(uA: np.ndarray, b: int) -> np.ndarray:
    """``I_b (x) uA`` on registers (anc_B, anc_A, system)."""
    return np.kron(np.eye(2**b), uA)


def _lift_right(uB: np.ndarray, a: int, n: int) -> np.ndarray:
    """``uB`` acting on (anc_B, system) with identity on the middle anc_A register."""
    dB = uB.shape[0] // n
    dA = 2**a
    t = uB.reshape(dB, n, dB, n)
    full = np.einsum("isjr,ab->iasjbr", t, np.eye(dA))
    return full.reshape(dB * dA * n, dB * dA * n)


def extract(be: BlockEncoding) -> np.ndarray:
    """``alpha * (<0| (x) I) u (|0> (x) I)``."""
    return be.alpha * be.block()


def verify(be: BlockEncoding, A) -> float:
    """``||A - extract(be)||_2``; the contract holds if this is ``<= declared_error + 1e-10``."""
    A = as_matrix(A, square=True, name="A")
    if A.shape[0] != be.system_dim:
        raise ValueError(f"target has dimension {A.shape[0]}, encoding has {be.system_dim}")
    return norm2(A - extract(be))


def satisfies(be: BlockEncoding, A, slack: float = 1e-10) -> bool:
    return verify(be, A) <= be.declared_error + slack


def identity_encoding(n: int, ancillas: int = 0, alpha: float = 1.0) -> BlockEncoding:
    return BlockEncoding.from_unitary(np.eye(n * 2**ancillas), alpha, ancillas, 0.0, n)


def encode_nagy(V) -> BlockEncoding:
    """One-ancilla encoding of a contraction via its Nagy dilation."""
    dil = dilate_single(V)
    return BlockEncoding.from_unitary(dil.u, 1.0, 1, 0.0, dil.block_dim)


def _state_prep(amplitudes: np.ndarray) -> np.ndarray:
    """Real orthogonal matrix whose first column is ``amplitudes`` (unit norm)."""
    M = len(amplitudes)
    e0 = np.zeros(M)
    e0[0] = 1.0
    v = e0 - amplitudes
    nv = float(v @ v)
    if nv < 1e-30:
        return np.eye(M)
    return np.eye(M) - 2.0 * np.outer(v, v) / nv


def lcu_combine(coeffs, bes) -> BlockEncoding:
    """Encode ``sum_j y_j A_j`` from encodings of the ``A_j``.

    The coefficient register is padded to a power of two with zero weights.
    The output has ``alpha = alpha_in * sum(y)`` and declared error
    ``sum(y) * max(delta_j)``, the bound that holds for the absolute error
    of each input encoding.
    """
    y = np.asarray(coeffs, dtype=float)
    bes = list(bes)
    if y.ndim != 1 or len(y) != len(bes) or not bes:
        raise ValueError("need one nonnegative coefficient per encoding")
    if np.any(y < 0):
        raise ValueError("LCU coefficients must be nonnegative")
    total = float(y.sum())
    if total <= 0:
        raise ValueError("LCU coefficients sum to zero")
    first = bes[0]
    for be in bes[1:]:
        if be.ancillas != first.ancillas or be.system_dim != first.system_dim:
            raise ValueError("all encodings must share ancilla count and system dimension")
        if not np.isclose(be.alpha, first.alpha, rtol=1e-12, atol=0):
            raise ValueError("all encodings must share alpha")
    M = 1
    while M < len(bes):
        M *= 2
    pad = M - len(bes)
    y = np.concatenate([y, np.zeros(pad)])
    units = [be.u for be in bes] + [np.eye(first.dim)] * pad
    d = first.dim
    W = np.zeros((M * d, M * d), dtype=complex)
    for j, uj in enumerate(units):
        W[j * d:(j + 1) * d, j * d:(j + 1) * d] = uj
    B = np.kron(_state_prep(np.sqrt(y / total)), np.eye(d))
    u = B.T @ W @ B
    return BlockEncoding.from_unitary(
        u,
        alpha=first.alpha * total,
        ancillas=first.ancillas + int(np.log2(M)),
        declared_error=total * max(be.declared_error for be in bes),
        system_dim=first.system_dim,
    )


def product(beA: BlockEncoding, beB: BlockEncoding) -> BlockEncoding:
    """Encoding of ``A @ B``: ``(I_b (x) uA)(I_a (x) uB)`` with error ``alpha*eps + beta*delta``."""
    if beA.system_dim != beB.system_dim:
        raise ValueError(f"system dimensions differ: {beA.system_dim} vs {beB.system_dim}")
    return BlockEncoding(
        alpha=beA.alpha * beB.alpha,
        ancillas=beA.ancillas + beB.ancillas,
        declared_error=beA.alpha * beB.declared_error + beB.alpha * beA.declared_error,
        system_dim=beA.system_dim,
        _factors=(beA, beB),
        _block=beA.block() @ beB.block(),
    )


def encode_exp_iht(H, t: float) -> BlockEncoding:
    """``exp(iHt)`` is already unitary: a ``(1, 0, 0)`` encoding."""
    H = as_matrix(H, square=True, name="H")
    if not is_hermitian(H):
        raise ValueError("H must be Hermitian")
    return BlockEncoding.from_unitary(matrix_exp(1j * t * H), 1.0, 0, 0.0, H.shape[0])


def encode_exp_minus_ht(H, t: float) -> BlockEncoding:
    """Exact ``(1, 1, 0)`` encoding of ``exp(-Ht)`` for Hermitian ``H >= 0``.

    A zero eigenvalue is admitted: ``exp(-Ht)`` is still a contraction, which
    is all the Nagy construction needs.
    """
    H = as_matrix(H, square=True, name="H")
    if not is_hermitian(H):
        raise ValueError("H must be Hermitian")
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    lam = float(np.linalg.eigvalsh(H)[0])
    if lam < -1e-12:
        raise ValueError(f"H must be positive semidefinite, smallest eigenvalue {lam!r}")
    return encode_nagy(matrix_exp(-t * H))


def trotter_pipeline(split: HermitianSplit, T: float, K: int) -> BlockEncoding:
    """``(exp(-H1 T/K) exp(-i H2 T/K))**K`` as a K-fold product encoding."""
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    if split.profile.lambda0 <= 0:
        raise ValueError(f"lambda0(A) must be positive, got {split.profile.lambda0!r}")
    dt = T / K
    segment = product(encode_exp_minus_ht(split.h1, dt), encode_exp_iht(split.h2, -dt))
    out = segment
    for _ in range(K - 1):
        out = product(out, segment)
    return out


def trotter_error(split: HermitianSplit, T: float, K: int) -> float:
    """True error of the Trotter pipeline against ``exp(-(H1 + i H2) T)``."""
    return verify(trotter_pipeline(split, T, K), matrix_exp(-split.matrix * T))


def sparse_access_normalise(H) -> tuple[np.ndarray, float]:
    """``H / (s ||H||_max)`` and the factor, the normalisation of a sparse-access encoding."""
    H = as_matrix(H, square=True, name="H")
    scale = sparsity(H) * float(np.max(np.abs(H)))
    if scale == 0:
        raise ValueError("cannot normalise the zero matrix")
    return H / scale, scale
