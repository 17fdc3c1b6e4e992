"""Seeded random test instances.

All randomness goes through one named, versioned generator so that a seed
reproduces the same instances across runs. Bump ``RNG_VERSION`` whenever a
generator below changes the way it consumes the stream.
"""

from __future__ import annotations

import numpy as np

from .linalg import dagger, norm2

RNG_NAME = "numpy.PCG64"
RNG_VERSION = "instances-v1"


def make_rng(seed: int) -> np.random.Generator:
    if not 0 <= int(seed) < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.PCG64(int(seed)))


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-distributed unitary (QR of a Ginibre matrix with phase fix)."""
    Q, R = np.linalg.qr(complex_gaussian(rng, (n, n)))
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_hermitian(rng: np.random.Generator, n: int, norm: float = 1.0) -> np.ndarray:
    """Random Hermitian matrix rescaled to spectral norm ``norm``."""
    G = complex_gaussian(rng, (n, n))
    H = (G + dagger(G)) / 2
    s = norm2(H)
    return H * (norm / s) if s > 0 else H


def random_contraction(rng: np.random.Generator, n: int) -> np.ndarray:
    """``M / ||M||_2`` scaled by a uniform factor in ``[0, 1]``."""
    M = complex_gaussian(rng, (n, n))
    return M / norm2(M) * rng.uniform(0.0, 1.0)


def random_positive(rng: np.random.Generator, n: int, lo: float, hi: float) -> np.ndarray:
    """Hermitian matrix with eigenvalues drawn uniformly from ``[lo, hi]``."""
    Q = random_unitary(rng, n)
    w = rng.uniform(lo, hi, size=n)
    H = (Q * w) @ dagger(Q)
    return (H + dagger(H)) / 2


def random_system(
    rng: np.random.Generator, n: int, lambda_min: float = 0.1, bound: float = 2.0
) -> tuple[np.ndarray, np.ndarray]:
    """``(H1, H2)`` with ``lambda_min <= eig(H1) <= bound`` and ``||H2||_2 <= bound``."""
    h1 = random_positive(rng, n, lambda_min, bound)
    h2 = random_hermitian(rng, n, rng.uniform(0.0, bound))
    return h1, h2
