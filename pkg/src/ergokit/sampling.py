"""Seeded, splittable random streams and Haar-distributed test objects.

Streams are counter-based (Philox), so ``stream(seed, i)`` for distinct ``i``
gives statistically independent generators that can run in parallel while
staying bit-reproducible.
"""

from __future__ import annotations

import numpy as np

from .quantum import DensityMatrix, HermitianOperator


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Independent generator number ``index`` of the stream keyed by ``seed``."""
    return np.random.Generator(np.random.Philox(key=seed).jumped(index))


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """A single Haar-distributed unitary (QR of a Ginibre matrix, phase-corrected)."""
    return haar_unitaries(dim, 1, rng)[0]


def haar_unitaries(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` Haar-distributed unitaries, shape (count, dim, dim)."""
    z = rng.standard_normal((count, dim, dim)) + 1j * rng.standard_normal((count, dim, dim))
    q, r = np.linalg.qr(z / np.sqrt(2.0))
    diag = np.einsum("kii->ki", r)
    return q * (diag / np.abs(diag))[:, None, :]


def random_pure(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random state vector."""
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return z / np.linalg.norm(z)


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> HermitianOperator:
    """GUE-style random Hermitian operator with entries of order ``scale``."""
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return HermitianOperator(scale * (a + a.conj().T) / 2.0)


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Random full-rank (or rank-limited) density matrix, G G†/tr from a Ginibre G."""
    r = dim if rank is None else rank
    if not 1 <= r <= dim:
        raise ValueError(f"rank must be in [1, {dim}], got {r}")
    g = rng.standard_normal((dim, r)) + 1j * rng.standard_normal((dim, r))
    m = g @ g.conj().T
    return DensityMatrix(m / m.trace().real)
