"""Dense Hermitian linear algebra: canonical spectra, Gibbs states, entropies,
and energy-basis coherence primitives.

All entropies use the natural logarithm (nats).  Every function is pure; the
matrix-carrying types are immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.special import logsumexp

from .errors import SupportViolation

# Construction tolerances.
HERMITICITY_ATOL = 1e-12
TRACE_ATOL = 1e-10
NEGATIVE_EIG_ATOL = 1e-10
# Eigenvalues at or below this floor are treated as exact zeros (0 ln 0 := 0).
SUPPORT_FLOOR = 1e-12
# Relative gap below which two eigenvalues count as degenerate.
DEGENERACY_RTOL = 1e-10
# Residual gate for the eigensolver, relative to the spectral norm.
EIGEN_RESIDUAL_RTOL = 1e-9

Order = Literal["ascending", "descending"]


class HermitianOperator:
    """A dense Hermitian matrix (an observable; energy units for Hamiltonians).

    Construction rejects matrices whose anti-Hermitian part exceeds
    ``HERMITICITY_ATOL`` entrywise; the stored matrix is the exactly
    symmetrized (M + M†)/2 and is read-only.
    """

    __slots__ = ("_matrix",)

    def __init__(self, matrix: np.ndarray):
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise ValueError(f"expected a square matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("matrix has non-finite entries")
        defect = float(np.max(np.abs(m - m.conj().T)))
        if defect > HERMITICITY_ATOL:
            raise ValueError(
                f"matrix is not Hermitian: max |M - M.conj().T| = {defect:.3e} "
                f"> {HERMITICITY_ATOL:.0e}"
            )
        self._store((m + m.conj().T) / 2.0)

    def _store(self, m: np.ndarray) -> None:
        m.setflags(write=False)
        object.__setattr__(self, "_matrix", m)

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def dim(self) -> int:
        return self._matrix.shape[0]

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim})"


class DensityMatrix(HermitianOperator):
    """A quantum state: Hermitian, unit trace, positive semidefinite.

    Eigenvalues in [-NEGATIVE_EIG_ATOL, 0) are clamped to zero and the state
    renormalized; anything more negative is rejected.
    """

    __slots__ = ()

    def __init__(self, matrix: np.ndarray):
        super().__init__(matrix)
        trace = float(self._matrix.trace().real)
        if abs(trace - 1.0) > TRACE_ATOL:
            raise ValueError(f"trace deviates from 1 by {abs(trace - 1.0):.3e}")
        w, v = np.linalg.eigh(self._matrix)
        if w[0] < -NEGATIVE_EIG_ATOL:
            raise ValueError(f"minimum eigenvalue {w[0]:.3e} below -{NEGATIVE_EIG_ATOL:.0e}")
        if w[0] < 0.0 or abs(trace - 1.0) > 1e-15:
            w = np.clip(w, 0.0, None)
            m = (v * w) @ v.conj().T
            m = (m + m.conj().T) / 2.0
            m /= m.trace().real
            self._store(m)


def _fix_phase(column: np.ndarray) -> np.ndarray:
    """Rotate a global phase so the largest-magnitude component is real positive."""
    k = int(np.argmax(np.abs(column)))
    a = column[k]
    mag = abs(a)
    if mag == 0.0:
        return column
    return column * (a.conjugate() / mag)


def _canonical_columns(block: np.ndarray) -> np.ndarray:
    """Deterministic basis for a degenerate eigenspace: re-orthonormalize,
    phase-fix, then order columns lexicographically by |component|."""
    q, _ = np.linalg.qr(block)
    q = np.column_stack([_fix_phase(q[:, j]) for j in range(q.shape[1])])
    keys = [tuple(np.round(np.abs(q[:, j]), 12)) for j in range(q.shape[1])]
    order = sorted(range(q.shape[1]), key=keys.__getitem__)
    return q[:, order]


@dataclass(frozen=True)
class SortedSpectrum:
    """Eigenvalues and orthonormal eigenvectors in a canonical order.

    ``values[i]`` belongs to column ``vectors[:, i]``.  ``clusters`` lists the
    index runs of (numerically) degenerate eigenvalues; inside each cluster the
    basis is fixed by a deterministic tie-break so repeated runs agree.
    """

    values: np.ndarray
    vectors: np.ndarray
    order: str
    clusters: tuple[tuple[int, ...], ...]

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T

    def cluster_ids(self) -> np.ndarray:
        ids = np.empty(len(self.values), dtype=int)
        for c, members in enumerate(self.clusters):
            ids[list(members)] = c
        return ids


def eigendecompose(operator: HermitianOperator, order: Order) -> SortedSpectrum:
    """Eigendecomposition with deterministic degenerate-subspace tie-breaking.

    Use ``"descending"`` for states (largest population first) and
    ``"ascending"`` for Hamiltonians (ground energy first).
    """
    if order not in ("ascending", "descending"):
        raise ValueError(f"unknown order {order!r}")
    w, v = np.linalg.eigh(operator.matrix)
    if order == "descending":
        w = w[::-1].copy()
        v = v[:, ::-1].copy()
    else:
        w = w.copy()
        v = v.copy()

    clusters: list[tuple[int, ...]] = []
    start = 0
    for i in range(1, len(w)):
        gap = abs(w[i] - w[i - 1])
        if gap > DEGENERACY_RTOL * (1.0 + max(abs(w[i]), abs(w[i - 1]))):
            clusters.append(tuple(range(start, i)))
            start = i
    clusters.append(tuple(range(start, len(w))))

    for members in clusters:
        sl = slice(members[0], members[-1] + 1)
        if len(members) > 1:
            v[:, sl] = _canonical_columns(v[:, sl])
        else:
            v[:, sl] = _fix_phase(v[:, members[0]])[:, None]

    residual = np.linalg.norm(operator.matrix @ v - v * w, axis=0)
    scale = max(float(np.max(np.abs(w))), np.finfo(float).tiny)
    if float(residual.max()) > EIGEN_RESIDUAL_RTOL * scale:
        raise ValueError(f"eigensolver residual {residual.max():.3e} exceeds gate")
    return SortedSpectrum(values=w, vectors=v, order=order, clusters=tuple(clusters))


@dataclass(frozen=True)
class GibbsState:
    """Thermal equilibrium state exp(-beta H)/Z with its log partition function.

    ``energies``/``populations``/``basis`` come from the canonical ascending
    spectrum of H, so ``rho`` reconstructs exactly from them.
    """

    rho: DensityMatrix
    beta: float
    log_z: float
    energies: np.ndarray
    populations: np.ndarray
    basis: np.ndarray


def gibbs_state(hamiltonian: HermitianOperator, beta: float) -> GibbsState:
    """Gibbs state of ``hamiltonian`` at inverse temperature ``beta`` (k_B = 1).

    Populations are computed with a max-shift so the partition sum never
    overflows; they must remain strictly positive at double precision.
    """
    if beta <= 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
    spectrum = eigendecompose(hamiltonian, "ascending")
    logits = -beta * spectrum.values
    log_z = float(logsumexp(logits))
    populations = np.exp(logits - log_z)
    if populations.min() <= 0.0:
        raise ValueError("Gibbs populations underflow to zero; beta too large for this spectrum")
    rho = DensityMatrix((spectrum.vectors * populations) @ spectrum.vectors.conj().T)
    return GibbsState(
        rho=rho,
        beta=float(beta),
        log_z=log_z,
        energies=spectrum.values,
        populations=populations,
        basis=spectrum.vectors,
    )


def expectation(state: DensityMatrix, observable: HermitianOperator) -> float:
    """Re tr(rho O)."""
    return float(np.einsum("ij,ji->", state.matrix, observable.matrix).real)


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """-tr(rho ln rho) with 0 ln 0 := 0."""
    w = np.linalg.eigvalsh(rho.matrix)
    live = w[w > SUPPORT_FLOOR]
    return float(-(live * np.log(live)).sum())


def quantum_relative_entropy(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """S(rho||sigma) = tr(rho ln rho) - tr(rho ln sigma), computed spectrally.

    Raises ``SupportViolation`` when any populated eigenvector of ``rho``
    carries weight outside the support of ``sigma``.
    """
    if rho.dim != sigma.dim:
        raise ValueError(f"dimension mismatch: {rho.dim} vs {sigma.dim}")
    p = eigendecompose(rho, "descending")
    s = eigendecompose(sigma, "descending")
    overlap = np.abs(s.vectors.conj().T @ p.vectors) ** 2  # [j, i] = |<s_j|p_i>|^2
    support = s.values > SUPPORT_FLOOR
    live = p.values > SUPPORT_FLOOR
    if live.any():
        mass = overlap[np.ix_(support, live)].sum(axis=0)
        deviation = float(np.max(np.abs(mass - 1.0)))
        if deviation > SUPPORT_FLOOR:
            raise SupportViolation(
                f"rho leaks {deviation:.3e} probability outside support(sigma)"
            )
    p_live = p.values[live]
    ln_s = np.log(s.values[support])
    cross = float(np.einsum("i,ji,j->", p_live, overlap[np.ix_(support, live)], ln_s))
    return float((p_live * np.log(p_live)).sum()) - cross


def spectral_relative_entropy(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Kullback-Leibler divergence of the descending-sorted eigenvalue lists."""
    if rho.dim != sigma.dim:
        raise ValueError(f"dimension mismatch: {rho.dim} vs {sigma.dim}")
    p = np.sort(np.linalg.eigvalsh(rho.matrix))[::-1]
    s = np.sort(np.linalg.eigvalsh(sigma.matrix))[::-1]
    live = p > SUPPORT_FLOOR
    if np.any(s[live] <= SUPPORT_FLOOR):
        raise SupportViolation("sorted sigma spectrum vanishes where rho is populated")
    return float((p[live] * (np.log(p[live]) - np.log(s[live]))).sum())


def dephase(rho: DensityMatrix, hamiltonian: HermitianOperator) -> DensityMatrix:
    """Remove coherences between distinct energy levels of ``hamiltonian``.

    Under degeneracy only inter-cluster blocks are zeroed; intra-cluster blocks
    are kept, which makes the map independent of the basis choice inside each
    degenerate subspace.
    """
    if rho.dim != hamiltonian.dim:
        raise ValueError(f"dimension mismatch: {rho.dim} vs {hamiltonian.dim}")
    spectrum = eigendecompose(hamiltonian, "ascending")
    ids = spectrum.cluster_ids()
    a = spectrum.vectors.conj().T @ rho.matrix @ spectrum.vectors
    mask = ids[:, None] == ids[None, :]
    return DensityMatrix(spectrum.vectors @ (a * mask) @ spectrum.vectors.conj().T)


def coherence_relative_entropy(rho: DensityMatrix, hamiltonian: HermitianOperator) -> float:
    """Relative entropy of coherence in the energy basis: H(dephased) - H(rho)."""
    return von_neumann_entropy(dephase(rho, hamiltonian)) - von_neumann_entropy(rho)
