"""Geometric quantum states: weighted point masses on the pure-state manifold,
the geometric relative entropy, and the geometric canonical ensemble.

The manifold is CP^(d-1) with the unitarily invariant (Fubini-Study) measure,
normalized so the total volume is pi^(d-1)/(d-1)!.  For d = 2 this gives the
closed-form partition integral pi (e^{-beta E0} - e^{-beta E1}) / (beta (E1-E0)),
used as the analytic cross-check for the Monte Carlo estimator.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial, pi

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import SupportMismatch
from .quantum import (
    SUPPORT_FLOOR,
    DensityMatrix,
    HermitianOperator,
    eigendecompose,
    gibbs_state,
    quantum_relative_entropy,
)
from .sampling import stream

# Support matching and merging use the overlap deficit 1 - |<a|b>| rather than
# the arccos distance: the deficit carries ~1e-15 absolute rounding error,
# whereas arccos amplifies the same error to ~1e-8 radians, which would break
# matching of bitwise-identical eigenvectors.  The thresholds correspond to
# angular separations of ~1.4e-6 (match) and ~1.4e-7 (merge).
MATCH_OVERLAP_DEFICIT = 1e-12
MERGE_OVERLAP_DEFICIT = 1e-14
NORM_ATOL = 1e-12


def _fix_phase(z: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(z)))
    a = z[k]
    return z * (a.conjugate() / abs(a))


@dataclass(frozen=True)
class GeometricPoint:
    """A pure state as a point on CP^(d-1): unit amplitudes, phase-fixed so the
    largest-magnitude component is real positive."""

    amplitudes: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.amplitudes, dtype=complex)
        if z.ndim != 1 or z.size < 2:
            raise ValueError("amplitudes must be a vector of length >= 2")
        norm = float(np.linalg.norm(z))
        if abs(norm - 1.0) > NORM_ATOL:
            raise ValueError(f"amplitudes norm deviates from 1 by {abs(norm - 1.0):.3e}")
        z = _fix_phase(z / norm)
        z.setflags(write=False)
        object.__setattr__(self, "amplitudes", z)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


def fubini_study_distance(a: GeometricPoint, b: GeometricPoint) -> float:
    """arccos |<a|b>|, the geodesic distance on the projective space."""
    overlap = abs(np.vdot(a.amplitudes, b.amplitudes))
    return float(np.arccos(min(1.0, overlap)))


def _overlap_deficit(a: GeometricPoint, b: GeometricPoint) -> float:
    return max(0.0, 1.0 - abs(np.vdot(a.amplitudes, b.amplitudes)))


@dataclass(frozen=True)
class GeometricState:
    """Probability distribution on the manifold given as weighted point masses.
    Coincident points (overlap deficit below ``MERGE_OVERLAP_DEFICIT``) are
    merged at construction."""

    points: tuple[GeometricPoint, ...]
    weights: np.ndarray

    def __post_init__(self):
        pts = tuple(self.points)
        w = np.asarray(self.weights, dtype=float)
        if len(pts) == 0 or w.shape != (len(pts),):
            raise ValueError("points and weights must be nonempty and equal length")
        if w.min() < 0.0:
            raise ValueError(f"negative weight {w.min():.3e}")
        if abs(w.sum() - 1.0) > 1e-10:
            raise ValueError(f"weights deviate from unit mass by {abs(w.sum() - 1.0):.3e}")
        merged_pts: list[GeometricPoint] = []
        merged_w: list[float] = []
        for point, weight in zip(pts, w):
            for i, existing in enumerate(merged_pts):
                if _overlap_deficit(point, existing) <= MERGE_OVERLAP_DEFICIT:
                    merged_w[i] += float(weight)
                    break
            else:
                merged_pts.append(point)
                merged_w.append(float(weight))
        wm = np.array(merged_w)
        wm.setflags(write=False)
        object.__setattr__(self, "points", tuple(merged_pts))
        object.__setattr__(self, "weights", wm)

    @property
    def dim(self) -> int:
        return self.points[0].dim

    @property
    def n_points(self) -> int:
        return len(self.points)

    def density(self) -> DensityMatrix:
        m = sum(w * p.projector() for w, p in zip(self.weights, self.points))
        return DensityMatrix(m)


def geometric_state_of(rho: DensityMatrix) -> GeometricState:
    """Point-mass representation from the eigendecomposition of ``rho``
    (descending weights; zero-weight eigenvectors dropped)."""
    spectrum = eigendecompose(rho, "descending")
    keep = spectrum.values > SUPPORT_FLOOR
    weights = spectrum.values[keep]
    points = tuple(GeometricPoint(spectrum.vectors[:, i]) for i in np.flatnonzero(keep))
    return GeometricState(points=points, weights=weights / weights.sum())


def aligned_geometric_state(rho: DensityMatrix, sigma: DensityMatrix) -> GeometricState:
    """Weights of ``rho`` (descending) placed on sigma's eigenvector points;
    the geometric counterpart of conjugating rho with the aligning unitary."""
    if rho.dim != sigma.dim:
        raise ValueError(f"dimension mismatch: {rho.dim} vs {sigma.dim}")
    p = eigendecompose(rho, "descending")
    s = eigendecompose(sigma, "descending")
    keep = p.values > SUPPORT_FLOOR
    weights = p.values[keep]
    points = tuple(GeometricPoint(s.vectors[:, i]) for i in np.flatnonzero(keep))
    return GeometricState(points=points, weights=weights / weights.sum())


def geometric_relative_entropy(p_state: GeometricState, s_state: GeometricState) -> float:
    """sum_j p_j ln(p_j / s_j) over bijectively matched support points.

    Points are paired by proximity on the manifold (every point of ``p_state``
    must find its own partner with overlap deficit below
    ``MATCH_OVERLAP_DEFICIT``); weight-degenerate groups are therefore paired
    geometrically, never by index order.
    """
    if p_state.dim != s_state.dim:
        raise ValueError(f"dimension mismatch: {p_state.dim} vs {s_state.dim}")
    np_, ns = p_state.n_points, s_state.n_points
    if np_ > ns:
        raise SupportMismatch(
            f"{np_} support points cannot inject into {ns} reference points"
        )
    deficit = np.empty((np_, ns))
    for i, pp in enumerate(p_state.points):
        for j, sp in enumerate(s_state.points):
            deficit[i, j] = _overlap_deficit(pp, sp)
    cost = np.where(deficit <= MATCH_OVERLAP_DEFICIT, deficit, 1e6)
    rows, cols = linear_sum_assignment(cost)
    if np.any(deficit[rows, cols] > MATCH_OVERLAP_DEFICIT):
        raise SupportMismatch("no bijection pairs the support points within tolerance")
    p_w = p_state.weights[rows]
    s_w = s_state.weights[cols]
    live = p_w > SUPPORT_FLOOR
    if np.any(s_w[live] <= SUPPORT_FLOOR):
        raise SupportMismatch("matched reference point carries no weight")
    return float((p_w[live] * (np.log(p_w[live]) - np.log(s_w[live]))).sum())


def ergotropy_geometric(rho: DensityMatrix, hamiltonian: HermitianOperator, beta: float) -> float:
    """Third route to the ergotropy:
    (S(rho||rho_eq) - D_geom(aligned||geometric(rho_eq))) / beta."""
    if beta <= 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
    eq = gibbs_state(hamiltonian, beta).rho
    aligned = aligned_geometric_state(rho, eq)
    reference = geometric_state_of(eq)
    return (
        quantum_relative_entropy(rho, eq) - geometric_relative_entropy(aligned, reference)
    ) / beta


def energy_density(hamiltonian: HermitianOperator, z: np.ndarray) -> float:
    """h(z) = <z|H|z> for unit amplitudes z."""
    return float(np.vdot(z, hamiltonian.matrix @ z).real)


def canonical_density(hamiltonian: HermitianOperator, beta: float, z: GeometricPoint) -> float:
    """Unnormalized geometric canonical weight exp(-beta h(z))."""
    if beta <= 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
    return float(np.exp(-beta * energy_density(hamiltonian, z.amplitudes)))


def manifold_volume(dim: int) -> float:
    """Total Fubini-Study volume of CP^(dim-1): pi^(dim-1) / (dim-1)!."""
    if dim < 2:
        raise ValueError("dim must be >= 2")
    return pi ** (dim - 1) / factorial(dim - 1)


def _sample_amplitudes(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Rows are uniform (Fubini-Study) points: normalized complex Gaussians."""
    z = rng.standard_normal((count, dim)) + 1j * rng.standard_normal((count, dim))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def fs_uniform_sample(dim: int, n: int, seed: int) -> list[GeometricPoint]:
    """``n`` points drawn from the unitarily invariant measure on CP^(dim-1).

    The draw order is fixed by the seed, so the sequence is bit-reproducible.
    """
    if dim < 2:
        raise ValueError("dim must be >= 2")
    if n < 1:
        raise ValueError("n must be >= 1")
    amplitudes = _sample_amplitudes(dim, n, stream(seed))
    return [GeometricPoint(row) for row in amplitudes]


def geometric_partition_function(
    hamiltonian: HermitianOperator,
    beta: float,
    n_samples: int,
    seed: int,
    chunk: int = 1 << 18,
) -> tuple[float, float]:
    """Monte Carlo estimate of the geometric partition integral over CP^(d-1).

    Returns ``(estimate, standard_error)`` where the estimate is
    Vol(CP^(d-1)) * mean(exp(-beta h(z))) over uniform samples.
    """
    if beta <= 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
    if n_samples < 100:
        raise ValueError("n_samples must be >= 100")
    rng = stream(seed)
    h_matrix = hamiltonian.matrix
    # Chunk-merged Welford accumulation: the naive E[X^2] - E[X]^2 form loses
    # all significance for near-constant integrands.
    count = 0
    mean = 0.0
    m2 = 0.0
    while count < n_samples:
        m = min(chunk, n_samples - count)
        amp = _sample_amplitudes(hamiltonian.dim, m, rng)
        h = np.einsum("ni,ij,nj->n", amp.conj(), h_matrix, amp).real
        w = np.exp(-beta * h)
        chunk_mean = float(w.mean())
        chunk_m2 = float(((w - chunk_mean) ** 2).sum())
        delta = chunk_mean - mean
        count += m
        mean += delta * m / count
        m2 += chunk_m2 + delta * delta * m * (count - m) / count
    variance = m2 / max(1, n_samples - 1)
    volume = manifold_volume(hamiltonian.dim)
    return volume * mean, volume * float(np.sqrt(variance / n_samples))


def qubit_partition_closed_form(hamiltonian: HermitianOperator, beta: float) -> float:
    """Exact geometric partition integral for d = 2."""
    if hamiltonian.dim != 2:
        raise ValueError("closed form applies to d = 2 only")
    if beta <= 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
    e0, e1 = np.linalg.eigvalsh(hamiltonian.matrix)
    gap = e1 - e0
    if gap <= 1e-14:
        return pi * float(np.exp(-beta * e0))
    return pi * float(np.exp(-beta * e0) - np.exp(-beta * e1)) / (beta * gap)
