"""Discretized phase space: distributions on a cell grid, doubly stochastic
dynamics, classical relative entropies, and the classical ergotropy.

Liouville (volume-preserving) dynamics is represented by permutation kernels;
general doubly stochastic kernels are accepted wherever the defining relative
entropy makes sense but rejected by the inhomogeneity-form routines, which
require joint entropy to equal marginal entropy.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Literal

import numpy as np
from scipy.special import logsumexp

from .errors import EmptyShell, ErgokitError, NonDeterministicKernel, SupportViolation
from .sampling import stream

MASS_ATOL = 1e-10
STOCHASTIC_ATOL = 1e-10
WEIGHT_FLOOR = 1e-15
# Asserted per-probe envelope on the first-order relative-entropy change when
# the initial distribution is uniform over every cell.
STATIONARITY_ENVELOPE = 10.0

Surface = Literal["A", "B"]


@dataclass(frozen=True)
class PhaseGrid:
    """Discrete phase-space cells with an energy per cell on surfaces A and B."""

    energy_a: np.ndarray
    energy_b: np.ndarray
    cell_volume: float = 1.0

    def __post_init__(self):
        ea = np.asarray(self.energy_a, dtype=float)
        eb = np.asarray(self.energy_b, dtype=float)
        if ea.ndim != 1 or eb.shape != ea.shape or ea.size < 1:
            raise ValueError("energy_a and energy_b must be 1-D vectors of equal length")
        if not (np.all(np.isfinite(ea)) and np.all(np.isfinite(eb))):
            raise ValueError("grid energies must be finite")
        if not self.cell_volume > 0.0:
            raise ValueError("cell_volume must be positive")
        ea.setflags(write=False)
        eb.setflags(write=False)
        object.__setattr__(self, "energy_a", ea)
        object.__setattr__(self, "energy_b", eb)

    @property
    def n_cells(self) -> int:
        return self.energy_a.size

    def energies(self, surface: Surface) -> np.ndarray:
        if surface == "A":
            return self.energy_a
        if surface == "B":
            return self.energy_b
        raise ValueError(f"unknown surface {surface!r}")


@dataclass(frozen=True)
class GridDistribution:
    """Probability per cell; nonnegative and normalized."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size < 1:
            raise ValueError("weights must be a 1-D vector")
        if w.min() < 0.0:
            raise ValueError(f"negative weight {w.min():.3e}")
        if abs(w.sum() - 1.0) > MASS_ATOL:
            raise ValueError(f"total mass deviates from 1 by {abs(w.sum() - 1.0):.3e}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n_cells(self) -> int:
        return self.weights.size


@dataclass(frozen=True)
class TransitionKernel:
    """Doubly stochastic transition matrix; column j is the distribution of the
    final cell given initial cell j.  ``is_deterministic`` is set iff every
    column is a unit vector (a permutation)."""

    matrix: np.ndarray
    is_deterministic: bool = False

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise ValueError(f"expected a square matrix, got shape {m.shape}")
        if m.min() < 0.0:
            raise ValueError(f"negative kernel entry {m.min():.3e}")
        col_dev = float(np.max(np.abs(m.sum(axis=0) - 1.0)))
        row_dev = float(np.max(np.abs(m.sum(axis=1) - 1.0)))
        if col_dev > STOCHASTIC_ATOL or row_dev > STOCHASTIC_ATOL:
            raise ValueError(
                f"kernel is not doubly stochastic: column dev {col_dev:.3e}, row dev {row_dev:.3e}"
            )
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        deterministic = bool(np.all(m.max(axis=0) >= 1.0 - STOCHASTIC_ATOL))
        object.__setattr__(self, "is_deterministic", deterministic)

    @property
    def n_cells(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def identity(cls, n: int) -> "TransitionKernel":
        return cls(np.eye(n))

    @classmethod
    def from_permutation(cls, image: np.ndarray) -> "TransitionKernel":
        """Kernel sending cell j to cell image[j]."""
        image = np.asarray(image, dtype=int)
        n = image.size
        m = np.zeros((n, n))
        m[image, np.arange(n)] = 1.0
        return cls(m)


@dataclass(frozen=True)
class JointDistribution:
    """Joint probability of (final, initial) cells; entry [f, i] couples final
    cell f with initial cell i."""

    matrix: np.ndarray
    from_deterministic: bool = False

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise ValueError(f"expected a square matrix, got shape {m.shape}")
        if m.min() < 0.0:
            raise ValueError(f"negative joint entry {m.min():.3e}")
        if abs(m.sum() - 1.0) > MASS_ATOL:
            raise ValueError(f"total mass deviates from 1 by {abs(m.sum() - 1.0):.3e}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if not self.from_deterministic:
            # Structural fallback: at most one populated entry per initial cell.
            deterministic = bool(np.all((m > 0.0).sum(axis=0) <= 1))
            object.__setattr__(self, "from_deterministic", deterministic)

    @property
    def n_cells(self) -> int:
        return self.matrix.shape[0]

    def initial_marginal(self) -> np.ndarray:
        return self.matrix.sum(axis=0)

    def final_marginal(self) -> np.ndarray:
        return self.matrix.sum(axis=1)


def microcanonical(grid: PhaseGrid, surface: Surface, energy: float, delta: float) -> GridDistribution:
    """Uniform distribution on the cells whose energy lies in [energy, energy + delta]."""
    e = grid.energies(surface)
    shell = (e >= energy) & (e <= energy + delta)
    count = int(shell.sum())
    if count == 0:
        raise EmptyShell(
            f"no cell on surface {surface} has energy in [{energy}, {energy + delta}]"
        )
    return GridDistribution(shell.astype(float) / count)


def grid_gibbs(grid: PhaseGrid, surface: Surface, beta: float) -> GridDistribution:
    """Boltzmann weights over the cells of one energy surface."""
    if beta <= 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
    logits = -beta * grid.energies(surface)
    return GridDistribution(np.exp(logits - logsumexp(logits)))


def joint_from_kernel(p_a: GridDistribution, kernel: TransitionKernel) -> JointDistribution:
    """Joint distribution kernel[f, i] * p_a[i]."""
    if p_a.n_cells != kernel.n_cells:
        raise ValueError(f"size mismatch: {p_a.n_cells} vs {kernel.n_cells}")
    return JointDistribution(
        kernel.matrix * p_a.weights[None, :], from_deterministic=kernel.is_deterministic
    )


def compose_kernels(later: TransitionKernel, earlier: TransitionKernel) -> TransitionKernel:
    """Kernel of `earlier` followed by `later` (matrix product)."""
    if later.n_cells != earlier.n_cells:
        raise ValueError(f"size mismatch: {later.n_cells} vs {earlier.n_cells}")
    return TransitionKernel(later.matrix @ earlier.matrix)


def _xlogx(values: np.ndarray) -> float:
    live = values[values > WEIGHT_FLOOR]
    return float((live * np.log(live)).sum())


def _joint_relative_entropy_raw(joint: np.ndarray, reference: np.ndarray) -> float:
    final_marginal = joint.sum(axis=1)
    populated = final_marginal > WEIGHT_FLOOR
    if np.any(reference[populated] <= WEIGHT_FLOOR):
        raise SupportViolation("reference distribution vanishes on a populated final cell")
    cross = float(final_marginal[populated] @ np.log(reference[populated]))
    return _xlogx(joint) - cross


def joint_relative_entropy(joint: JointDistribution, p_eq: GridDistribution) -> float:
    """Relative entropy of a joint distribution against a reference on the
    final coordinate: sum J ln J - sum_f (final marginal)_f ln p_eq[f]."""
    if joint.n_cells != p_eq.n_cells:
        raise ValueError(f"size mismatch: {joint.n_cells} vs {p_eq.n_cells}")
    return _joint_relative_entropy_raw(joint.matrix, p_eq.weights)


def classical_relative_entropy(p: GridDistribution, q: GridDistribution) -> float:
    """Pointwise Kullback-Leibler divergence sum p ln(p/q), no sorting."""
    if p.n_cells != q.n_cells:
        raise ValueError(f"size mismatch: {p.n_cells} vs {q.n_cells}")
    pw, qw = p.weights, q.weights
    live = pw > WEIGHT_FLOOR
    if np.any(qw[live] <= WEIGHT_FLOOR):
        raise SupportViolation("q vanishes where p is populated")
    return float((pw[live] * (np.log(pw[live]) - np.log(qw[live]))).sum())


def classical_ergotropy(
    joint: JointDistribution, p_a: GridDistribution, p_eq: GridDistribution, beta: float
) -> float:
    """(D(joint||p_eq) - D(p_a||p_eq)) / beta.  Returned as computed: the value
    can be negative when the dynamics has already lowered the energy."""
    if beta <= 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
    return (joint_relative_entropy(joint, p_eq) - classical_relative_entropy(p_a, p_eq)) / beta


def inhomogeneity_phi(joint: JointDistribution, p_a: GridDistribution) -> np.ndarray:
    """Inhomogeneity profile: final marginal minus the initial distribution."""
    if joint.n_cells != p_a.n_cells:
        raise ValueError(f"size mismatch: {joint.n_cells} vs {p_a.n_cells}")
    return joint.final_marginal() - p_a.weights


def ergotropy_via_phi(
    joint: JointDistribution, p_a: GridDistribution, grid: PhaseGrid
) -> float:
    """Work stored in inhomogeneities: sum_f phi[f] * E_B[f].

    Valid only for joints generated by a deterministic (permutation) kernel;
    otherwise the joint entropy no longer matches the marginal entropy and the
    identity with the relative-entropy form breaks.
    """
    if joint.n_cells != grid.n_cells:
        raise ValueError(f"size mismatch: {joint.n_cells} vs {grid.n_cells}")
    if not joint.from_deterministic:
        raise NonDeterministicKernel(
            "inhomogeneity form requires a permutation-kernel joint"
        )
    return float(inhomogeneity_phi(joint, p_a) @ grid.energy_b)


def sorted_pairing_divergence(p: np.ndarray, q: np.ndarray) -> float:
    """KL of descending-sorted p against descending-sorted q (0 ln 0 := 0)."""
    ps = np.sort(np.asarray(p, dtype=float))[::-1]
    qs = np.sort(np.asarray(q, dtype=float))[::-1]
    live = ps > WEIGHT_FLOOR
    if np.any(qs[live] <= WEIGHT_FLOOR):
        return float("inf")
    return float((ps[live] * (np.log(ps[live]) - np.log(qs[live]))).sum())


def permutation_min_bruteforce(
    p: GridDistribution, q: GridDistribution
) -> tuple[float, tuple[int, ...]]:
    """Exhaustive minimum over all pairings of p-cells onto q-cells of
    sum_i p[pi(i)] ln(p[pi(i)] / q[i]); returns the value and an optimal pi.

    Equals the descending-sorted pairing; limited to small grids (n <= 8).
    """
    n = p.n_cells
    if q.n_cells != n:
        raise ValueError(f"size mismatch: {n} vs {q.n_cells}")
    if n > 8:
        raise ValueError(f"factorial search limited to n <= 8 cells, got {n}")
    perms = np.array(list(permutations(range(n))), dtype=int)
    pp = p.weights[perms]  # (n!, n)
    with np.errstate(divide="ignore"):
        log_q = np.where(q.weights > WEIGHT_FLOOR, np.log(np.maximum(q.weights, 1e-300)), -np.inf)
    terms = np.where(
        pp > WEIGHT_FLOOR,
        pp * (np.log(np.maximum(pp, 1e-300)) - log_q[None, :]),
        0.0,
    )
    totals = terms.sum(axis=1)
    best = int(np.argmin(totals))
    return float(totals[best]), tuple(int(i) for i in perms[best])


def _random_doubly_stochastic(n: int, rng: np.random.Generator, components: int = 4) -> np.ndarray:
    """Convex combination of random permutation matrices (exactly doubly stochastic)."""
    weights = rng.dirichlet(np.ones(components))
    out = np.zeros((n, n))
    for w in weights:
        image = rng.permutation(n)
        out[image, np.arange(n)] += w
    return out


@dataclass(frozen=True)
class StationarityProbeResult:
    """Response of the joint relative entropy to doubly-stochastic mixing.

    ``delta_first_order`` is the change of the reference (energy) term alone,
    i.e. the discrete variational expression whose vanishing defines
    stationarity; the entropy term is invariant under volume-preserving
    transport and is excluded from it.  ``delta_total`` is the full change
    including the entropy term that mixing (as opposed to transport) adds.
    """

    epsilon: float
    n_perturbations: int
    seed: int
    baseline: float
    delta_total: np.ndarray
    delta_first_order: np.ndarray
    pa_uniform: bool
    first_order_bound: float
    first_order_ok: bool | None
    n_negative_total: int
    n_negative_first_order: int


def stationarity_probe(
    joint: JointDistribution,
    p_a: GridDistribution,
    grid: PhaseGrid,
    beta: float,
    n_perturbations: int,
    epsilon: float,
    seed: int,
) -> StationarityProbeResult:
    """Perturb the dynamics after the given joint by xi = (1-eps) I + eps R with
    random doubly stochastic R, and report the relative-entropy changes.

    When ``p_a`` is uniform over every cell the first-order change must stay
    inside the quadratic envelope 10 * eps^2 (it vanishes identically on a
    uniform marginal); for non-uniform ``p_a`` negative changes are reported,
    not asserted away.
    """
    if beta <= 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
    if n_perturbations < 1:
        raise ValueError("n_perturbations must be >= 1")
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"infeasible epsilon {epsilon}: perturbed kernels must stay nonnegative")
    n = joint.n_cells
    if p_a.n_cells != n or grid.n_cells != n:
        raise ValueError("joint, p_a, and grid sizes must match")

    p_eq = grid_gibbs(grid, "B", beta)
    log_eq = np.log(p_eq.weights)
    baseline = joint_relative_entropy(joint, p_eq)
    marginal = joint.final_marginal()

    delta_total = np.empty(n_perturbations)
    delta_first = np.empty(n_perturbations)
    for k in range(n_perturbations):
        # One stream per probe so the same seed draws the same R at every epsilon.
        r = _random_doubly_stochastic(n, stream(seed, k))
        perturbed = (1.0 - epsilon) * joint.matrix + epsilon * (r @ joint.matrix)
        delta_total[k] = _joint_relative_entropy_raw(perturbed, p_eq.weights) - baseline
        delta_first[k] = -epsilon * float((r @ marginal - marginal) @ log_eq)

    pa_uniform = bool(np.max(np.abs(p_a.weights - 1.0 / n)) <= 1e-12)
    bound = STATIONARITY_ENVELOPE * epsilon**2
    first_order_ok: bool | None = None
    if pa_uniform:
        first_order_ok = bool(np.max(np.abs(delta_first)) <= bound)
        if not first_order_ok:
            raise ErgokitError(
                "first-order relative-entropy change "
                f"{np.max(np.abs(delta_first)):.3e} exceeds quadratic envelope {bound:.3e} "
                "for a uniform initial distribution"
            )
    return StationarityProbeResult(
        epsilon=float(epsilon),
        n_perturbations=n_perturbations,
        seed=seed,
        baseline=baseline,
        delta_total=delta_total,
        delta_first_order=delta_first,
        pa_uniform=pa_uniform,
        first_order_bound=bound,
        first_order_ok=first_order_ok,
        n_negative_total=int((delta_total < 0.0).sum()),
        n_negative_first_order=int((delta_first < 0.0).sum()),
    )
