"""Quantum and classical ergotropy through independent routes: direct sorted
rearrangement, relative-entropy identities, and geometric-state constructions,
plus conditional-thermal-state work bounds on desk-scale systems."""

from .classical import (
    GridDistribution,
    JointDistribution,
    PhaseGrid,
    StationarityProbeResult,
    TransitionKernel,
    classical_ergotropy,
    classical_relative_entropy,
    compose_kernels,
    ergotropy_via_phi,
    grid_gibbs,
    inhomogeneity_phi,
    joint_from_kernel,
    joint_relative_entropy,
    microcanonical,
    permutation_min_bruteforce,
    sorted_pairing_divergence,
    stationarity_probe,
)
from .ergotropy import (
    AlignmentUnitary,
    ErgotropyReport,
    UnitaryProbeResult,
    coherent_ergotropy_eq11,
    dephased_ergotropy,
    ergotropy_direct,
    ergotropy_report,
    ergotropy_via_entropies,
    optimal_alignment_unitary,
    passive_energy,
    passive_state,
    unitary_min_probe,
)
from .errors import (
    EmptyShell,
    ErgokitError,
    NonDeterministicKernel,
    NotConverged,
    SupportMismatch,
    SupportViolation,
)
from .geometric import (
    GeometricPoint,
    GeometricState,
    aligned_geometric_state,
    canonical_density,
    ergotropy_geometric,
    fs_uniform_sample,
    fubini_study_distance,
    geometric_partition_function,
    geometric_relative_entropy,
    geometric_state_of,
    manifold_volume,
    qubit_partition_closed_form,
)
from .quantum import (
    DensityMatrix,
    GibbsState,
    HermitianOperator,
    SortedSpectrum,
    coherence_relative_entropy,
    dephase,
    eigendecompose,
    expectation,
    gibbs_state,
    quantum_relative_entropy,
    spectral_relative_entropy,
    von_neumann_entropy,
)
from .sampling import haar_unitary, random_density, random_hermitian, random_pure, stream
from .workbench import (
    BoundTerms,
    ConditionalThermalState,
    DrivingProtocol,
    WorkReport,
    conditional_thermal_state,
    evolve_unitary,
    sharpened_bound_report,
    step_product,
    work_accounting,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentUnitary",
    "BoundTerms",
    "ConditionalThermalState",
    "DensityMatrix",
    "DrivingProtocol",
    "EmptyShell",
    "ErgokitError",
    "ErgotropyReport",
    "GeometricPoint",
    "GeometricState",
    "GibbsState",
    "GridDistribution",
    "HermitianOperator",
    "JointDistribution",
    "NonDeterministicKernel",
    "NotConverged",
    "PhaseGrid",
    "SortedSpectrum",
    "StationarityProbeResult",
    "SupportMismatch",
    "SupportViolation",
    "TransitionKernel",
    "UnitaryProbeResult",
    "WorkReport",
    "aligned_geometric_state",
    "canonical_density",
    "classical_ergotropy",
    "classical_relative_entropy",
    "coherence_relative_entropy",
    "coherent_ergotropy_eq11",
    "compose_kernels",
    "conditional_thermal_state",
    "dephase",
    "dephased_ergotropy",
    "eigendecompose",
    "ergotropy_direct",
    "ergotropy_geometric",
    "ergotropy_report",
    "ergotropy_via_entropies",
    "ergotropy_via_phi",
    "evolve_unitary",
    "expectation",
    "fs_uniform_sample",
    "fubini_study_distance",
    "geometric_partition_function",
    "geometric_relative_entropy",
    "geometric_state_of",
    "gibbs_state",
    "grid_gibbs",
    "haar_unitary",
    "inhomogeneity_phi",
    "joint_from_kernel",
    "joint_relative_entropy",
    "manifold_volume",
    "microcanonical",
    "optimal_alignment_unitary",
    "passive_energy",
    "passive_state",
    "permutation_min_bruteforce",
    "quantum_relative_entropy",
    "qubit_partition_closed_form",
    "random_density",
    "random_hermitian",
    "random_pure",
    "sharpened_bound_report",
    "sorted_pairing_divergence",
    "spectral_relative_entropy",
    "stationarity_probe",
    "step_product",
    "stream",
    "unitary_min_probe",
    "von_neumann_entropy",
    "work_accounting",
]
