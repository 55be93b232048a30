"""Geometric states, the geometric relative entropy, and the manifold ensemble."""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import ks_2samp

from ergokit import (
    DensityMatrix,
    GeometricPoint,
    GeometricState,
    HermitianOperator,
    SupportMismatch,
    aligned_geometric_state,
    canonical_density,
    ergotropy_direct,
    ergotropy_geometric,
    ergotropy_via_entropies,
    fs_uniform_sample,
    fubini_study_distance,
    geometric_partition_function,
    geometric_relative_entropy,
    geometric_state_of,
    gibbs_state,
    manifold_volume,
    optimal_alignment_unitary,
    qubit_partition_closed_form,
    spectral_relative_entropy,
)
from ergokit.geometric import _sample_amplitudes
from ergokit.sampling import haar_unitary, random_density, stream

H01 = HermitianOperator(np.diag([0.0, 1.0]))
PLUS = DensityMatrix(np.full((2, 2), 0.5))


class TestPoints:
    def test_phase_fixed(self):
        z = GeometricPoint(np.array([1j / math.sqrt(2), -1j / math.sqrt(2)]))
        k = int(np.argmax(np.abs(z.amplitudes)))
        assert z.amplitudes[k].real > 0.0

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError, match="norm"):
            GeometricPoint(np.array([1.0, 1.0]))

    def test_distance_range(self):
        a = GeometricPoint(np.array([1.0, 0.0]))
        b = GeometricPoint(np.array([0.0, 1.0]))
        assert fubini_study_distance(a, b) == pytest.approx(math.pi / 2, abs=1e-12)
        assert fubini_study_distance(a, a) == pytest.approx(0.0, abs=1e-7)


class TestGeometricStateOf:
    def test_pure_state_single_point(self):
        state = geometric_state_of(DensityMatrix(np.diag([1.0, 0.0])))
        assert state.n_points == 1
        assert state.weights[0] == pytest.approx(1.0)

    def test_maximally_mixed_two_antipodal_points(self):
        state = geometric_state_of(DensityMatrix(np.eye(2) / 2))
        assert state.n_points == 2
        assert np.allclose(state.weights, [0.5, 0.5])
        overlap = abs(np.vdot(state.points[0].amplitudes, state.points[1].amplitudes))
        assert overlap < 1e-10

    def test_reconstruction(self):
        rho = random_density(3, stream(0))
        state = geometric_state_of(rho)
        assert np.max(np.abs(state.density().matrix - rho.matrix)) < 1e-10

    def test_merge_duplicate_points(self):
        point = GeometricPoint(np.array([1.0, 0.0]))
        state = GeometricState(points=(point, point), weights=np.array([0.4, 0.6]))
        assert state.n_points == 1
        assert state.weights[0] == pytest.approx(1.0)


class TestAlignedState:
    def test_self_alignment(self):
        rho = random_density(3, stream(1))
        own = geometric_state_of(rho)
        aligned = aligned_geometric_state(rho, rho)
        assert geometric_relative_entropy(aligned, own) == pytest.approx(0.0, abs=1e-12)

    def test_pure_state_lands_on_ground(self):
        g = gibbs_state(H01, 1.0)
        aligned = aligned_geometric_state(PLUS, g.rho)
        assert aligned.n_points == 1
        assert abs(abs(aligned.points[0].amplitudes[0]) - 1.0) < 1e-10

    def test_density_matches_alignment_unitary(self):
        rho = random_density(4, stream(2))
        sigma = random_density(4, stream(3))
        aligned = aligned_geometric_state(rho, sigma)
        rotated = optimal_alignment_unitary(rho, sigma).apply(rho)
        assert np.max(np.abs(aligned.density().matrix - rotated.matrix)) < 1e-10


class TestGeometricRelativeEntropy:
    def test_identical_states_zero(self):
        state = geometric_state_of(random_density(3, stream(4)))
        assert geometric_relative_entropy(state, state) == pytest.approx(0.0, abs=1e-12)

    def test_aligned_plus_vs_gibbs(self):
        g = gibbs_state(H01, 1.0)
        aligned = aligned_geometric_state(PLUS, g.rho)
        reference = geometric_state_of(g.rho)
        assert geometric_relative_entropy(aligned, reference) == pytest.approx(g.log_z, abs=1e-10)

    def test_orthogonal_points_mismatch(self):
        a = GeometricState(points=(GeometricPoint(np.array([1.0, 0.0])),), weights=np.array([1.0]))
        b = GeometricState(points=(GeometricPoint(np.array([0.0, 1.0])),), weights=np.array([1.0]))
        with pytest.raises(SupportMismatch):
            geometric_relative_entropy(a, b)

    def test_more_points_than_reference_mismatch(self):
        mixed = geometric_state_of(DensityMatrix(np.eye(2) / 2))
        pure = geometric_state_of(DensityMatrix(np.diag([1.0, 0.0])))
        with pytest.raises(SupportMismatch):
            geometric_relative_entropy(mixed, pure)

    def test_equals_spectral_divergence(self):
        for trial in range(100):
            dim = 2 + trial % 5
            rho = random_density(dim, stream(5, 2 * trial))
            sigma = random_density(dim, stream(5, 2 * trial + 1))
            value = geometric_relative_entropy(
                aligned_geometric_state(rho, sigma), geometric_state_of(sigma)
            )
            assert abs(value - spectral_relative_entropy(rho, sigma)) <= 1e-9

    def test_degenerate_weights_paired_geometrically(self):
        # Equal weights on distinct points must match by geometry, not order.
        u = haar_unitary(3, stream(6))
        rho = DensityMatrix(u @ np.diag([0.4, 0.4, 0.2]) @ u.conj().T)
        state = geometric_state_of(rho)
        reordered = GeometricState(
            points=(state.points[1], state.points[0], state.points[2]),
            weights=np.array([state.weights[1], state.weights[0], state.weights[2]]),
        )
        assert geometric_relative_entropy(state, reordered) == pytest.approx(0.0, abs=1e-12)


class TestGeometricErgotropy:
    def test_gibbs_zero(self):
        from ergokit.sampling import random_hermitian

        h = random_hermitian(3, stream(7))
        g = gibbs_state(h, 1.0)
        assert ergotropy_geometric(g.rho, h, 1.0) == pytest.approx(0.0, abs=1e-9)

    def test_plus_state_half(self):
        assert ergotropy_geometric(PLUS, H01, 1.0) == pytest.approx(0.5, abs=1e-10)

    def test_triple_route_agreement(self):
        from ergokit.sampling import random_hermitian

        for trial in range(500):
            dim = 2 + trial % 5
            rho = random_density(dim, stream(8, 2 * trial))
            h = random_hermitian(dim, stream(9, trial))
            direct = ergotropy_direct(rho, h)
            via = ergotropy_via_entropies(rho, h, 1.0)
            geom = ergotropy_geometric(rho, h, 1.0)
            scale = 1.0 + abs(direct)
            assert abs(direct - via) <= 1e-8 * scale
            assert abs(direct - geom) <= 1e-8 * scale


class TestCanonicalDensity:
    def test_ground_state_weight_one(self):
        z = GeometricPoint(np.array([1.0, 0.0]))
        assert canonical_density(H01, 1.0, z) == pytest.approx(1.0, abs=1e-12)

    def test_plus_state(self):
        z = GeometricPoint(np.full(2, 1.0 / math.sqrt(2.0)))
        assert canonical_density(H01, 1.0, z) == pytest.approx(math.exp(-0.5), abs=1e-12)

    def test_excited_state(self):
        z = GeometricPoint(np.array([0.0, 1.0]))
        assert canonical_density(H01, 1.0, z) == pytest.approx(math.exp(-1.0), abs=1e-12)


class TestUniformSampler:
    def test_qubit_component_moment(self):
        points = fs_uniform_sample(2, 100_000, seed=0)
        mean = float(np.mean([abs(p.amplitudes[0]) ** 2 for p in points]))
        assert abs(mean - 0.5) < 0.005

    def test_component_moment_general_dim(self):
        for dim in (3, 5):
            amp = _sample_amplitudes(dim, 50_000, stream(1))
            moments = (np.abs(amp) ** 2).mean(axis=0)
            # Var(|z_a|^2) = (d-1)/(d^2 (d+1)); stay within 4 sigma of 1/d.
            sigma = math.sqrt((dim - 1) / (dim**2 * (dim + 1)) / 50_000)
            assert np.max(np.abs(moments - 1.0 / dim)) < 4.0 * sigma

    def test_bit_identical_for_fixed_seed(self):
        a = fs_uniform_sample(3, 50, seed=42)
        b = fs_uniform_sample(3, 50, seed=42)
        for pa, pb in zip(a, b):
            assert np.array_equal(pa.amplitudes, pb.amplitudes)

    def test_unitary_invariance_ks(self):
        amp = _sample_amplitudes(2, 100_000, stream(2))
        u = haar_unitary(2, stream(3))
        h = H01.matrix
        energies = np.einsum("ni,ij,nj->n", amp.conj(), h, amp).real
        rotated = amp @ u.T
        energies_rot = np.einsum("ni,ij,nj->n", rotated.conj(), h, rotated).real
        statistic = ks_2samp(energies, energies_rot).statistic
        assert statistic <= 0.01


class TestPartitionFunction:
    def test_qubit_estimate_matches_closed_form(self):
        estimate, stderr = geometric_partition_function(H01, 1.0, 400_000, seed=0)
        closed = qubit_partition_closed_form(H01, 1.0)
        assert abs(estimate - closed) <= 4.0 * stderr

    def test_closed_form_against_quadrature(self):
        # Independent oracle: 1-D quadrature over the Bloch polar angle with
        # volume element (1/4) sin(theta) dtheta dphi.
        beta, e0, e1 = 1.3, 0.2, 1.7
        h = HermitianOperator(np.diag([e0, e1]))

        def integrand(theta):
            energy = e0 * math.cos(theta / 2) ** 2 + e1 * math.sin(theta / 2) ** 2
            return 0.5 * math.pi * math.sin(theta) * math.exp(-beta * energy)

        numeric, _ = quad(integrand, 0.0, math.pi, epsabs=1e-12)
        assert qubit_partition_closed_form(h, beta) == pytest.approx(numeric, abs=1e-10)

    def test_high_temperature_limit_is_volume(self):
        estimate, _ = geometric_partition_function(H01, 1e-9, 10_000, seed=1)
        assert estimate == pytest.approx(manifold_volume(2), rel=1e-6)

    def test_degenerate_spectrum_zero_variance(self):
        h = HermitianOperator(np.diag([0.7, 0.7]))
        estimate, stderr = geometric_partition_function(h, 2.0, 1_000, seed=2)
        assert estimate == pytest.approx(math.pi * math.exp(-1.4), rel=1e-12)
        assert stderr <= 1e-12

    def test_volume_normalization(self):
        assert manifold_volume(2) == pytest.approx(math.pi)
        assert manifold_volume(4) == pytest.approx(math.pi**3 / 6.0)

    def test_seed_sweep_within_four_sigma(self):
        closed = qubit_partition_closed_form(H01, 1.0)
        for seed in range(5):
            estimate, stderr = geometric_partition_function(H01, 1.0, 100_000, seed=seed)
            assert abs(estimate - closed) <= 4.0 * stderr
