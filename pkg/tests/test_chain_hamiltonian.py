import numpy as np
import pytest

from config import Config
from data_structures.sparse_state import QState, SparseVector, apply_chain_update
from data_structures.spin_chain import ChainConfig, OntState, orbit_census, orbit_of, update_index, zero_modes
from errors import ConfigMismatchError, DegenerateSizeError, SystemSizeError
from services.chain_hamiltonian import (
    apply_hamiltonian,
    approx_hamiltonian_apply,
    bell_demo,
    bell_pair_state,
    build_hamiltonian,
    check_orbit,
    dense_matrix,
    evolve,
    perturb_hamiltonian,
    perturbation_scan,
    verify_bch,
)
from utils.pauli import permutation_matrix


class TestBuildHamiltonian:
    """Coefficients of H as a polynomial in U."""

    def test_two_step_chain(self):
        config = ChainConfig(num_spins=4, timestep=0.5)
        h = build_hamiltonian(config)
        np.testing.assert_allclose(h.coefficients, [np.pi, -np.pi], atol=1e-12)

    @pytest.mark.parametrize("num_spins", [4, 6, 8, 12, 20])
    def test_exact_coefficients(self, num_spins):
        config = ChainConfig(num_spins=num_spins, timestep=1.5)
        half, period = config.half, config.timestep
        c = np.array(build_hamiltonian(config).coefficients)
        assert len(c) == half
        assert abs(c.sum()) < 1e-12
        assert c[0] == pytest.approx(np.pi * (half - 1) / (half * period))
        for k in range(1, half):
            expected = -(np.pi / (half * period)) * (1 + 1j / np.tan(np.pi * k / half))
            assert c[k] == pytest.approx(expected, abs=1e-12)

    def test_leading_order_coefficients(self, chain8):
        h = build_hamiltonian(chain8, "leading_order")
        assert h.coefficients == (np.pi, 1j, 0, -1j)
        assert build_hamiltonian(ChainConfig(num_spins=4), "leading_order").coefficients == (np.pi, 0j)

    def test_leading_order_mirrors_cotangent_terms(self):
        config = ChainConfig(num_spins=60, timestep=1.0)
        half = config.half
        cot = build_hamiltonian(config, "cotangent").coefficients
        lead = build_hamiltonian(config, "leading_order").coefficients
        # leading terms of the cot form with U and U^dagger exchanged
        assert lead[1] == pytest.approx(cot[half - 1], abs=5e-3)
        assert lead[half - 1] == pytest.approx(cot[1], abs=5e-3)
        assert lead[1] == pytest.approx(-cot[1], abs=5e-3)
        assert cot[1].imag < 0 < lead[1].imag

    def test_perturbed_form_needs_perturb(self, chain8):
        with pytest.raises(ValueError):
            build_hamiltonian(chain8, "perturbed")

    @pytest.mark.parametrize("form", ["exact", "cotangent", "leading_order"])
    def test_dense_hermitian(self, form, chain8):
        matrix = dense_matrix(build_hamiltonian(chain8, form))
        assert matrix.shape == (256, 256)
        np.testing.assert_allclose(matrix, matrix.conj().T, atol=1e-12)

    def test_dense_generator(self):
        config = ChainConfig(num_spins=6, timestep=1.0)
        matrix = dense_matrix(build_hamiltonian(config))
        values, vectors = np.linalg.eigh(matrix)
        evolved = (vectors * np.exp(-1j * values)) @ vectors.conj().T
        expected = permutation_matrix(lambda x: update_index(x, 6), 6)
        np.testing.assert_allclose(evolved, expected, atol=1e-10)

    def test_dense_size_limit(self):
        with pytest.raises(SystemSizeError):
            dense_matrix(build_hamiltonian(ChainConfig(num_spins=12)))


class TestApplyHamiltonian:
    """Sparse action of the polynomial in U."""

    @pytest.mark.parametrize("num_spins", [4, 6, 8, 10, 12])
    def test_zero_modes_annihilated(self, num_spins):
        config = ChainConfig(num_spins=num_spins)
        h = build_hamiltonian(config)
        for mode in zero_modes(config):
            assert apply_hamiltonian(h, QState.basis(mode)).norm() < 1e-10

    def test_cotangent_form_on_zero_mode(self, chain8):
        h = build_hamiltonian(chain8, "cotangent")
        image = apply_hamiltonian(h, QState.basis(zero_modes(chain8)[0]))
        assert image.support == [zero_modes(chain8)[0].index]
        assert image.amplitude(zero_modes(chain8)[0].index) == pytest.approx(np.pi)

    def test_matches_dense(self, chain8, rng):
        h = build_hamiltonian(chain8)
        matrix = dense_matrix(h)
        for index in rng.integers(0, 256, size=10):
            column = apply_hamiltonian(h, SparseVector({int(index): 1.0}, 8))
            dense = np.zeros(256, dtype=complex)
            for i, a in column.items():
                dense[i] = a
            np.testing.assert_allclose(dense, matrix[:, int(index)], atol=1e-12)

    def test_config_mismatch(self, chain8):
        with pytest.raises(ConfigMismatchError):
            apply_hamiltonian(build_hamiltonian(chain8), SparseVector({0: 1.0}, 6))


class TestVerifyBch:
    """Orbit-wise check of exp(-i H T) = U."""

    @pytest.mark.parametrize("num_spins", [4, 6, 8, 10, 12])
    def test_exhaustive(self, num_spins):
        config = ChainConfig(num_spins=num_spins, timestep=0.8)
        report = verify_bch(config)
        assert report.mode == "exhaustive"
        assert report.passed
        assert report.failures == 0
        assert report.max_deviation < 1e-10
        assert report.census == orbit_census(config)
        minima = [row.orbit_min_index for row in report.rows]
        assert minima == sorted(minima)
        assert all(row.form_deviation < 1e-10 for row in report.rows)

    def test_threads_do_not_change_result(self, chain8):
        assert verify_bch(chain8, workers=4) == verify_bch(chain8, workers=1)

    def test_sampled(self):
        config = ChainConfig(num_spins=24)
        report = verify_bch(config, samples=12, seed=3)
        assert report.mode == "sampled"
        assert report.passed
        assert 1 <= report.orbit_count <= 12

    def test_exhaustive_size_limit(self):
        with pytest.raises(SystemSizeError):
            verify_bch(ChainConfig(num_spins=Config.EXHAUSTIVE_BCH_MAX_SPINS + 2), mode="exhaustive")

    def test_zero_mode_energy_must_vanish(self, chain8):
        shift = 2 * np.pi / chain8.timestep
        shifted = []
        for form in ("exact", "cotangent"):
            h = build_hamiltonian(chain8, form)
            coefficients = (h.coefficients[0] + shift,) + h.coefficients[1:]
            shifted.append(h.model_copy(update={"coefficients": coefficients}))
        all_up = OntState(index=chain8.dimension - 1, num_spins=chain8.num_spins)
        check = check_orbit(orbit_of(all_up, chain8), *shifted)
        assert check.max_deviation < 1e-10
        assert check.form_deviation < 1e-10
        assert check.spectrum_deviation == pytest.approx(np.pi / (2 * chain8.timestep))
        assert not check.passed

    def test_tight_tolerance_fails(self, chain8):
        report = verify_bch(chain8, tolerance=1e-30)
        assert not report.passed
        assert report.failures > 0


class TestBellDemo:
    """Leading-order Hamiltonian acting on a down-spin pair."""

    def test_pair_state(self, chain12):
        state = bell_pair_state(chain12)
        assert state.label == "uuuuudduuuuu"

    def test_branches(self, chain12):
        result = bell_demo(chain12)
        assert result.even_site == 6 and result.odd_site == 7
        assert result.forward_branch.label == "uuuuduuduuuu"
        assert result.backward_branch.label == "uuuduuuuduuu"
        assert result.matches
        assert result.difference == SparseVector(
            {result.forward_branch.index: 1.0, result.backward_branch.index: -1.0}, 12)

    def test_hamiltonian_image(self, chain12):
        result = bell_demo(chain12)
        image = result.image
        assert len(image) == 3
        assert image.amplitude(result.initial.index) == pytest.approx(np.pi)
        assert image.amplitude(result.forward_branch.index) == pytest.approx(1j)
        assert image.amplitude(result.backward_branch.index) == pytest.approx(-1j)

    def test_matches_leading_order_polynomial(self, chain12):
        psi = QState.basis(bell_pair_state(chain12))
        direct = approx_hamiltonian_apply(psi, chain12)
        polynomial = apply_hamiltonian(build_hamiltonian(chain12, "leading_order"), psi)
        assert direct.distance(polynomial) < 1e-12

    def test_wraps_around(self, chain12):
        result = bell_demo(chain12, even_site=12)
        assert result.odd_site == 1
        assert result.matches

    def test_small_chain(self):
        with pytest.raises(DegenerateSizeError):
            bell_pair_state(ChainConfig(num_spins=6))


class TestEvolution:
    """Orbit-wise exponentials and detuned Hamiltonians."""

    def test_one_period_is_one_update(self, rng):
        config = ChainConfig(num_spins=10, timestep=0.3)
        h = build_hamiltonian(config)
        for index in rng.integers(0, config.dimension, size=20):
            state = QState.basis(OntState(index=int(index), num_spins=10))
            evolved = evolve(h, state, config.timestep)
            assert evolved.distance(apply_chain_update(state, config)) < 1e-10

    def test_superposition_and_full_cycle(self, chain8):
        h = build_hamiltonian(chain8)
        state = QState.from_branches([("uuuduuuu", 0.6), ("dduuuduu", 0.8j)])
        assert evolve(h, state, 0.0).distance(state) < 1e-12
        assert evolve(h, state, chain8.half * chain8.timestep).distance(state) < 1e-10

    def test_perturb_scaling(self, chain8):
        h = build_hamiltonian(chain8)
        scaled = perturb_hamiltonian(h, 0.1)
        assert scaled.form == "perturbed"
        np.testing.assert_allclose(scaled.coefficients, np.array(h.coefficients) * 1.1)

    def test_seeded_perturbation_stays_hermitian(self, chain8):
        h = perturb_hamiltonian(build_hamiltonian(chain8), 0.05, seed=7)
        matrix = dense_matrix(h)
        np.testing.assert_allclose(matrix, matrix.conj().T, atol=1e-12)
        state = QState.basis(bell_pair_state(chain8))
        assert evolve(h, state, 2.5).norm() == pytest.approx(1.0, abs=1e-12)

    def test_perturbation_scan(self, chain8):
        rows = perturbation_scan(chain8, [0.0, 0.01, 0.1])
        assert rows[0].fidelity == pytest.approx(1.0, abs=1e-12)
        assert rows[0].support_size == 1
        assert rows[1].fidelity < 1.0
        assert rows[2].fidelity < rows[1].fidelity
        assert rows[2].support_size == orbit_of(bell_pair_state(chain8), chain8).length
        assert all(row.norm == pytest.approx(1.0) for row in rows)
