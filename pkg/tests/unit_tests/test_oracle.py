"""Test the full-Hilbert-space reference"""
import numpy as np
import pytest

from subreak import (InvalidArgumentError, OracleReport, build_full_system,
                     build_lieb_mattis_model, full_evolution_check,
                     oracle_check, sector_basis, sector_projector,
                     spin_dot, symmetric_ground_state,
                     thin_sector_projection)


@pytest.fixture(scope='module')
def system_8():
    return build_full_system(8)


def test_two_spin_singlet():
    system = build_full_system(2)
    values, vectors = system.lowest_states(2)
    assert values[0] == pytest.approx(-0.75)
    singlet = vectors[:, 0]
    assert singlet[1] == pytest.approx(-singlet[2])
    assert abs(singlet[1]) == pytest.approx(1 / np.sqrt(2))
    np.testing.assert_allclose(singlet[[0, 3]], 0.0, atol=1e-14)


def test_spin_dot_of_one_site():
    operator = spin_dot(2, [0], [0]).toarray()
    np.testing.assert_allclose(operator, 0.75 * np.eye(4), atol=1e-15)


def test_four_spin_ground_energy():
    values, _ = build_full_system(4).lowest_states(1)
    assert values[0] == pytest.approx(-1.0)


def test_staggered_field_orders_ground_state():
    system = build_full_system(4, field_b=0.5)
    _, vectors = system.lowest_states(1)
    ground = vectors[:, 0]
    assert np.sum(system.staggered_diagonal * ground ** 2) < 0


def test_symmetries(system_8):
    assert system_8.commutator_norm() < 1e-12
    values, vectors = system_8.lowest_states(2)
    assert values[1] - values[0] == pytest.approx(0.25)
    assert system_8.total_spin_squared(vectors[:, 0]) == \
        pytest.approx(0.0, abs=1e-10)


@pytest.mark.parametrize("n_spins", [3, 0, 14])
def test_build_preconditions(n_spins):
    with pytest.raises(InvalidArgumentError):
        build_full_system(n_spins)


def test_sector_basis_is_orthonormal(system_8):
    basis = sector_basis(8)
    assert basis.shape == (256, 5)
    np.testing.assert_allclose(basis.T @ basis, np.eye(5), atol=1e-12)
    projector = sector_projector(system_8)
    np.testing.assert_allclose(projector @ projector, projector, atol=1e-12)
    with pytest.raises(InvalidArgumentError):
        sector_basis(6)
    with pytest.raises(InvalidArgumentError):
        sector_basis(8, 6)


def test_four_spin_tower():
    model = thin_sector_projection(build_full_system(4))
    np.testing.assert_allclose(model.energies, [0.0, 0.5, 1.5], atol=1e-12)


def test_projection_matches_reduced_model(system_8):
    projected = thin_sector_projection(system_8)
    reduced = build_lieb_mattis_model(8, 5)
    np.testing.assert_allclose(projected.energies, reduced.energies,
                               atol=1e-10)
    np.testing.assert_allclose(projected.order_param, reduced.order_param,
                               atol=1e-10)


def test_projection_needs_zero_field():
    with pytest.raises(InvalidArgumentError):
        thin_sector_projection(build_full_system(4, field_b=0.1))


def test_evolution_without_field_is_stationary(system_8):
    model = thin_sector_projection(system_8)
    deviation = full_evolution_check(system_8, model, 0.0,
                                     np.linspace(0, 10, 11),
                                     symmetric_ground_state(model))
    assert deviation < 1e-10


def test_evolution_matches_thin_model(system_8):
    model = thin_sector_projection(system_8)
    t_grid = np.linspace(0, 2 / (8 * 1e-2), 21)
    initial = np.zeros(5)
    initial[[0, 1]] = 1 / np.sqrt(2)
    deviation = full_evolution_check(system_8, model, 1e-2, t_grid, initial)
    assert deviation < 1e-6


def test_evolution_accepts_full_vector(system_8):
    model = thin_sector_projection(system_8)
    full = sector_basis(8) @ np.eye(5)[1]
    deviation = full_evolution_check(system_8, model, 1e-2,
                                     np.linspace(0, 5, 6), full)
    assert deviation < 1e-6


def test_evolution_rejects_states_outside_sector(system_8):
    model = thin_sector_projection(system_8)
    outside = np.zeros(256)
    outside[0] = 1.0
    with pytest.raises(InvalidArgumentError):
        full_evolution_check(system_8, model, 1e-2, [0.0, 1.0], outside)
    with pytest.raises(InvalidArgumentError):
        full_evolution_check(system_8, model, 1e-2, [0.0, 1.0], np.ones(7))


def test_oracle_check():
    report = oracle_check(8, 1e-3)
    assert isinstance(report, OracleReport)
    assert report.energy_max_error < 1e-10
    assert report.order_max_error < 1e-10
    assert report.trajectory_max_deviation < 1e-6
    assert report.commutator_norm < 1e-12
    assert report.singlet_gap > 0
    assert report.ground_state_total_spin == pytest.approx(0.0, abs=1e-10)
    assert list(report.as_row())[0] == 'n_spins'


@pytest.mark.slow
def test_oracle_check_twelve_spins():
    small = oracle_check(8, 1e-3)
    large = oracle_check(12, 1e-3)
    assert large.energy_max_error < 1e-10
    assert large.order_max_error < 1e-10
    assert large.trajectory_max_deviation <= \
        small.trajectory_max_deviation + 1e-9
