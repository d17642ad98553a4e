"""Test angular-momentum coupling functions"""
import numpy as np
import pytest

from subreak import (InvalidArgumentError, clebsch_gordan,
                     coupled_zero_states, projection_grid,
                     staggered_elements, staggered_reduced_element)


@pytest.mark.parametrize("args, expected", [
    ((0.5, 0.5, 0.5, -0.5, 1, 0), 1 / np.sqrt(2)),
    ((0.5, 0.5, 0.5, -0.5, 0, 0), 1 / np.sqrt(2)),
    ((0.5, -0.5, 0.5, 0.5, 0, 0), -1 / np.sqrt(2)),
    ((1, 1, 1, -1, 2, 0), 1 / np.sqrt(6)),
    ((1, 0, 1, 0, 2, 0), np.sqrt(2 / 3)),
    ((1, 0, 1, 0, 1, 0), 0.0),
    ((1, 1, 1, -1, 1, 0), 1 / np.sqrt(2)),
    ((1, 1, 1, -1, 0, 0), 1 / np.sqrt(3)),
    ((1, 0, 1, 0, 0, 0), -1 / np.sqrt(3)),
    ((1.5, 1.5, 1, -1, 2.5, 0.5), np.sqrt(1 / 10)),
])
def test_clebsch_gordan_table(args, expected):
    np.testing.assert_allclose(clebsch_gordan(*args), expected, atol=1e-15)


def test_clebsch_gordan_selection_rules():
    assert clebsch_gordan(1, 1, 1, 0, 2, 0) == 0.0
    assert clebsch_gordan(1, 0, 1, 0, 3, 0) == 0.0
    assert clebsch_gordan(1, 2, 1, -2, 2, 0) == 0.0


def test_clebsch_gordan_rejects_non_half_integer():
    with pytest.raises(InvalidArgumentError):
        clebsch_gordan(0.3, 0.3, 1, 0, 1, 0.3)


def test_projection_grid():
    np.testing.assert_array_equal(projection_grid(1.5),
                                  [-1.5, -0.5, 0.5, 1.5])
    with pytest.raises(InvalidArgumentError):
        projection_grid(-1)


def test_coupled_zero_states_match_racah():
    s = 2
    m, coefficients = coupled_zero_states(s, 2 * s + 1)
    racah = np.array([[clebsch_gordan(s, mi, s, -mi, total, 0)
                       for total in range(2 * s + 1)] for mi in m])
    np.testing.assert_allclose(coefficients, racah, atol=1e-12)
    np.testing.assert_allclose(coefficients.T @ coefficients,
                               np.eye(2 * s + 1), atol=1e-12)


def test_coupled_zero_states_limits():
    with pytest.raises(InvalidArgumentError):
        coupled_zero_states(1, 4)
    m, coefficients = coupled_zero_states(0, 1)
    np.testing.assert_array_equal(m, [0.0])
    np.testing.assert_array_equal(coefficients, [[1.0]])


def test_staggered_elements_singlet_triplet():
    """(S_A^z - S_B^z) maps the two-spin singlet onto the m=0 triplet"""
    np.testing.assert_allclose(staggered_elements(0.5, 2), [1.0],
                               atol=1e-15)


@pytest.mark.parametrize("s", [2, 5, 64])
def test_staggered_elements_closed_form(s):
    elements = staggered_elements(s, 2 * s + 1)
    expected = staggered_reduced_element(s, np.arange(1, 2 * s + 1))
    np.testing.assert_allclose(np.abs(elements), expected, rtol=1e-10)
