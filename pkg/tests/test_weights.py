"""Optimal weight generators and the grid-search oracle."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gokbounds import (
    RangeError,
    ValidationError,
    WeightShape,
    eigenenergy_prefactors,
    eigenenergy_sum_prefactors,
    eigenstate_prefactor,
    eigenstate_sum_prefactors,
    grid_search_optimal,
    optimal_weights_all_energies,
    optimal_weights_all_states,
    optimal_weights_lowest_K_energies,
    optimal_weights_lowest_K_states,
    optimal_weights_single_energy,
    optimal_weights_single_state,
)


# ---------------------------------------------------------------- closed forms

def test_single_energy_profiles():
    np.testing.assert_allclose(optimal_weights_single_energy(0, 3).weights, (1, 0, 0))
    np.testing.assert_allclose(
        optimal_weights_single_energy(1, 4).weights, (2 / 3, 1 / 3, 0, 0))
    with pytest.raises(RangeError):
        optimal_weights_single_energy(3, 4)
    with pytest.raises(RangeError):
        optimal_weights_single_energy(-1, 4)


def test_single_energy_bound_is_odd_integer():
    for k, D in ((0, 3), (1, 5), (2, 6)):
        w = optimal_weights_single_energy(k, D)
        _, cp = eigenenergy_prefactors(k, w)
        assert cp == pytest.approx(2 * k + 1, rel=1e-12)


def test_all_energies_profiles():
    np.testing.assert_allclose(
        optimal_weights_all_energies(4).weights, (1 / 2, 1 / 3, 1 / 6, 0))
    np.testing.assert_allclose(optimal_weights_all_energies(2).weights, (1, 0))
    _, up = eigenenergy_sum_prefactors(optimal_weights_all_energies(4))
    assert up == pytest.approx(12.0, rel=1e-12)
    with pytest.raises(RangeError):
        optimal_weights_all_energies(1)


def test_lowest_K_energies_profiles():
    np.testing.assert_allclose(
        optimal_weights_lowest_K_energies(2, 5).weights, (0.75, 0.25, 0, 0, 0))
    np.testing.assert_allclose(
        optimal_weights_lowest_K_energies(1, 4).weights, (1, 0, 0, 0))
    _, up = eigenenergy_sum_prefactors(optimal_weights_lowest_K_energies(3, 5))
    assert up == pytest.approx(9.0, rel=1e-12)
    with pytest.raises(RangeError):
        optimal_weights_lowest_K_energies(4, 5)


def test_single_state_profiles():
    # symmetric gaps collapse onto the energy-blind profile
    w = optimal_weights_single_state(1, (0.0, 1.0, 2.0, 3.0))
    np.testing.assert_allclose(w.weights, (2 / 3, 1 / 3, 0, 0))
    w = optimal_weights_single_state(1, (-1.0, 0.0, 2.0))
    np.testing.assert_allclose(w.weights, (0.75, 0.25, 0))
    np.testing.assert_allclose(
        optimal_weights_single_state(0, (-1.0, 0.0, 2.0)).weights, (1, 0, 0))
    with pytest.raises(RangeError):
        optimal_weights_single_state(3, (-1.0, 0.0, 2.0, 5.0))


def test_single_state_bound_value():
    E = (-1.0, 0.0, 2.0, 5.0)
    k = 2
    r_minus, r_plus = 1.0 / 2.0, 1.0 / 3.0
    w = optimal_weights_single_state(k, E)
    b = eigenstate_prefactor(k, w, E)
    assert b == pytest.approx(k * (r_minus + r_plus) + r_plus, rel=1e-12)


def test_all_states_profiles():
    w = optimal_weights_all_states((-1.0, 0.0, 2.0))
    np.testing.assert_allclose(w.weights, (0.75, 0.25, 0))
    # equidistant spectrum reproduces the equal-gap energy optimum
    w = optimal_weights_all_states((0.0, 1.0, 2.0, 3.0))
    np.testing.assert_allclose(w.weights, optimal_weights_all_energies(4).weights)
    np.testing.assert_allclose(optimal_weights_all_states((0.0, 1.0)).weights, (1, 0))


def test_lowest_K_states_profiles():
    w = optimal_weights_lowest_K_states(2, (-1.0, 0.0, 2.0, 5.0, 8.0))
    raw = np.array([1.0 + 0.25, 0.25, 0.0, 0.0, 0.0])
    np.testing.assert_allclose(w.weights, raw / raw.sum())
    np.testing.assert_allclose(
        optimal_weights_lowest_K_states(1, (-1.0, 0.0, 2.0, 5.0)).weights, (1, 0, 0, 0))
    with pytest.raises(RangeError):
        optimal_weights_lowest_K_states(4, (-1.0, 0.0, 2.0, 5.0, 8.0))


def test_generators_emit_valid_shapes():
    assert optimal_weights_all_energies(5).shape is WeightShape.STRICT_FULL
    assert optimal_weights_lowest_K_energies(2, 5).shape is WeightShape.STRICT_HEAD
    assert optimal_weights_single_energy(1, 5).shape is WeightShape.STRICT_HEAD
    assert optimal_weights_all_states((-1.0, 0.0, 2.0, 5.0)).shape is WeightShape.STRICT_FULL


@given(lam=st.floats(min_value=0.05, max_value=50.0))
@settings(max_examples=30, deadline=None)
def test_state_generators_energy_scale_free(lam):
    E = np.array([-1.0, 0.0, 2.0, 5.0])
    w1 = optimal_weights_all_states(E)
    w2 = optimal_weights_all_states(E * lam)
    np.testing.assert_allclose(w1.weights, w2.weights, atol=1e-12)
    v1 = optimal_weights_single_state(1, E)
    v2 = optimal_weights_single_state(1, E * lam)
    np.testing.assert_allclose(v1.weights, v2.weights, atol=1e-12)


# ---------------------------------------------------------------- grid oracle

def test_grid_matches_equal_gap_optimum_d3():
    w, bound = grid_search_optimal("sumE_all", 3, resolution=1e-3)
    np.testing.assert_allclose(w.weights, (2 / 3, 1 / 3, 0), atol=2e-3)
    assert bound == pytest.approx(6.0, rel=0.01)


def test_grid_single_energy_ground_state_is_trivial():
    w, bound = grid_search_optimal("E_k", 3, k=0, resolution=2e-3)
    np.testing.assert_allclose(w.weights, (1, 0, 0), atol=4e-3)
    assert bound == pytest.approx(1.0, rel=0.01)


def test_grid_agrees_with_state_closed_form():
    E = (0.0, 1.0, 2.0)
    w, bound = grid_search_optimal("sumPsi_all", 3, E=E, resolution=2e-3)
    ref = optimal_weights_all_states(E)
    np.testing.assert_allclose(w.weights, ref.weights, atol=4e-3)
    _, up = eigenstate_sum_prefactors(ref, E)
    assert bound == pytest.approx(up, rel=0.01)


def test_grid_rejects_bad_quantity():
    with pytest.raises(ValidationError):
        grid_search_optimal("nonsense", 3)
    with pytest.raises(ValidationError):
        grid_search_optimal("sumE_K", 4)          # K missing
    with pytest.raises(RangeError):
        grid_search_optimal("sumE_all", 3, resolution=-1.0)
