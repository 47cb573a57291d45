"""Core types and error functionals."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import gokbounds as gb
from gokbounds import (
    BasisMap,
    DegenerateSpectrumError,
    DimensionMismatchError,
    EnergySpectrum,
    NonUnitaryError,
    UnistochasticMatrix,
    ValidationError,
    WeightShape,
    WeightVector,
    ensemble_energy,
    error_bundle,
    error_bundle_batch,
    observable_error_bound,
    rr_state_bounds,
    unistochastic_from_basis,
)
from gokbounds.sampler import jacobi_rotation, sample_orthogonal, sample_unitary

from conftest import random_pair


# ---------------------------------------------------------------- types

def test_energy_spectrum_must_ascend():
    with pytest.raises(DegenerateSpectrumError):
        EnergySpectrum(np.array([0.0, 0.0, 1.0]))
    with pytest.raises(DegenerateSpectrumError):
        EnergySpectrum(np.array([1.0, 0.0]))


def test_energy_spectrum_gaps_and_spread():
    E = EnergySpectrum(np.array([-1.0, 0.0, 2.0]))
    assert E.dim == 3
    assert E.spread == 3.0
    np.testing.assert_allclose(E.gaps, [1.0, 2.0])


def test_weight_vector_validation():
    with pytest.raises(ValidationError):
        WeightVector(np.array([0.3, 0.5, 0.2]))      # not descending
    with pytest.raises(ValidationError):
        WeightVector(np.array([0.6, 0.3]))           # sums to 0.9
    with pytest.raises(ValidationError):
        WeightVector(np.array([1.2, -0.2]))          # negative entry


def test_weight_vector_shape_classification():
    assert WeightVector(np.array([0.5, 0.3, 0.2])).shape is WeightShape.STRICT_FULL
    # a single trailing zero still descends strictly everywhere
    assert WeightVector(np.array([2, 1, 0]) / 3.0).shape is WeightShape.STRICT_FULL
    assert WeightVector(np.array([0.7, 0.3, 0.0, 0.0])).shape is WeightShape.STRICT_HEAD
    assert WeightVector(np.array([0.5, 0.5, 0.0])).shape is WeightShape.OTHER
    assert WeightVector(np.array([0.4, 0.3, 0.3])).shape is WeightShape.OTHER


def test_weight_vector_mu_and_K():
    w = WeightVector(np.array([0.5, 0.3, 0.2]))
    np.testing.assert_allclose(w.mu, [0.2, 0.1, 0.2])
    assert w.K == 3
    assert WeightVector(np.array([0.7, 0.3, 0.0, 0.0])).K == 2


def test_basis_map_rejects_non_unitary():
    with pytest.raises(NonUnitaryError):
        BasisMap(np.array([[1.0, 0.0], [1.0, 1.0]]))


def test_basis_map_modes():
    U = sample_orthogonal(3, rng_seed=7)
    assert U.mode == "orthogonal"
    V = sample_unitary(3, rng_seed=7)
    assert V.mode == "unitary"
    assert np.max(np.abs(V.matrix.conj().T @ V.matrix - np.eye(3))) < 1e-10


def test_unistochastic_row_and_column_sums():
    X = unistochastic_from_basis(sample_unitary(4, rng_seed=3))
    np.testing.assert_allclose(X.X.sum(axis=0), np.ones(4), atol=1e-12)
    np.testing.assert_allclose(X.X.sum(axis=1), np.ones(4), atol=1e-12)
    with pytest.raises(ValidationError):
        UnistochasticMatrix(np.array([[0.9, 0.0], [0.0, 0.9]]))


# ---------------------------------------------------------------- ensemble energy

def test_ensemble_energy_inner_product():
    assert ensemble_energy([0.5, 0.3, 0.2], [-1.0, 0.0, 2.0]) == pytest.approx(-0.1)
    with pytest.raises(DimensionMismatchError):
        ensemble_energy([0.5, 0.5], [-1.0, 0.0, 2.0])


# ---------------------------------------------------------------- error bundles

def test_identity_map_gives_zero_errors():
    b = error_bundle(np.eye(3), [0.5, 0.3, 0.2], [-1.0, 0.0, 2.0])
    assert b.delta_E_w == 0.0
    assert b.delta_rho_w == 0.0
    assert np.all(b.delta_psi == 0.0)
    assert np.all(b.delta_E_k == 0.0)


def test_adjacent_swap_costs_t_k():
    """Swapping states k and k+1 costs exactly (w_k - w_{k+1})(E_{k+1} - E_k)."""
    w = np.array([0.5, 0.3, 0.2])
    E = np.array([-1.0, 0.0, 2.0])
    P = np.eye(3)[[1, 0, 2]]
    b = error_bundle(P, w, E)
    assert b.delta_E_w == pytest.approx((0.5 - 0.3) * (0.0 - (-1.0)))
    assert b.delta_psi[0] == 1.0 and b.delta_psi[2] == 0.0


def test_two_level_rotation_closed_form():
    theta = 0.37
    w = np.array([0.8, 0.2])
    E = np.array([0.0, 1.0])
    b = error_bundle(jacobi_rotation(2, 0, 1, theta), w, E)
    s2 = np.sin(theta) ** 2
    assert b.delta_E_w == pytest.approx(s2 * (0.8 - 0.2) * 1.0, abs=1e-14)
    assert b.delta_psi[0] == pytest.approx(s2, abs=1e-14)


def test_green_box_degenerate_weights_hide_the_error():
    """Mixing the two equal-weight states moves the basis without moving
    the ensemble energy or the ensemble state."""
    w = np.array([0.5, 0.5, 0.0])
    E = np.array([-1.0, 0.0, 1.0])
    b = error_bundle(jacobi_rotation(3, 0, 1, np.pi / 4), w, E)
    assert b.delta_E_w == pytest.approx(0.0, abs=1e-14)
    assert b.delta_rho_w == pytest.approx(0.0, abs=1e-14)
    assert b.delta_psi[0] == pytest.approx(0.5, abs=1e-14)


def test_linear_form_consistency(rng):
    """w.(E~ - E) and (w~ - w).E are the same number."""
    for D in (3, 4, 5):
        w, E = random_pair(rng, D)
        for trial in range(50):
            U = sample_orthogonal(D, rng_seed=1000 * D + trial)
            X = unistochastic_from_basis(U)
            b = error_bundle(X, w, E)
            other = float((X.w_tilde(w) - w.weights) @ E.values)
            assert abs(b.delta_E_w - other) < 1e-10


def test_batch_matches_scalar_route(rng):
    w, E = random_pair(rng, 4)
    Us = [sample_orthogonal(4, rng_seed=i).matrix for i in range(20)]
    X = np.abs(np.stack(Us)) ** 2
    batch = error_bundle_batch(X, w, E)
    for i in range(20):
        b = error_bundle(Us[i], w, E)
        assert batch["delta_E_w"][i] == pytest.approx(b.delta_E_w, abs=1e-14)
        assert batch["delta_rho_w"][i] == pytest.approx(b.delta_rho_w, abs=1e-14)
        np.testing.assert_allclose(batch["delta_psi"][i], b.delta_psi, atol=1e-14)
        np.testing.assert_allclose(batch["delta_E_k"][i], b.delta_E_k, atol=1e-14)


@given(seed=st.integers(min_value=0, max_value=10 ** 6),
       D=st.sampled_from([3, 4, 5]))
@settings(max_examples=60, deadline=None)
def test_bundle_invariants_random_orthogonal(seed, D):
    """Positivity of the ensemble error, Ky Fan partial sums, state-error
    range, and the ensemble-state error window, on arbitrary draws."""
    gen = np.random.default_rng(seed + 17)
    w, E = random_pair(gen, D, mu_lo=0.01, gap_lo=0.05)
    b = error_bundle(sample_orthogonal(D, rng_seed=seed), w, E)
    assert b.delta_E_w >= -1e-12
    assert np.all(b.kyfan_partials >= -1e-12)
    assert abs(b.kyfan_partials[-1]) < 1e-10
    assert np.all(b.delta_psi >= -1e-14) and np.all(b.delta_psi <= 1 + 1e-14)
    ww = float(w.weights @ w.weights)
    assert -1e-14 <= b.delta_rho_w <= 2.0 * ww + 1e-14


def test_permutation_maps_give_binary_state_errors(rng):
    w, E = random_pair(rng, 4)
    perms = [np.eye(4)[list(p)] for p in
             ([1, 0, 2, 3], [3, 2, 1, 0], [1, 2, 3, 0], [0, 2, 1, 3])]
    for P in perms:
        b = error_bundle(P, w, E)
        assert np.all(np.isin(b.delta_psi, (0.0, 1.0)))


def test_unitary_mode_bundles_share_invariants(rng):
    w, E = random_pair(rng, 3)
    for trial in range(30):
        b = error_bundle(sample_unitary(3, rng_seed=trial), w, E)
        assert b.delta_E_w >= -1e-12
        assert np.all(b.kyfan_partials >= -1e-12)


def test_sum_columns_restrict_to_the_targeted_head():
    w = np.array([0.7, 0.3, 0.0, 0.0])
    E = np.array([-1.0, 0.0, 2.0, 5.0])
    b = error_bundle(sample_orthogonal(4, rng_seed=11), w, E)
    assert b.sum_psi_K == pytest.approx(float(b.delta_psi[:2].sum()), abs=1e-14)
    assert b.sum_abs_E_K == pytest.approx(float(np.abs(b.delta_E_k[:2]).sum()), abs=1e-14)


# ---------------------------------------------------------------- scalar bounds

def test_rr_state_bounds_examples():
    qm, qp = rr_state_bounds([-1.0, 0.0, 2.0])
    assert qm == pytest.approx(1.0 / 3.0)
    assert qp == pytest.approx(1.0)
    assert rr_state_bounds([0.0, 1.0]) == pytest.approx((1.0, 1.0))
    qm, qp = rr_state_bounds([-1.13483, -0.48575, 0.48575, 1.13483])
    assert qp == pytest.approx(1.0 / 0.64908)


def test_observable_error_bound():
    assert observable_error_bound(1.0, 0.4, 0.0) == 0.0
    assert observable_error_bound(1.0, 0.4, 0.1) == pytest.approx(0.2)
    assert observable_error_bound(2.0, 0.4, 0.1) == pytest.approx(0.4)
    with pytest.raises(ValidationError):
        observable_error_bound(-1.0, 0.4, 0.1)
