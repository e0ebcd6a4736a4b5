import json

import numpy as np
import pytest

from harment import (
    EtaChainParams,
    NotPositive,
    NotSymmetric,
    TooLarge,
    build_coupling,
    build_eta_chain,
    coupling_from_json,
    coupling_to_json,
    dense_potential,
    spectral_eval,
    tensor_coupling,
)
from helpers import eta_dense_term_by_term, random_valid_spec


def test_identity_coupling_has_unit_spectrum():
    spec = build_coupling(1, (8,), {0: 1.0})
    assert np.allclose(spec.eigenvalues, 1.0)


def test_negative_total_weight_is_rejected():
    # theta = 0 eigenvalue is 2 - 3 = -1
    with pytest.raises(NotPositive):
        build_coupling(1, (8,), {0: 2.0, 1: -1.5})


def test_eta_chain_coefficients_match_stencil_expansion():
    spec = build_eta_chain(EtaChainParams(1.2, 64))
    assert spec.coefficient(0) == pytest.approx(7.76)
    assert spec.coefficient(1) == pytest.approx(-4.8)
    assert spec.coefficient(2) == pytest.approx(1.0)
    assert np.allclose(dense_potential(spec), eta_dense_term_by_term(1.2, 64), atol=1e-12)


def test_eta_zero_chain_coefficients():
    # N = 62 keeps the grid away from the zeros of (2 cos theta)^2 at pi/2;
    # a multiple of 4 hits them exactly and must be rejected
    spec = build_eta_chain(EtaChainParams(0.0, 62))
    assert spec.coefficient(0) == pytest.approx(2.0)
    assert spec.coefficient(1) == 0.0
    assert spec.coefficient(2) == pytest.approx(1.0)
    assert np.allclose(dense_potential(spec), eta_dense_term_by_term(0.0, 62), atol=1e-12)
    with pytest.raises(NotPositive):
        build_eta_chain(EtaChainParams(0.0, 64))


def test_eta_one_always_rejected_with_offending_mode():
    with pytest.raises(NotPositive) as info:
        build_eta_chain(EtaChainParams(1.0, 64))
    assert info.value.offending_index == 0
    assert info.value.eigenvalue == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("eta,n", [(0.6, 64), (1.2, 64), (0.3, 97)])
def test_eta_chain_spectrum_matches_closed_form(eta, n):
    spec = build_eta_chain(EtaChainParams(eta, n))
    theta = 2 * np.pi * np.arange(n) / n
    assert np.abs(spec.eigenvalues - (2 * eta - 2 * np.cos(theta)) ** 2).max() < 1e-12


def test_dense_potential_rows_are_cyclic_shifts():
    # V_0 = 2.5 keeps the spectrum positive where V_0 = 2 would have a zero mode
    spec = build_coupling(1, (4,), {0: 2.5, 1: -1.0})
    v = dense_potential(spec)
    assert np.allclose(v[0], [2.5, -1.0, 0.0, -1.0])
    for i in range(4):
        assert np.allclose(v[i], np.roll(v[0], i))


def test_dense_potential_matches_eigensolver():
    rng = np.random.default_rng(7)
    for _ in range(5):
        spec = random_valid_spec(rng, n_sites=48)
        dense = dense_potential(spec)
        assert np.allclose(dense, dense.T)
        assert np.allclose(
            np.sort(np.linalg.eigvalsh(dense)), np.sort(spec.eigenvalues), atol=1e-10
        )


def test_dense_potential_commutes_with_shift():
    spec = build_eta_chain(EtaChainParams(1.4, 32))
    v = dense_potential(spec)
    shift = np.roll(np.eye(32), 1, axis=0)
    assert np.abs(shift @ v - v @ shift).max() < 1e-12


def test_2d_nearest_neighbor_row_sums():
    coeffs = {(0, 0): 5.0, (1, 0): -1.0, (0, 1): -1.0}
    spec = build_coupling(2, (3, 3), coeffs)
    v = dense_potential(spec)
    assert v.shape == (9, 9)
    assert np.allclose(v.sum(axis=1), 1.0)


def test_conflicting_mirror_lags_rejected():
    with pytest.raises(NotSymmetric):
        build_coupling(1, (8,), {0: 3.0, 1: -1.0, -1: -0.5})


def test_wrapped_lags_are_canonicalized():
    a = build_coupling(1, (64,), {0: 3.0, 63: -0.5})
    b = build_coupling(1, (64,), {0: 3.0, 1: -0.5})
    assert a.coefficients == b.coefficients
    assert a.coupling_range == 2


def test_range_must_fit_under_extent():
    # the Nyquist lag N/2 of an even extent cannot be reached by any
    # finite-range coupling with 2R - 1 <= N
    with pytest.raises(ValueError):
        build_coupling(1, (8,), {0: 10.0, 4: 1.0})


def test_dense_cap_enforced():
    spec = build_eta_chain(EtaChainParams(1.2, 8192))
    with pytest.raises(TooLarge):
        dense_potential(spec)


def test_json_roundtrip_and_symmetry_completion():
    spec = build_eta_chain(EtaChainParams(1.2, 32))
    again = coupling_from_json(coupling_to_json(spec))
    assert again.coefficients == spec.coefficients
    assert np.allclose(again.eigenvalues, spec.eigenvalues)

    one_sided = json.dumps(
        {
            "dimension": 1,
            "extents": [32],
            "coefficients": [
                {"lag": [0], "value": 7.76},
                {"lag": [1], "value": -4.8},
                {"lag": [2], "value": 1.0},
            ],
        }
    )
    assert coupling_from_json(one_sided).coefficients == spec.coefficients


def test_tensor_coupling_spectrum_factorizes():
    a = build_eta_chain(EtaChainParams(1.2, 12))
    b = build_eta_chain(EtaChainParams(1.6, 10))
    ab = tensor_coupling(a, b)
    assert ab.dimension == 2
    assert ab.extents == (12, 10)
    assert np.allclose(ab.eigenvalues, np.outer(a.eigenvalues, b.eigenvalues), atol=1e-9)


def test_spectral_eval_on_2d_spec():
    coeffs = {(0, 0): 5.0, (1, 0): -1.0, (0, 1): -1.0}
    spec = build_coupling(2, (8, 8), coeffs)
    assert spectral_eval(spec, (0.0, 0.0)) == pytest.approx(1.0)
    assert spectral_eval(spec, (np.pi, np.pi)) == pytest.approx(9.0)
