import numpy as np
import pytest

from harment import (
    EtaChainParams,
    IllConditionedRoots,
    build_coupling,
    build_eta_chain,
    classify,
    regular_part_eval,
    spectral_eval,
    szego_coefficients,
    szego_lower_bound,
)
from helpers import random_valid_spec


def spec_from_polynomial_roots(angles_with_multiplicity, n_sites=64, ridge=0.0):
    """Coupling whose symbol is |prod (z - e^{ia})^m|^2 (plus optional ridge)."""
    h = np.array([1.0 + 0.0j])
    for angle, mult in angles_with_multiplicity:
        for _ in range(mult):
            h = np.convolve(h, [1.0, -np.exp(1j * angle)])
            h = np.convolve(h, [1.0, -np.exp(-1j * angle)])
    h = h.real
    auto = np.correlate(h, h, mode="full")
    deg = len(h) - 1
    coeffs = {k - deg: auto[k] for k in range(len(auto))}
    coeffs[0] += ridge
    return build_coupling(1, (n_sites,), coeffs)


class TestSpectralEval:
    def test_eta_chain_at_zero(self):
        spec = build_eta_chain(EtaChainParams(1.2, 64))
        assert spectral_eval(spec, 0.0) == pytest.approx(0.16, abs=1e-12)

    def test_constant_symbol(self):
        spec = build_coupling(1, (16,), {0: 3.7})
        theta = np.linspace(0, 2 * np.pi, 50)
        assert np.allclose(spectral_eval(spec, theta), 3.7)

    def test_four_point_grid_against_dense_eigensolver(self):
        spec = build_eta_chain(EtaChainParams(1.2, 64))
        angles = np.array([np.pi / 2, np.pi, 3 * np.pi / 2, 2 * np.pi])
        values = spectral_eval(spec, angles)
        assert np.allclose(values, [5.76, 19.36, 5.76, 0.16], atol=1e-12)
        # same numbers are the eigenvalues of the 4-site circulant with the
        # range-3 coefficients wrapped onto lag 2 = -2
        dense4 = np.array(
            [[7.76, -4.8, 2.0, -4.8],
             [-4.8, 7.76, -4.8, 2.0],
             [2.0, -4.8, 7.76, -4.8],
             [-4.8, 2.0, -4.8, 7.76]]
        )
        assert np.allclose(np.sort(np.linalg.eigvalsh(dense4)), np.sort(values), atol=1e-10)


class TestClassify:
    def test_regular_chain(self):
        out = classify(build_eta_chain(EtaChainParams(1.2, 64)))
        assert out.kind == "Regular"
        assert out.roots == ()
        assert out.widom_coefficient == 0.0

    def test_singular_chain_roots_and_widom(self):
        out = classify(build_eta_chain(EtaChainParams(0.6, 64)))
        assert out.kind == "Singular"
        theta0 = np.arccos(0.6)
        assert len(out.roots) == 2
        assert out.roots[0].angle == pytest.approx(theta0, abs=1e-9)
        assert out.roots[1].angle == pytest.approx(2 * np.pi - theta0, abs=1e-9)
        assert all(r.multiplicity == 1 for r in out.roots)
        assert out.widom_coefficient == pytest.approx(0.5)

    def test_constant_symbol_is_regular(self):
        assert classify(build_coupling(1, (16,), {0: 2.0})).kind == "Regular"

    @pytest.mark.parametrize("eta", [round(0.1 * k, 1) for k in list(range(1, 10)) + list(range(11, 21))])
    def test_singular_iff_eta_below_one(self, eta):
        n = 64 if eta not in (0.0,) else 62
        try:
            spec = build_eta_chain(EtaChainParams(eta, n))
        except Exception:
            spec = build_eta_chain(EtaChainParams(eta, 66))
        out = classify(spec)
        assert (out.kind == "Singular") == (eta < 1.0)

    def test_double_root_multiplicity(self):
        spec = spec_from_polynomial_roots([(1.0, 2)], n_sites=64)
        out = classify(spec)
        assert out.kind == "Singular"
        assert len(out.roots) == 2
        assert {r.multiplicity for r in out.roots} == {2}
        assert out.roots[0].angle == pytest.approx(1.0, abs=1e-7)
        assert out.widom_coefficient == pytest.approx(2.0)

    def test_near_zero_minimum_stays_regular(self):
        # ridge lifts the zeros well above the acceptance threshold
        spec = spec_from_polynomial_roots([(1.0, 1)], n_sites=64, ridge=0.1)
        assert classify(spec).kind == "Regular"

    def test_too_close_roots_raise(self):
        spec = spec_from_polynomial_roots([(1.0, 1), (1.0 + 5e-5, 1)], n_sites=256)
        with pytest.raises(IllConditionedRoots):
            classify(spec)


class TestRegularPart:
    def test_regular_spec_regular_part_is_lambda(self):
        spec = build_eta_chain(EtaChainParams(1.3, 64))
        out = classify(spec)
        theta = np.linspace(0, 2 * np.pi, 257)
        assert np.allclose(regular_part_eval(spec, out, theta), spectral_eval(spec, theta))

    def test_eta_chain_regular_part_is_one(self):
        # lambda = prod_r (2 - 2cos(theta - a_r)) exactly, so lambda_0 = 1
        spec = build_eta_chain(EtaChainParams(0.6, 64))
        out = classify(spec)
        assert regular_part_eval(spec, out, 0.0) == pytest.approx(1.0, abs=1e-9)
        theta = np.linspace(0, 2 * np.pi, 101)
        assert np.allclose(regular_part_eval(spec, out, theta), 1.0, atol=1e-9)

    def test_reconstruction_identity(self):
        rng = np.random.default_rng(3)
        specs = [
            build_eta_chain(EtaChainParams(0.6, 64)),
            build_eta_chain(EtaChainParams(0.2, 64)),
            spec_from_polynomial_roots([(1.0, 2)], n_sites=64),
            random_valid_spec(rng, n_sites=64),
        ]
        theta = np.linspace(0, 2 * np.pi, 1024, endpoint=False)
        for spec in specs:
            out = classify(spec)
            product = regular_part_eval(spec, out, theta)
            for root in out.roots:
                product = product * (2 - 2 * np.cos(theta - root.angle)) ** root.multiplicity
            lam = spectral_eval(spec, theta)
            scale = np.abs(lam).max()
            assert np.abs(product - lam).max() < 1e-8 * scale

    def test_regular_part_positive_on_grid(self):
        theta = np.linspace(0, 2 * np.pi, 1024, endpoint=False)
        for eta in (0.2, 0.6, 1.2):
            spec = build_eta_chain(EtaChainParams(eta, 64))
            assert np.all(regular_part_eval(spec, classify(spec), theta) > 0)


class TestSzego:
    def test_constant_symbol_coefficients(self):
        omega_sq = 2.25
        spec = build_coupling(1, (16,), {0: omega_sq})
        coeffs = szego_coefficients(spec, 50)
        assert coeffs.values[0] == pytest.approx(np.log(np.sqrt(omega_sq)), abs=1e-12)
        assert np.abs(coeffs.values[1:]).max() < 1e-14
        assert szego_lower_bound(coeffs) == pytest.approx(0.0, abs=1e-12)

    def test_eta_chain_closed_form(self):
        eta = 1.2
        spec = build_eta_chain(EtaChainParams(eta, 64))
        k_max = 200
        coeffs = szego_coefficients(spec, k_max)
        r = eta - np.sqrt(eta**2 - 1)
        assert coeffs.values[0] == pytest.approx(np.log(eta + np.sqrt(eta**2 - 1)), abs=1e-10)
        ks = np.arange(1, k_max + 1)
        expected = -(r**ks) / ks
        assert np.abs(coeffs.values[1:] - expected).max() < 1e-10
        assert not coeffs.from_singular_symbol

    def test_coefficients_are_even_in_k(self):
        # direct check of c_k = c_{-k} from the full-spectrum transform
        spec = build_eta_chain(EtaChainParams(1.2, 64))
        m = 4096
        grid = 2 * np.pi * np.arange(m) / m
        g = 0.5 * np.log(spectral_eval(spec, grid))
        full = np.fft.fft(g) / m
        assert np.abs(full.imag).max() < 1e-12
        assert np.abs(full[1:32] - full[-1:-32:-1]).max() < 1e-12

    def test_lower_bound_closed_form_and_monotone(self):
        eta = 1.2
        spec = build_eta_chain(EtaChainParams(eta, 64))
        r = eta - np.sqrt(eta**2 - 1)
        target = -np.log(1 - r**2)
        assert szego_lower_bound(szego_coefficients(spec, 200)) == pytest.approx(target, abs=1e-10)
        bounds = [szego_lower_bound(szego_coefficients(spec, k)) for k in (5, 10, 20, 40, 80)]
        assert all(b2 >= b1 for b1, b2 in zip(bounds, bounds[1:]))

    def test_geometric_decay_of_regular_coefficients(self):
        spec = build_eta_chain(EtaChainParams(1.2, 64))
        k_max = 40
        coeffs = szego_coefficients(spec, k_max)
        ks = np.arange(k_max // 4, k_max + 1)
        logs = np.log(np.abs(coeffs.values[ks]))
        fit = np.polyfit(ks, logs, 1)
        resid = logs - np.polyval(fit, ks)
        r2 = 1 - resid.var() / logs.var()
        assert r2 > 0.99
        assert coeffs.decay_rate < 1.0
        assert coeffs.tail_estimate < 1e-8

    def test_singular_symbol_flagged(self):
        coeffs = szego_coefficients(build_eta_chain(EtaChainParams(0.6, 64)), 50)
        assert coeffs.from_singular_symbol
        assert coeffs.tail_estimate == np.inf
