import math

import numpy as np
import pytest

from siegel_kernel_lab import arithmetic as ar
from siegel_kernel_lab import matkit
from siegel_kernel_lab.errors import DimensionError, NotPositiveDefiniteError, NotSymplecticError
from siegel_kernel_lab.siegel import (
    SiegelPoint,
    SymplecticReal,
    act,
    automorphy_det,
    cross_ratio,
    det_real,
    distance,
    identity_residual,
    petersson_factor,
    petersson_kernel_norm,
    random_point,
    sigma_normalizer,
    spectrum,
    standard_form,
    volume_density,
)
from siegel_kernel_lab.verify import random_word_elements

E2 = math.exp(2.0)


def random_real_symplectic(rng, g):
    a = rng.normal(size=(g, g)) + 2 * np.eye(g)
    s = rng.normal(size=(g, g))
    s = (s + s.T) / 2
    t = rng.normal(size=(g, g)) * 0.3
    t = (t + t.T) / 2
    eye, zero = np.eye(g), np.zeros((g, g))
    m = np.block([[a, zero], [zero, np.linalg.inv(a).T]])
    m = m @ np.block([[eye, s], [zero, eye]]) @ np.block([[eye, zero], [t, eye]])
    return SymplecticReal(m)


class TestSiegelPoint:
    def test_repairs_small_asymmetry(self):
        y = np.array([[1.0, 1e-12], [0.0, 1.0]])
        z = SiegelPoint(np.zeros((2, 2)), y)
        assert np.array_equal(z.Y, z.Y.T)

    def test_rejects_large_asymmetry(self):
        with pytest.raises(DimensionError):
            SiegelPoint(np.array([[0.0, 1.0], [0.0, 0.0]]), np.eye(2))

    def test_rejects_indefinite(self):
        with pytest.raises(NotPositiveDefiniteError):
            SiegelPoint(np.zeros((2, 2)), np.diag([1.0, -1.0]))

    def test_immutable(self):
        z = SiegelPoint.scalar(1.0)
        with pytest.raises(ValueError):
            z.Y[0, 0] = 3.0


class TestAction:
    def test_translation(self):
        z = SiegelPoint(np.array([[0.1, 0.0], [0.0, 0.2]]), np.eye(2))
        s = np.array([[1, 2], [2, -1]])
        gz = act(ar.translation(s), z)
        assert np.allclose(gz.Z, z.Z + s)

    def test_inversion_fixes_i(self):
        z = SiegelPoint.scalar(1.0)
        assert act(ar.inversion(2), z).allclose(z)

    def test_determinant_transformation(self, rng):
        for _ in range(50):
            gamma = random_real_symplectic(rng, 3)
            z = random_point(3, rng)
            gz = act(gamma, z)
            want = det_real(z.Y) / abs(automorphy_det(gamma, z)) ** 2
            assert abs(det_real(gz.Y) - want) <= 1e-9 * want
            assert np.all(matkit.eigen_sym(gz.Y)[0] > 0)

    def test_genus_mismatch(self):
        with pytest.raises(DimensionError):
            act(ar.inversion(3), SiegelPoint.scalar(1.0))

    def test_real_symplectic_check(self):
        with pytest.raises(NotSymplecticError):
            SymplecticReal(np.diag([2.0, 1.0, 1.0, 1.0]))
        SymplecticReal(standard_form(2))


class TestSigma:
    def test_identity_at_i(self):
        sigma = sigma_normalizer(SiegelPoint.scalar(1.0))
        assert np.allclose(sigma.matrix, np.eye(4))

    def test_unit_imaginary_part(self):
        x = np.array([[0.3, -0.1], [-0.1, 0.2]])
        sigma = sigma_normalizer(SiegelPoint(x, np.eye(2)))
        want = np.block([[np.eye(2), -x], [np.zeros((2, 2)), np.eye(2)]])
        assert np.allclose(sigma.matrix, want)

    def test_maps_to_i(self, rng):
        for _ in range(50):
            z = random_point(3, rng)
            sz = act(sigma_normalizer(z), z)
            assert np.abs(sz.Z - 1j * np.eye(3)).max() < 1e-9


class TestCrossRatio:
    def test_coincident(self):
        z = SiegelPoint.scalar(1.0)
        assert np.allclose(cross_ratio(z, z), 0.0)

    def test_scalar_pair(self):
        rho = cross_ratio(SiegelPoint.scalar(1.0), SiegelPoint.scalar(2.0))
        assert np.allclose(rho, np.eye(2) / 9)

    def test_spectrum_diagonal(self):
        spec = spectrum(SiegelPoint.scalar(1.0), SiegelPoint.scalar(E2))
        assert np.allclose(spec.rho, math.tanh(1.0) ** 2)
        assert np.allclose(spec.radii, 1.0)

    def test_spectrum_in_unit_interval(self, rng):
        for _ in range(1000):
            spec = spectrum(random_point(2, rng), random_point(2, rng))
            assert np.all(spec.rho >= 0) and np.all(spec.rho < 1)

    def test_spectrum_invariance(self, rng):
        for gamma in random_word_elements(2, 30, rng):
            z, w = random_point(2, rng), random_point(2, rng)
            a = spectrum(z, w).rho
            b = spectrum(act(gamma, z), act(gamma, w)).rho
            assert np.abs(a - b).max() < 1e-8

    def test_cayley_cross_check(self, rng):
        # After sigma sends Z to i*Id the spectrum is |Cayley(sigma W)|^2.
        for _ in range(20):
            z, w = random_point(3, rng), random_point(3, rng)
            sw = act(sigma_normalizer(z), w).Z
            c = (sw - 1j * np.eye(3)) @ np.linalg.inv(sw + 1j * np.eye(3))
            sv = np.sort(np.linalg.svd(c, compute_uv=False) ** 2)
            assert np.allclose(spectrum(z, w).rho, sv, atol=1e-9)


class TestDistance:
    def test_zero(self):
        z = SiegelPoint.scalar(1.5)
        assert distance(z, z) == 0.0

    def test_diagonal_case(self):
        assert distance(SiegelPoint.scalar(1.0), SiegelPoint.scalar(E2)) == pytest.approx(4.0, abs=1e-12)

    def test_log_form_agrees(self, rng):
        z, w = random_point(2, rng), random_point(2, rng)
        s = np.sqrt(spectrum(z, w).rho)
        log_form = math.sqrt(2) * math.sqrt(np.sum(np.log((1 + s) / (1 - s)) ** 2))
        assert distance(z, w) == pytest.approx(log_form, rel=1e-12)

    def test_invariance_under_inversion(self):
        z, w = SiegelPoint.scalar(1.0), SiegelPoint.scalar(2.0)
        j = ar.inversion(2)
        assert abs(distance(act(j, z), act(j, w)) - distance(z, w)) < 1e-9

    def test_metric_properties(self, rng):
        for _ in range(200):
            z, w, p = (random_point(2, rng) for _ in range(3))
            d = distance(z, w)
            assert abs(d - distance(w, z)) < 1e-10
            assert d <= distance(z, p) + distance(p, w) + 1e-8

    def test_invariance_real_symplectic(self, rng):
        for _ in range(30):
            gamma = random_real_symplectic(rng, 2)
            z, w = random_point(2, rng), random_point(2, rng)
            assert abs(distance(act(gamma, z), act(gamma, w)) - distance(z, w)) < 1e-8


class TestDensities:
    def test_volume_density(self):
        assert volume_density(SiegelPoint.scalar(1.0)) == 1.0
        assert volume_density(SiegelPoint.scalar(2.0)) == pytest.approx(1 / 64)
        assert volume_density(SiegelPoint(np.zeros((2, 2)), np.diag([1.0, 2.0]))) == pytest.approx(1 / 8)

    def test_petersson_factor(self):
        assert petersson_factor(SiegelPoint.scalar(1.0), 7) == 1.0
        assert petersson_factor(SiegelPoint.scalar(2.0), 3) == pytest.approx(64)
        assert petersson_factor(SiegelPoint(np.zeros((2, 2)), np.diag([1.0, 3.0])), 2) == pytest.approx(9)

    def test_petersson_weight_positive(self):
        with pytest.raises(ValueError):
            petersson_factor(SiegelPoint.scalar(1.0), 0)

    def test_kernel_norm_composition(self):
        z, w = SiegelPoint.scalar(2.0), SiegelPoint.scalar(1.0)
        assert petersson_kernel_norm(z, w, -0.5, 3) == pytest.approx(0.5 * 8)


class TestDeterminantIdentity:
    def test_hand_case(self):
        z, w = SiegelPoint.scalar(1.0), SiegelPoint.scalar(2.0)
        lhs = det_real(4 * z.Y @ w.Y) / abs(matkit.det_complex(z.Z - w.Z.conj())) ** 2
        assert lhs == pytest.approx(64 / 81, rel=1e-14)
        assert identity_residual(z, w) < 1e-14

    def test_coincident(self):
        z = SiegelPoint.scalar(3.0)
        assert identity_residual(z, z) < 1e-14

    @pytest.mark.parametrize("g", [2, 3])
    def test_random_pairs(self, rng, g):
        worst = max(identity_residual(random_point(g, rng), random_point(g, rng)) for _ in range(300))
        assert worst < 1e-9


def test_cosh_product_inequality(rng):
    for g in (2, 3, 4):
        x = rng.uniform(0.01, 3.0, size=(2000, g))
        n = np.linalg.norm(x, axis=1)
        mid = np.prod(np.cosh(x), axis=1)
        assert np.all(np.cosh(n) <= mid * (1 + 1e-14))
        assert np.all(mid <= np.cosh(n / math.sqrt(g)) ** g * (1 + 1e-14))
