import math

import numpy as np
import pytest

from siegel_kernel_lab import volumes as vol
from siegel_kernel_lab.errors import DegenerateEstimateError, ParameterError


class TestPolarDensity:
    def test_zero_radius(self):
        assert vol.polar_density([0.0, 1.0]) == 0.0

    def test_equal_radii(self):
        assert vol.polar_density([1.0, 1.0]) == 0.0

    def test_half_angle_form(self):
        got = vol.polar_density([1.0, 2.0])
        want = (math.sinh(1) ** 2 * math.sinh(2) ** 2
                * math.sinh(0.5) ** 2 * math.sinh(1.5) ** 2)
        assert got == pytest.approx(want, rel=1e-13)

    def test_permutation_symmetric(self, rng):
        r = rng.uniform(0, 2, size=4)
        assert vol.polar_density(r) == pytest.approx(vol.polar_density(r[::-1]), rel=1e-12)


class TestPolydisk:
    @pytest.mark.parametrize("r", [0.25, 0.5, 1.0, 2.0])
    def test_matches_closed_form(self, r):
        q = vol.polydisk_volume(2, r)
        assert q == pytest.approx(vol.closed_form_vol2(r).total, rel=1e-8)

    def test_printed_coefficient_is_off(self):
        # The variant with 7 gives ~0.0915 at r = 1; the integral is ~0.00661.
        printed = vol.closed_form_vol2(1.0, i1_coefficient=7).total
        assert printed == pytest.approx(0.09159, abs=1e-4)
        assert vol.polydisk_volume(2, 1.0) == pytest.approx(0.006611631631835, rel=1e-10)

    def test_small_radius(self):
        assert vol.polydisk_volume(2, 1e-2) < 1e-20

    def test_vector_radii(self):
        a = vol.polydisk_volume(2, [0.5, 1.0])
        b = vol.polydisk_volume(2, [1.0, 0.5])
        assert a == pytest.approx(b, rel=1e-10)

    def test_scipy_oracle_g3(self):
        from scipy import integrate

        ref = integrate.tplquad(lambda c, b, a: vol.polar_density([a, b, c]), 0, 1, 0, 1, 0, 1,
                                epsabs=0, epsrel=1e-10)[0]
        assert vol.polydisk_volume(3, 1.0) == pytest.approx(8 * ref, rel=1e-7)

    def test_rejects_nonpositive(self):
        with pytest.raises(ParameterError):
            vol.polydisk_volume(2, 0.0)

    def test_quadrature_spec_validation(self):
        with pytest.raises(ParameterError):
            vol.QuadratureSpec(nodes=4)


class TestClosedForms:
    def test_i3_value(self):
        assert vol.closed_form_vol2(1.0).I3 == pytest.approx(math.sinh(1) ** 6 / 9)
        assert vol.closed_form_vol2(1.0).I3 == pytest.approx(0.292705, abs=1e-6)

    def test_i3_integrand(self):
        from scipy import integrate

        r = 1.0
        assert vol.closed_form_vol2(r).I3 == pytest.approx(
            integrate.dblquad(lambda b, a: math.sinh(a) ** 2 * math.sinh(b) ** 2 * math.cosh(a)
                              * math.cosh(b), 0, r, 0, r)[0], rel=1e-10)

    @pytest.mark.parametrize("r", [0.1, 0.7, 1.3, 3.0])
    def test_i1_equals_i2(self, r):
        cf = vol.closed_form_vol2(r)
        assert cf.I1 == cf.I2

    @pytest.mark.parametrize("r", [0.1, 0.25, 0.5, 1.0, 2.0, 3.0])
    def test_prop1_bound_dominates(self, r):
        assert vol.prop1_bound(r) >= vol.polydisk_volume(2, r)

    def test_prop1_bound_value(self):
        assert vol.prop1_bound(1.0) == pytest.approx(145.337, abs=1e-3)

    def test_prop2_reduces_to_prop1_shape(self):
        for r in (0.5, 1.0, 2.0):
            assert 32 * vol.prop2_bound(2, r) == pytest.approx(vol.prop1_bound(r))

    def test_prop2_small_r(self):
        r = 1e-3
        assert vol.prop2_bound(3, r) == pytest.approx(r ** 5, rel=1e-4)

    def test_prop2_fit_reports_ratios(self):
        fit = vol.fit_prop2_constant(2, [0.5, 1.0, 2.0])
        assert fit.constant == max(fit.ratios) and fit.drift >= 1

    def test_derivative_ratio(self):
        for g in (2, 3, 4):
            for r in np.linspace(0.05, 5, 40):
                h = 1e-6
                num = (vol.prop2_bound(g, r + h) - vol.prop2_bound(g, r - h)) / (2 * h)
                den = math.cosh(r) ** (g * g - 1) * math.sinh(r) ** (g + 1)
                assert num / den == pytest.approx(vol.prop2_derivative_ratio(g, r), rel=1e-6)
                assert vol.prop2_derivative_ratio(g, r) <= g * g + g


class TestBallVolume:
    def test_contained_in_polydisk(self):
        for g, r in ((2, 1.0), (2, 2.5), (3, 2.0)):
            ball = vol.ball_volume(g, r)
            assert ball.value <= vol.polydisk_volume(g, r / vol.SQRT8) + 3 * ball.stderr

    def test_shrinks_to_zero(self):
        assert vol.ball_volume(2, 0.01).value < 1e-15

    def test_deterministic(self):
        assert vol.ball_volume(2, 1.0, seed=7) == vol.ball_volume(2, 1.0, seed=7)

    def test_stderr_scaling(self):
        a = vol.ball_volume(2, 2.0, samples=50_000)
        b = vol.ball_volume(2, 2.0, samples=200_000)
        assert 0.35 < b.stderr / a.stderr < 0.65

    def test_rejects_few_samples(self):
        with pytest.raises(ParameterError):
            vol.ball_volume(2, 1.0, samples=100)

    def test_degenerate_region(self, monkeypatch):
        monkeypatch.setattr(vol.np, "sqrt", lambda x: x * 0 + np.inf)
        with pytest.raises(DegenerateEstimateError):
            vol.ball_volume(2, 1.0, samples=10_000)


class TestElementarySymmetric:
    def test_values(self):
        assert vol.elem_sym([1, 2, 3], 2) == 11
        assert vol.elem_sym([4, 5], 0) == 1

    def test_generating_polynomial(self, rng):
        x = rng.normal(size=5)
        for y in rng.normal(size=4):
            lhs = np.prod(x + y)
            rhs = sum(vol.elem_sym(x, 5 - k) * y ** k for k in range(6))
            assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)

    def test_range(self):
        with pytest.raises(ParameterError):
            vol.elem_sym([1, 2], 3)


class TestSinhCoshIntegral:
    def test_k_zero(self):
        res = vol.sinh2_cosh2k_integral(1.0, 0)
        assert res.value / 2 == pytest.approx((math.sinh(1) * math.cosh(1) - 1) / 2, rel=1e-12)
        assert res.value / 2 == pytest.approx(0.40672, abs=1e-5)
        assert res.bound == pytest.approx(math.sinh(1) ** 3 / math.cosh(1) + math.sinh(1) * math.cosh(1))

    @pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
    @pytest.mark.parametrize("k", [0, 1, 2, 5])
    def test_bound_holds(self, r, k):
        assert vol.sinh2_cosh2k_integral(r, k).holds


class TestSpecialFunctions:
    def test_classical_values(self):
        assert math.exp(vol.log_gamma(0.5)) == pytest.approx(math.sqrt(math.pi), rel=1e-13)
        assert math.exp(vol.log_gamma(5)) == pytest.approx(24, rel=1e-13)

    def test_recurrence(self):
        for x in np.linspace(0.1, 50, 200):
            lhs = vol.log_gamma(x + 1)
            rhs = vol.log_gamma(x) + math.log(x)
            assert abs(math.exp(lhs - rhs) - 1) < 1e-12

    def test_against_stdlib(self):
        for x in (0.01, 0.3, 1.7, 12.5, 333.3, 960.5):
            assert vol.log_gamma(x) == pytest.approx(math.lgamma(x), rel=1e-13, abs=1e-13)

    def test_domain(self):
        with pytest.raises(ParameterError):
            vol.log_gamma(0.0)

    def test_hua_g1_pi(self):
        assert vol.hua_beta(1, 1) == pytest.approx(math.pi, rel=1e-13)
        assert vol.hua_integral_quadrature_g1(1) == pytest.approx(math.pi, rel=1e-10)

    @pytest.mark.parametrize("k", [2, 3, 5])
    def test_hua_g1_quadrature(self, k):
        assert vol.hua_beta(1, k) == pytest.approx(vol.hua_integral_quadrature_g1(k), rel=1e-8)

    def test_hua_g1_collapse(self):
        for k in range(1, 60):
            ratio = math.exp(vol.log_hua_beta(1, k) + vol.log_gamma(k) - vol.log_gamma(k - 0.5))
            assert ratio == pytest.approx(math.sqrt(math.pi), rel=1e-12)

    def test_hua_g2_monte_carlo(self):
        want = math.pi ** 1.5 * (1 / 2) * math.exp(math.lgamma(4.5) - math.lgamma(5))
        assert vol.hua_beta(2, 2) == pytest.approx(want, rel=1e-12)
        mc, err = vol.hua_integral_monte_carlo(2, 2, samples=400_000)
        assert abs(mc - want) / want < 0.02

    def test_hua_asymptotics(self):
        r1 = vol.hua_asymptotic_ratio(1, [20, 40, 80, 160, 320])
        assert r1[-1] == pytest.approx(math.sqrt(math.pi), rel=0.01)
        r2 = vol.hua_asymptotic_ratio(2, [20, 40, 80, 160, 320])
        assert abs(r2[-1] / r2[-2] - 1) < 0.05 and abs(r2[3] / r2[2] - 1) < 0.05
        assert r2[-1] / r2[0] < 2 and all(v > 0 for v in r1 + r2)

    def test_hua_bad_argument(self):
        with pytest.raises(ParameterError, match="Gamma"):
            vol.log_hua_beta(3, 0)

    def test_asymptotic_needs_increasing(self):
        with pytest.raises(ParameterError):
            vol.hua_asymptotic_ratio(1, [4, 2])


class TestMutation:
    def test_sign_error_in_density_is_caught(self, monkeypatch):
        from siegel_kernel_lab import verify

        assert verify.run_check("prop1").passed

        def broken(r):
            # Sum instead of difference in the pair factor (genus 2 only).
            r = np.asarray(r, dtype=float)
            ch = np.cosh(r)
            return np.prod(np.sinh(r) ** 2, axis=-1) * (ch[..., 0] + ch[..., 1]) ** 2 / 4

        monkeypatch.setattr(vol, "polar_density", broken)
        assert not verify.run_check("prop1").passed
