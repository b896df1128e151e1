import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from gpplab import DomainError, beta_from_theta, custom_kernel, theta_from_beta
from gpplab.kernels import scaled_pdf, validate_beta, validate_theta
from gpplab.numerics import adaptive_simpson

GRID = np.linspace(-20.0, 20.0, 1001)


class TestDensityShape:
    def test_symmetry_positivity_monotone(self, laplace, gaussian):
        for kernel in (laplace, gaussian):
            vals = kernel.pdf(GRID)
            assert np.allclose(vals, kernel.pdf(-GRID), rtol=0, atol=1e-15)
            assert np.all(vals > 0.0)
            right = kernel.pdf(np.linspace(0.0, 20.0, 1001))
            assert np.all(np.diff(right) <= 0.0)

    def test_unit_mass(self, laplace, gaussian):
        for kernel in (laplace, gaussian):
            mass = 2.0 * adaptive_simpson(lambda s: float(kernel.pdf(s)), 0.0, 40.0, 1e-12)
            assert mass == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize("beta", [0.5, 1.0, 2.0, 5.0])
    def test_scale_family_unit_mass(self, laplace, beta):
        mass = adaptive_simpson(lambda s: float(scaled_pdf(laplace, beta, s)), -80.0, 80.0, 1e-10)
        assert mass == pytest.approx(1.0, abs=1e-8)


class TestPointValues:
    def test_laplace_density(self, laplace):
        assert laplace.pdf(0.0) == pytest.approx(0.5)
        assert laplace.pdf(1.0) == pytest.approx(math.exp(-1.0) / 2.0, abs=1e-12)

    def test_gaussian_density(self, gaussian):
        assert gaussian.pdf(0.0) == pytest.approx(1.0 / math.sqrt(2.0 * math.pi), abs=1e-12)

    def test_laplace_cdf(self, laplace):
        assert laplace.cdf(0.0) == 0.5
        assert laplace.cdf(-1.0) == pytest.approx(math.exp(-1.0) / 2.0, abs=1e-14)

    def test_gaussian_cdf_against_independent_routine(self, gaussian):
        # the package integrates psi numerically; scipy's erf-based CDF is the oracle
        for x in (-3.0, -1.0, -0.2, 0.4, 2.5):
            assert gaussian.cdf(x) == pytest.approx(norm.cdf(x), abs=1e-10)

    def test_laplace_quantile(self, laplace):
        assert laplace.quantile(0.5) == 0.0
        assert laplace.quantile(0.25) == pytest.approx(-math.log(2.0), abs=1e-14)

    def test_gaussian_quantile(self, gaussian):
        assert gaussian.quantile(norm.cdf(-1.0)) == pytest.approx(-1.0, abs=1e-6)

    def test_quantile_domain(self, laplace, gaussian):
        for kernel in (laplace, gaussian):
            for q in (0.0, 1.0, -0.1, 1.7, float("nan")):
                with pytest.raises(DomainError):
                    kernel.quantile(q)


class TestRoundtrips:
    @pytest.mark.parametrize("q", np.round(np.arange(0.01, 1.0, 0.01), 10).tolist())
    def test_cdf_quantile_roundtrip_laplace(self, laplace, q):
        assert laplace.cdf(laplace.quantile(q)) == pytest.approx(q, abs=1e-10)

    @pytest.mark.parametrize("q", [0.01, 0.1, 0.25, 0.5, 0.9, 0.99])
    def test_cdf_quantile_roundtrip_gaussian(self, gaussian, q):
        assert gaussian.cdf(gaussian.quantile(q)) == pytest.approx(q, abs=1e-10)

    @given(beta=st.floats(0.05, 8.0))
    @settings(max_examples=50, deadline=None)
    def test_theta_beta_bijection(self, beta):
        from gpplab import laplace_kernel

        kernel = laplace_kernel()
        assert beta_from_theta(kernel, theta_from_beta(kernel, beta)) == pytest.approx(
            beta, abs=1e-10
        )

    def test_theta_beta_bijection_gaussian(self, gaussian):
        for beta in (0.5, 1.0, 2.0, 4.0):
            assert beta_from_theta(gaussian, theta_from_beta(gaussian, beta)) == pytest.approx(
                beta, abs=1e-10
            )


class TestThetaBeta:
    def test_laplace_values(self, laplace):
        assert theta_from_beta(laplace, 1.0) == pytest.approx(math.exp(-0.5), abs=1e-12)
        assert beta_from_theta(laplace, math.exp(-1.0)) == pytest.approx(2.0, abs=1e-12)

    def test_complete_dependence_limit(self, laplace, gaussian):
        for kernel in (laplace, gaussian):
            assert theta_from_beta(kernel, 1e-12) == pytest.approx(1.0, abs=1e-9)

    def test_domains(self, laplace):
        for bad in (0.0, -1.0, float("inf")):
            with pytest.raises(DomainError):
                validate_beta(bad)
        for bad in (0.0, 1.0, -0.5, 2.0):
            with pytest.raises(DomainError):
                validate_theta(bad)


class TestCustomKernel:
    def test_accepts_rescaled_laplace(self):
        kernel = custom_kernel("laplace-2", lambda s: 0.25 * np.exp(-0.5 * np.abs(s)), halfwidth=80.0)
        assert kernel.cdf(0.0) == pytest.approx(0.5)
        assert kernel.cdf(kernel.quantile(0.3)) == pytest.approx(0.3, abs=1e-10)

    def test_rejects_asymmetric(self):
        with pytest.raises(DomainError, match="symmetric"):
            custom_kernel("skew", lambda s: 0.5 * np.exp(-np.abs(np.asarray(s) - 0.1)))

    def test_rejects_zeros(self):
        with pytest.raises(DomainError, match="positive"):
            custom_kernel("bump", lambda s: np.maximum(1.0 - np.abs(np.asarray(s)), 0.0))

    def test_rejects_non_monotone(self):
        def wiggly(s):
            s = np.asarray(s, dtype=float)
            return 0.5 * np.exp(-np.abs(s)) * (1.0 + 0.9 * np.sin(2.0 * s) ** 2)

        with pytest.raises(DomainError, match="nonincreasing"):
            custom_kernel("wiggly", wiggly)

    def test_rejects_wrong_mass(self):
        with pytest.raises(DomainError, match="mass"):
            custom_kernel("heavy", lambda s: np.exp(-np.abs(s)))
