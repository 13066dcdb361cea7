import numpy as np
import pytest
import scipy.integrate
from scipy.special import gamma

from ocrpsim.analytics import (
    upper_incomplete_gamma, log_upper_incomplete_gamma,
    regularized_upper_gamma, regularized_lower_gamma, zeta_laplace,
    continued_fraction_laplace, zeta_laplace_grid, LaplaceGrid,
    birth_death_hitting_cdf, rescaled_hitting_cdf, levy_exponent,
    scaled_levy_exponent, stable_exponent, levy_constant, stable_levy_tail,
    stable_levy_density, exponent_from_levy_measure, besq_absorption_cdf,
    besq_absorption_tail)
from ocrpsim.core import OutOfDomainError


class TestIncompleteGamma:

    def test_values(self):
        assert np.abs(upper_incomplete_gamma(1., 1.) - np.exp(-1)) \
            < 1e-12 * np.exp(-1)
        assert np.abs(upper_incomplete_gamma(2., 2.) - 3 * np.exp(-2)) \
            < 1e-12 * 3 * np.exp(-2)

    def test_against_quadrature(self):
        exact, _ = scipy.integrate.quad(lambda x: x ** 0.5 * np.exp(-x),
                                        0.5, np.inf, epsabs=0, epsrel=1e-13)
        assert np.abs(upper_incomplete_gamma(1.5, 0.5) - exact) \
            < 1e-11 * exact

    def test_both_branches_agree(self):
        # z = a + 1 switches from the series to the continued fraction.
        a = 2.5
        below = regularized_upper_gamma(a, a + 1 - 1e-9)
        above = regularized_upper_gamma(a, a + 1)
        assert np.abs(below - above) < 1e-8

    def test_regularized(self):
        for a, z in [(0.5, 0.1), (1.5, 3.), (3., 10.)]:
            assert np.abs(regularized_upper_gamma(a, z)
                          + regularized_lower_gamma(a, z) - 1) < 1e-12
        assert np.abs(np.exp(log_upper_incomplete_gamma(1.5, 40.))
                      - upper_incomplete_gamma(1.5, 40.)) < 1e-25

    def test_domain(self):
        with pytest.raises(OutOfDomainError):
            upper_incomplete_gamma(0., 1.)
        with pytest.raises(OutOfDomainError):
            upper_incomplete_gamma(1., 0.)
        with pytest.raises(OutOfDomainError):
            regularized_lower_gamma(-1., 1.)
        with pytest.raises(OutOfDomainError):
            upper_incomplete_gamma(3.5, 1.)
        assert np.abs(upper_incomplete_gamma(3., 1.) - 5 * np.exp(-1)) < 1e-12
        assert np.abs(regularized_upper_gamma(4., 2.)
                      - 19 * np.exp(-2) / 3) < 1e-12


class TestZetaLaplace:

    def test_alpha_one(self):
        # With alpha = 1 the lifetime from 1 is Exp(1).
        for lam in [0.5, 1., 2.]:
            assert np.abs(zeta_laplace(1., lam) - 1 / (1 + lam)) < 1e-12
            assert np.abs(continued_fraction_laplace(1., lam, 1)
                          - 1 / (1 + lam)) < 1e-12

    def test_continued_fraction(self):
        for alpha in [0.3, 0.5, 0.8, 1.]:
            for lam in [0.5, 1., 2.]:
                assert np.abs(continued_fraction_laplace(alpha, lam)
                              - zeta_laplace(alpha, lam)) < 1e-10

    def test_depth_one(self):
        assert np.abs(continued_fraction_laplace(0.5, 1., 1)
                      - 1 / (2 - 0.5 + 1)) < 1e-15
        with pytest.raises(ValueError):
            continued_fraction_laplace(0.5, 1., 0)

    def test_slope_at_zero(self):
        # d/dlam at 0 is -E zeta = -1/alpha.
        h = 1e-6
        for alpha in [0.8, 1.]:
            slope = (zeta_laplace(alpha, h) - 1) / h
            assert np.abs(slope + 1 / alpha) < 1e-4

    def test_grid(self):
        grid = zeta_laplace_grid(0.5, [0.5, 1., 2.])
        assert grid.is_monotone()
        assert np.all((grid.values > 0) & (grid.values < 1))
        with pytest.raises(ValueError):
            LaplaceGrid([0., 1.], [1., 0.5])

    def test_domain(self):
        with pytest.raises(OutOfDomainError):
            zeta_laplace(0., 1.)
        with pytest.raises(OutOfDomainError):
            zeta_laplace(0.5, 0.)


class TestHittingLaw:

    def test_values(self):
        assert np.abs(birth_death_hitting_cdf(1, 1.) - 0.5) < 1e-15
        assert np.abs(birth_death_hitting_cdf(2, 1.) - 0.25) < 1e-15
        assert birth_death_hitting_cdf(3, np.inf) == 1.
        assert np.abs(rescaled_hitting_cdf(10, 5, 0.1)
                      - birth_death_hitting_cdf(10, 1.)) < 1e-15

    def test_limit(self):
        # zn tables at time 2nt: (1 + 1/2nt)^(-zn) -> exp(-z/2t).
        assert np.abs(rescaled_hitting_cdf(10**5, 10**5, 0.5)
                      - np.exp(-1)) < 1e-4


class TestExponents:

    def test_stable_exponent(self):
        for alpha in [0.3, 0.5, 0.8]:
            for lam in [0.5, 1., 2.]:
                assert np.abs(stable_exponent(alpha, 2 * lam)
                              - 2 ** (1 + alpha)
                              * stable_exponent(alpha, lam)) < 1e-12
        assert np.abs(stable_exponent(0.5, 1.)
                      - 1 / (2 ** 0.5 * gamma(1.5))) < 1e-15

    def test_scaling(self):
        for alpha in [0.3, 0.5, 0.8]:
            for lam in [0.5, 1., 2.]:
                psi = stable_exponent(alpha, lam)
                assert np.abs(scaled_levy_exponent(alpha, lam, 10**4)
                              - psi) < 1e-3 * psi

    def test_levy_exponent_alpha_one(self):
        # e^lam Gamma(2, lam) = 1 + lam.
        assert np.abs(levy_exponent(1., 2.) - 4. / 3.) < 1e-12

    def test_measure(self):
        for alpha in [0.3, 0.5, 0.8]:
            for lam in [0.5, 1., 2.]:
                exact = stable_exponent(alpha, lam)
                assert np.abs(exponent_from_levy_measure(alpha, lam)
                              - exact) < 1e-6 * exact

    def test_tail_and_density(self):
        alpha, s, h = 0.5, 1., 1e-6
        slope = (stable_levy_tail(alpha, s + h)
                 - stable_levy_tail(alpha, s - h)) / (2 * h)
        assert np.abs(slope + stable_levy_density(alpha, s)) < 1e-6
        assert np.abs(stable_levy_tail(alpha, s, normalized=True)
                      - levy_constant(alpha) * stable_levy_tail(alpha, s)) \
            < 1e-15
        with pytest.raises(OutOfDomainError):
            stable_levy_tail(1., 1.)
        with pytest.raises(OutOfDomainError):
            stable_levy_tail(0.5, 0.)


class TestBesqLaws:

    def test_delta_zero(self):
        assert np.abs(besq_absorption_cdf(1., 0., 1.)
                      - np.exp(-0.5)) < 1e-12
        assert besq_absorption_cdf(1., 0., 0.) == 0.
        assert besq_absorption_cdf(1., 0., np.inf) == 1.

    def test_tail_complements_cdf(self):
        for delta in [-1., 0., 1.]:
            assert np.abs(besq_absorption_cdf(1., delta, 0.7)
                          + besq_absorption_tail(1., delta, 0.7) - 1) < 1e-12

    def test_small_start(self):
        alpha, y = 0.5, 1e-4
        for s in [0.5, 1., 2.]:
            value = y ** -(1 + alpha) * besq_absorption_tail(
                y, -2 * alpha, s)
            exact = stable_levy_tail(alpha, s)
            assert np.abs(value - exact) < 1e-3 * exact

    def test_domain(self):
        with pytest.raises(OutOfDomainError):
            besq_absorption_cdf(1., 2., 1.)
        with pytest.raises(OutOfDomainError):
            besq_absorption_tail(0., -1., 1.)
