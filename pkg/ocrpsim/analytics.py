"""
analytics: closed-form laws and special functions.

    - incomplete gamma functions (series below a + 1, Lentz continued
      fraction above);
    - the Laplace transform of the absorption time zeta of the table-size
      chain from 1, in closed form and by its continued fraction;
    - Laplace exponents of the contour process and of its stable limit;
    - absorption laws of squared Bessel processes and the tails of the
      limiting Levy measure.
"""
from dataclasses import dataclass

import numpy as np
import scipy.integrate
from scipy.special import gammaln, gamma

from .core import OutOfDomainError

EPS = 1e-15
FPMIN = 1e-300
MAX_ITER = 100000
# Largest shape accepted by upper_incomplete_gamma.
A_MAX = 3.


def _check_gamma_args(a, z):
    if not a > 0 or not z > 0 or not np.isfinite(a) or not np.isfinite(z):
        raise OutOfDomainError(
            'incomplete gamma needs a > 0 and z > 0, got a={}, z={}'.format(
                a, z))


def _lower_series(a, z):
    '''
    P(a, z) by its power series, for z < a + 1.
    '''
    ap = a
    term = total = 1. / a
    for _ in range(MAX_ITER):
        ap += 1
        term *= z / ap
        total += term
        if abs(term) < abs(total) * EPS:
            return total * np.exp(-z + a * np.log(z) - gammaln(a))
    raise RuntimeError('incomplete gamma series did not converge '
                       '(a={}, z={})'.format(a, z))


def _log_upper_fraction(a, z):
    '''
    log Gamma(a, z) by the modified Lentz continued fraction,
    for z >= a + 1.
    '''
    b = z + 1 - a
    c = 1. / FPMIN
    d = 1. / b
    h = d
    for i in range(1, MAX_ITER):
        an = -i * (i - a)
        b += 2
        d = an * d + b
        if abs(d) < FPMIN:
            d = FPMIN
        c = b + an / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1. / d
        step = d * c
        h *= step
        if abs(step - 1) < EPS:
            return -z + a * np.log(z) + np.log(h)
    raise RuntimeError('incomplete gamma continued fraction did not '
                       'converge (a={}, z={})'.format(a, z))


def log_upper_incomplete_gamma(a, z):
    _check_gamma_args(a, z)
    if a > A_MAX:
        raise OutOfDomainError(
            'incomplete gamma is used for a <= {}, got a={}'.format(
                A_MAX, a))
    if z < a + 1:
        return gammaln(a) + np.log1p(-_lower_series(a, z))
    return _log_upper_fraction(a, z)


def upper_incomplete_gamma(a, z):
    """
    Gamma(a, z), the integral of e^{-t} t^{a-1} over (z, inf).
    """
    return float(np.exp(log_upper_incomplete_gamma(a, z)))


def regularized_upper_gamma(a, z):
    '''
    Q(a, z) = Gamma(a, z) / Gamma(a).
    '''
    _check_gamma_args(a, z)
    if z < a + 1:
        return float(1 - _lower_series(a, z))
    return float(np.exp(_log_upper_fraction(a, z) - gammaln(a)))


def regularized_lower_gamma(a, z):
    '''
    P(a, z) = 1 - Q(a, z), accurate for small z.
    '''
    _check_gamma_args(a, z)
    if z < a + 1:
        return float(_lower_series(a, z))
    return float(-np.expm1(_log_upper_fraction(a, z) - gammaln(a)))


# Absorption time of the table-size chain

def _check_alpha(alpha, upper=1.):
    if not 0 < alpha <= upper:
        raise OutOfDomainError(
            'alpha must lie in (0, {}], got {}'.format(upper, alpha))


def _log_scaled_gamma(alpha, lam):
    # log of e^lam Gamma(1 + alpha, lam)
    return lam + log_upper_incomplete_gamma(1 + alpha, lam)


def zeta_laplace(alpha, lam):
    """
    E_1(exp(-lam zeta)) for the table-size chain with 0 < alpha <= 1:

        1 - lam/alpha + lam^(1+alpha) / (alpha e^lam Gamma(1+alpha, lam)).

    alpha = 0 has no closed form here; use birth_death_hitting_cdf.
    """
    _check_alpha(alpha)
    if not lam > 0:
        raise OutOfDomainError('lam must be positive, got {}'.format(lam))
    ratio = np.exp((1 + alpha) * np.log(lam) - _log_scaled_gamma(alpha, lam))
    return float(1 - lam / alpha + ratio / alpha)


def continued_fraction_laplace(alpha, lam, depth=200):
    """
    The same Laplace transform as zeta_laplace, by backward recursion of

        F_r = (r + 1) / (2r + 2 - alpha + lam - (r + 1 - alpha) F_{r+1})

    from F_depth = 0 down to F_0.
    """
    _check_alpha(alpha)
    if not lam > 0:
        raise OutOfDomainError('lam must be positive, got {}'.format(lam))
    if depth < 1:
        raise ValueError('depth must be at least 1, got {}'.format(depth))
    f = 0.
    for r in range(depth - 1, -1, -1):
        f = (r + 1) / (2 * r + 2 - alpha + lam - (r + 1 - alpha) * f)
    return f


@dataclass
class LaplaceGrid:
    lambdas: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.lambdas = np.asarray(self.lambdas, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if np.any(self.lambdas <= 0):
            raise ValueError('Laplace arguments must be positive')
        if self.lambdas.shape != self.values.shape:
            raise ValueError('one value per Laplace argument')

    def is_monotone(self):
        order = np.argsort(self.lambdas)
        return bool(np.all(np.diff(self.values[order]) <= 0))


def zeta_laplace_grid(alpha, lambdas):
    return LaplaceGrid(lambdas, [zeta_laplace(alpha, lam)
                                 for lam in lambdas])


def birth_death_hitting_cdf(m, t):
    '''
    P_m(zeta <= t) for alpha = 0, where zeta is the hitting time of 0 of
    the chain with up-rate and down-rate m.
    '''
    if m < 1 or t <= 0:
        raise ValueError('need m >= 1 and t > 0')
    if np.isinf(t):
        return 1.
    return (t / (t + 1)) ** m


def rescaled_hitting_cdf(m, n, t):
    '''
    The alpha = 0 hitting law after time is sped up by 2n.
    '''
    return birth_death_hitting_cdf(m, 2 * n * t)


# Levy exponents

def levy_exponent(alpha, lam):
    """
    Laplace exponent phi(lam) = lam^(1+alpha) e^(-lam) / Gamma(1+alpha, lam)
    of the contour process X: E exp(-lam (X_t - X_0)) = exp(t phi(lam)).
    """
    _check_alpha(alpha)
    if not lam > 0:
        raise OutOfDomainError('lam must be positive, got {}'.format(lam))
    return float(np.exp((1 + alpha) * np.log(lam)
                        - _log_scaled_gamma(alpha, lam)))


def scaled_levy_exponent(alpha, lam, n):
    '''
    Exponent of X(2n^(1+alpha) t) / 2n: 2n^(1+alpha) phi(lam / 2n).
    '''
    return 2 * n ** (1 + alpha) * levy_exponent(alpha, lam / (2 * n))


def stable_exponent(alpha, lam):
    """
    psi(lam) = lam^(1+alpha) / (2^alpha Gamma(1+alpha)), the exponent of
    the spectrally positive stable(1+alpha) limit.
    """
    _check_alpha(alpha)
    return lam ** (1 + alpha) / (2 ** alpha * gamma(1 + alpha))


def levy_constant(alpha):
    return 2 * alpha * (1 + alpha) / gamma(1 - alpha)


def stable_levy_tail(alpha, s, normalized=False):
    """
    Tail of the limiting jump measure: s^-(1+alpha) / (2^(1+alpha)
    Gamma(2+alpha)), multiplied by levy_constant(alpha) if normalized.
    """
    _check_alpha(alpha, upper=1 - EPS)
    if not s > 0:
        raise OutOfDomainError('s must be positive, got {}'.format(s))
    tail = s ** -(1 + alpha) / (2 ** (1 + alpha) * gamma(2 + alpha))
    return tail * levy_constant(alpha) if normalized else tail


def stable_levy_density(alpha, s, normalized=False):
    _check_alpha(alpha, upper=1 - EPS)
    density = s ** -(2 + alpha) / (2 ** (1 + alpha) * gamma(1 + alpha))
    return density * levy_constant(alpha) if normalized else density


def _compensated_exp(x):
    # e^(-x) - 1 + x, by its series where expm1 would cancel.
    if x < 1e-3:
        return x * x * (0.5 - x / 6 + x * x / 24)
    return np.expm1(-x) + x


def exponent_from_levy_measure(alpha, lam):
    """
    Integral of (e^(-lam s) - 1 + lam s) against the normalized limiting
    jump measure; equals stable_exponent(alpha, lam).
    """
    def integrand(s):
        return (_compensated_exp(lam * s)
                * stable_levy_density(alpha, s, normalized=True))

    head, _ = scipy.integrate.quad(integrand, 0, 1, limit=200,
                                   epsabs=1e-12)
    tail, _ = scipy.integrate.quad(integrand, 1, np.inf, limit=200,
                                   epsabs=1e-12)
    return head + tail


# Squared Bessel absorption

def besq_absorption_cdf(z, delta, t):
    """
    P(zeta <= t) for BESQ_z(delta), delta < 2, started at z > 0:
    zeta has the law of z / 2G with G ~ Gamma((2 - delta)/2, 1).
    """
    if not z > 0 or not delta < 2:
        raise OutOfDomainError('need z > 0 and delta < 2')
    if t <= 0:
        return 0.
    if np.isinf(t):
        return 1.
    return regularized_upper_gamma((2 - delta) / 2, z / (2 * t))


def besq_absorption_tail(y, delta, s):
    '''
    P(zeta > s) for BESQ_y(delta), computed without cancellation.
    '''
    if not y > 0 or not delta < 2 or not s > 0:
        raise OutOfDomainError('need y > 0, delta < 2 and s > 0')
    return regularized_lower_gamma((2 - delta) / 2, y / (2 * s))
