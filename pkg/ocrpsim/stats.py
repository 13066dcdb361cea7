"""
stats: the statistical checks of the verification campaigns.

    - empirical Laplace transforms with standard errors;
    - Kolmogorov-Smirnov tests (two-sample, and against a closed-form CDF
      with optional censoring);
    - Pearson chi-square tests on compositions, keyed by the exact part
      sequence, with rare categories pooled into one tail cell;
    - multi-level equivalence of two composition-valued samplers with a
      Bonferroni correction;
    - ExperimentReport, the record every campaign returns.
"""
import json
import logging
from collections import Counter
from dataclasses import dataclass, field, asdict

import numpy as np
import scipy.stats

from .core import InsufficientCountsError, sample_replicates

logger = logging.getLogger(__name__)

TAIL = 'tail'


@dataclass
class ExperimentReport:
    '''
    Outcome of one campaign: the parameter echo, sample counts, one row
    per check and the overall verdict.
    '''
    experiment: str
    parameters: dict
    passed: bool
    samples: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    series: dict = field(default_factory=dict, repr=False)

    def add_check(self, check, passed, **values):
        row = {'check': check, 'passed': bool(passed)}
        row.update({k: _plain(v) for k, v in values.items()})
        self.checks.append(row)
        return row

    def to_dict(self):
        data = asdict(self)
        # Plot series go to their own CSV files.
        del data['series']
        return _plain(data)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def rows(self):
        '''
        Flat rows for the CSV summary.
        '''
        for row in self.checks:
            yield {'experiment': self.experiment, **row}

    @classmethod
    def from_dict(cls, data):
        return cls(**{k: v for k, v in data.items() if k != 'series'})


def _plain(value):
    # Converts numpy scalars and tuples for JSON.
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, float) and not np.isfinite(value):
        return str(value)
    return value


# Tolerances

def within_tolerance(estimate, target, se, k=4., slack=0.):
    '''
    |estimate - target| <= k * se + slack.
    '''
    return bool(abs(estimate - target) <= k * se + slack)


def bonferroni(p_values, gamma=1e-3):
    '''
    Family verdict at level gamma: (passed, per-test threshold).
    '''
    threshold = gamma / max(1, len(p_values))
    return bool(all(p >= threshold for p in p_values)), threshold


def calibration_band(gamma, repeats):
    return 2 * np.sqrt(gamma * (1 - gamma) / repeats)


def rejection_rate(p_values, gamma):
    return float(np.mean(np.asarray(p_values) < gamma))


# Real-valued samples

def empirical_laplace(samples, lambdas):
    """
    Mean of exp(-lam x) over samples for each lam, with standard errors.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.size < 2:
        raise ValueError('need at least 2 samples, got {}'.format(
            samples.size))
    lambdas = np.atleast_1d(np.asarray(lambdas, dtype=float))
    weights = np.exp(-np.outer(lambdas, samples))
    estimates = weights.mean(axis=1)
    ses = weights.std(axis=1, ddof=1) / np.sqrt(samples.size)
    return estimates, ses


def ks_two_sample(x, y):
    '''
    Two-sample KS statistic with its asymptotic p-value.
    '''
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if not x.size or not y.size:
        raise ValueError('both samples must be nonempty')
    result = scipy.stats.ks_2samp(x, y, method='asymp')
    return float(result.statistic), float(result.pvalue)


def ks_to_cdf(samples, cdf, upper=None):
    """
    One-sample KS distance sup |F_n - F| on (-inf, upper] (all samples if
    upper is None). Samples above upper, including inf for events not
    observed, only enter through the empirical CDF's level.

    Returns (statistic, p-value); the p-value ignores censoring.
    """
    samples = np.sort(np.asarray(samples, dtype=float))
    n = samples.size
    if not n:
        raise ValueError('empty sample')
    if upper is None:
        upper = samples[np.isfinite(samples)].max() \
            if np.any(np.isfinite(samples)) else 0.
    seen = samples[samples <= upper]
    f = np.array([cdf(x) for x in seen])
    above = np.arange(1, seen.size + 1) / n - f
    below = f - np.arange(seen.size) / n
    stat = max(above.max(initial=0.), below.max(initial=0.),
               abs(cdf(upper) - seen.size / n) if np.isfinite(upper) else 0.)
    return float(stat), float(scipy.stats.kstwo.sf(stat, n))


# Compositions

def category(composition, mass_cap):
    composition = tuple(int(n) for n in composition)
    return composition if sum(composition) <= mass_cap else TAIL


def _pool(counts, expected_of, min_expected):
    '''
    Moves every category whose expected count is below min_expected into
    the tail. Returns the kept categories.
    '''
    return [c for c in counts if c != TAIL and expected_of(c) >= min_expected]


def chi_square_keys(keys_a, keys_b, min_expected=5.):
    """
    Two-sample Pearson chi-square on hashable categories, rare
    categories pooled into one tail cell. Returns (statistic, dof,
    p-value).
    """
    count_a, count_b = Counter(keys_a), Counter(keys_b)
    n_a, n_b = sum(count_a.values()), sum(count_b.values())
    if not n_a or not n_b:
        raise ValueError('both samples must be nonempty')
    total = n_a + n_b
    pooled = count_a + count_b

    def expected(c):
        return min(n_a, n_b) * pooled[c] / total

    kept = _pool(pooled, expected, min_expected)
    table = [[count_a[c] for c in kept], [count_b[c] for c in kept]]
    tail = [n_a - sum(table[0]), n_b - sum(table[1])]
    if sum(tail):
        if min(n_a, n_b) * sum(tail) / total < min_expected and kept:
            # Fold a too small tail into the rarest kept category.
            rarest = int(np.argmin([pooled[c] for c in kept]))
            table[0][rarest] += tail[0]
            table[1][rarest] += tail[1]
        else:
            table[0].append(tail[0])
            table[1].append(tail[1])
    if len(table[0]) < 2:
        raise InsufficientCountsError(
            'fewer than two categories with expected count >= {}'.format(
                min_expected))
    stat, p, dof, _ = scipy.stats.chi2_contingency(np.array(table),
                                                   correction=False)
    return float(stat), int(dof), float(p)


def chi_square_to_law(keys, law, min_expected=5.):
    """
    Goodness of fit of a sample of categories to an exact law (a dict
    category -> probability). Returns (statistic, dof, p-value).
    """
    counts = Counter(keys)
    n = sum(counts.values())
    if not n:
        raise ValueError('empty sample')
    law = {c: p for c, p in law.items() if p > 0}
    impossible = sum(m for c, m in counts.items() if c not in law)
    if impossible:
        # Any count outside the support rejects outright.
        return float('inf'), len(law), 0.

    kept = [c for c in law if n * law[c] >= min_expected]
    observed = [counts[c] for c in kept]
    expected = [n * law[c] for c in kept]
    tail_observed = n - sum(observed)
    tail_expected = max(0., n - sum(expected))
    if tail_expected >= min_expected or (tail_observed and not kept):
        observed.append(tail_observed)
        expected.append(tail_expected)
    elif kept:
        rarest = int(np.argmin(expected))
        observed[rarest] += tail_observed
        expected[rarest] += tail_expected
    if len(observed) < 2:
        raise InsufficientCountsError(
            'fewer than two categories with expected count >= {}'.format(
                min_expected))

    observed = np.array(observed, dtype=float)
    expected = np.array(expected)
    with np.errstate(divide='ignore', invalid='ignore'):
        terms = np.where(expected > 0, (observed - expected) ** 2 / expected,
                         np.where(observed > 0, np.inf, 0.))
    stat = float(terms.sum())
    dof = len(observed) - 1
    return stat, dof, float(scipy.stats.chi2.sf(stat, dof))


def chi_square_composition(samples, reference, mass_cap=8, min_expected=5.):
    """
    Pearson chi-square of a sample of compositions against either a
    second sample or an exact law {composition: probability}.
    Compositions of total mass above mass_cap share one tail cell.
    Returns (statistic, dof, p-value).
    """
    keys = [category(c, mass_cap) for c in samples]
    if isinstance(reference, dict):
        law = {}
        for c, p in reference.items():
            key = category(c, mass_cap)
            law[key] = law.get(key, 0.) + p
        return chi_square_to_law(keys, law, min_expected)
    return chi_square_keys(keys, [category(c, mass_cap) for c in reference],
                           min_expected)


def joint_keys(samples, i, j, mass_cap):
    '''
    Categories (composition at level i, total mass at level j).
    '''
    out = []
    for replicate in samples:
        first, mass = category(replicate[i], mass_cap), sum(replicate[j])
        out.append(TAIL if first == TAIL or mass > mass_cap
                   else (first, mass))
    return out


def multi_level_equivalence(sampler_a, sampler_b, levels, replicates,
                            seed=0, args_a=(), args_b=(), mass_cap=8,
                            gamma=1e-3, workers=1, name='equivalence',
                            parameters=None, stream=0):
    """
    Compares two laws of composition-valued processes at several levels.

    sampler_a(rng, *args_a) and sampler_b(rng, *args_b) must return the
    compositions at each of levels for one replicate. Runs a chi-square
    test per level and a joint test of (composition at y1, mass at y2)
    for each consecutive pair of levels, and passes iff every test
    passes at the Bonferroni threshold gamma / (number of tests).
    """
    levels = list(levels)
    samples_a = sample_replicates(sampler_a, tuple(args_a) + (levels,),
                                  replicates, seed, stream=(stream, 0),
                                  workers=workers)
    samples_b = sample_replicates(sampler_b, tuple(args_b) + (levels,),
                                  replicates, seed, stream=(stream, 1),
                                  workers=workers)

    report = ExperimentReport(name, dict(parameters or {}), False,
                              samples={'a': replicates, 'b': replicates})
    p_values = []
    for k, y in enumerate(levels):
        stat, dof, p = chi_square_composition(
            [s[k] for s in samples_a], [s[k] for s in samples_b], mass_cap)
        p_values.append(p)
        report.add_check('chi2 at level {}'.format(y), True,
                         statistic=stat, dof=dof, p_value=p)
    for k in range(len(levels) - 1):
        stat, dof, p = chi_square_keys(
            joint_keys(samples_a, k, k + 1, mass_cap),
            joint_keys(samples_b, k, k + 1, mass_cap))
        p_values.append(p)
        report.add_check('joint chi2 at levels {}, {}'.format(
            levels[k], levels[k + 1]), True, statistic=stat, dof=dof,
            p_value=p)

    report.passed, threshold = bonferroni(p_values, gamma)
    for row in report.checks:
        row['passed'] = row['p_value'] >= threshold
        row['threshold'] = threshold
    logger.info('%s: min p %.3g against threshold %.3g, %s', name,
                min(p_values), threshold,
                'pass' if report.passed else 'fail')
    return report
