import json

import numpy as np
import pytest

from ocrpsim.core import InsufficientCountsError
from ocrpsim.ocrp import OcrpParams, ocrp_at_levels
from ocrpsim.stats import (
    ExperimentReport, within_tolerance, bonferroni, calibration_band,
    rejection_rate, empirical_laplace, ks_two_sample, ks_to_cdf, category,
    chi_square_keys, chi_square_to_law, chi_square_composition, joint_keys,
    multi_level_equivalence, TAIL)


class TestTolerances:

    def test_within_tolerance(self):
        assert within_tolerance(1.0, 1.05, 0.02)
        assert not within_tolerance(1.0, 1.1, 0.02)
        assert within_tolerance(1.0, 1.1, 0.02, slack=0.05)

    def test_bonferroni(self):
        passed, threshold = bonferroni([0.5, 1e-4], gamma=1e-3)
        assert not passed
        assert np.abs(threshold - 5e-4) < 1e-15
        assert bonferroni([0.5, 6e-4], gamma=1e-3)[0]
        assert bonferroni([], gamma=1e-3) == (True, 1e-3)

    def test_calibration(self):
        assert np.abs(calibration_band(0.05, 100)
                      - 2 * np.sqrt(0.05 * 0.95 / 100)) < 1e-15
        assert rejection_rate([0.01, 0.2, 0.03, 0.5], 0.05) == 0.5


class TestRealSamples:

    def test_empirical_laplace(self):
        estimates, ses = empirical_laplace([0., 0., 0.], [1., 2.])
        assert np.all(estimates == 1.) and np.all(ses == 0.)
        estimates, _ = empirical_laplace([1., 1.], 2.)
        assert np.abs(estimates[0] - np.exp(-2.)) < 1e-15
        with pytest.raises(ValueError):
            empirical_laplace([1.], [1.])

    def test_ks_to_cdf(self):
        stat, _ = ks_to_cdf([0.5], lambda t: t)
        assert np.abs(stat - 0.5) < 1e-15
        # Half the sample is not observed: the level at upper counts.
        stat, _ = ks_to_cdf([0.2, np.inf], lambda t: min(t, 1.), upper=1.)
        assert np.abs(stat - 0.5) < 1e-15
        with pytest.raises(ValueError):
            ks_to_cdf([], lambda t: t)

    def test_ks_uniform(self):
        rng = np.random.default_rng(1)
        _, p = ks_to_cdf(rng.random(2000), lambda t: t)
        assert p > 1e-3

    def test_ks_two_sample(self):
        stat, p = ks_two_sample([1., 2., 3.], [1., 2., 3.])
        assert stat == 0. and p > 0.99
        with pytest.raises(ValueError):
            ks_two_sample([], [1.])


class TestChiSquare:

    def test_equal_samples(self):
        keys = ['x'] * 50 + ['y'] * 50
        stat, dof, p = chi_square_keys(keys, keys)
        assert stat == 0. and dof == 1
        assert np.abs(p - 1.) < 1e-12

    def test_single_category(self):
        with pytest.raises(InsufficientCountsError):
            chi_square_keys(['x'] * 10, ['x'] * 10)
        with pytest.raises(InsufficientCountsError):
            chi_square_to_law(['x'] * 10, {'x': 1.})

    def test_to_law(self):
        keys = ['a'] * 60 + ['b'] * 40
        stat, dof, p = chi_square_to_law(keys, {'a': 0.6, 'b': 0.4})
        assert np.abs(stat) < 1e-12 and dof == 1
        assert np.abs(p - 1.) < 1e-12

    def test_rare_category_pooled(self):
        keys = ['a'] * 50 + ['b'] * 49 + ['c']
        _, dof, _ = chi_square_to_law(keys, {'a': 0.5, 'b': 0.49, 'c': 0.01})
        assert dof == 1

    def test_outside_support(self):
        keys = ['a'] * 60 + ['b'] * 39 + ['c']
        stat, dof, p = chi_square_to_law(keys, {'a': 0.6, 'b': 0.4,
                                                'c': 0.})
        assert stat == np.inf and dof == 2
        assert p == 0.
        _, _, p = chi_square_composition([(2,)] * 30 + [(1, 2)],
                                         {(2,): 0.5, (1, 1): 0.5},
                                         mass_cap=3)
        assert p == 0.

    def test_categories(self):
        assert category((1, 2), 4) == (1, 2)
        assert category((1, 2, 3), 4) == TAIL
        samples = [[(1,), (2,)], [(1, 1), (6,)]]
        assert joint_keys(samples, 0, 1, 4) == [((1,), 2), TAIL]

    def test_composition_law(self):
        law = {(2,): 0.5, (1, 1): 0.5}
        samples = [(2,)] * 30 + [(1, 1)] * 30
        stat, dof, p = chi_square_composition(samples, law, mass_cap=2)
        assert np.abs(stat) < 1e-12 and dof == 1


class TestEquivalence:

    def test_same_sampler_passes(self):
        args = ((1,), OcrpParams(0.5, 0.))
        report = multi_level_equivalence(
            ocrp_at_levels, ocrp_at_levels, [0.2, 0.5], 2000, seed=3,
            args_a=args, args_b=args, name='self')
        assert report.passed
        assert len(report.checks) == 3
        assert all(np.abs(row['threshold'] - 1e-3 / 3) < 1e-15
                   for row in report.checks)
        assert report.samples == {'a': 2000, 'b': 2000}


class TestReport:

    def test_to_dict(self):
        report = ExperimentReport('x', {'alpha': np.float64(0.5)}, True,
                                  series={'curve': [[0., 1.]]})
        report.add_check('mean', True, estimate=np.float64(1.5),
                         bound=np.inf)
        data = report.to_dict()
        assert 'series' not in data
        assert data['checks'][0] == {'check': 'mean', 'passed': True,
                                     'estimate': 1.5, 'bound': 'inf'}
        json.loads(report.to_json())
        rows = list(report.rows())
        assert rows[0]['experiment'] == 'x'
        back = ExperimentReport.from_dict(data)
        assert back.checks == data['checks']
