import numpy as np
import pytest

from ocrpsim.experiment_functions import (
    run_equivalence, run_zeta_laplace, run_stationarity,
    run_besq_table_scaling, run_besq_mass_scaling, run_stable_exponent,
    run_levy_tails, run_chain_oracle, run_stats_calibration,
    run_besq_oracle, run_special_functions, _cases, _ocrp_params,
    _composition, _cut_bound)


class TestHelpers:

    def test_cases(self):
        cases = _cases([{'alpha': 0.5, 'start': [1]}, {'alpha': 0.8}],
                       alpha=None, start=[2])
        assert cases == [{'alpha': 0.5, 'start': [2]},
                         {'alpha': 0.8, 'start': [2]}]
        assert _cases(None, alpha=0.3) == [{'alpha': 0.3}]

    def test_params(self):
        assert _ocrp_params(0.5, 0.5).is_basic
        params = _ocrp_params(0.5, 0.5, birth=0.4, death=1.,
                              p={'2': 1.}, p_minus={1: 1.})
        assert params.spec.p == {2: 1.}
        assert not params.is_basic
        assert _composition('1,2') == (1, 2)
        assert _composition(3) == (3,)

    def test_cut_bound(self):
        values = np.array([1., np.inf, np.inf, 2.])
        lower = np.array([0., 1., 2., 0.])
        bound = _cut_bound(values, lower, [1., 0.])
        assert np.abs(bound[0] - (np.exp(-1.) + np.exp(-2.)) / 4) < 1e-15
        assert bound[1] == 0.5
        assert _cut_bound(np.ones(3), np.zeros(3), [1.]) == [0.]


class TestCampaigns:

    def test_special_functions(self):
        reports = run_special_functions('special-functions')
        assert len(reports) == 1
        report = reports[0]
        assert report.passed
        assert len(report.checks) == 3 + 4 * 3 + 2 + 4 + 1

    def test_skewer_equivalence(self):
        reports = run_equivalence(
            'skewer-equivalence', seed=1,
            cases=[{'alpha': 0.5, 'theta': 0., 'start': [2]}],
            levels=[0.3], samples=3000, power_shift=0.,
            series_replicates=10, series_points=5)
        assert len(reports) == 1
        report = reports[0]
        assert report.passed
        assert report.parameters['start'] == [2]
        assert len(report.series['mean_mass_case0']) == 5

    def test_theta_equivalence(self):
        reports = run_equivalence(
            'theta-equivalence', seed=2,
            cases=[{'alpha': 0.5, 'theta': 0.7, 'start': [1]}],
            levels=[0.2, 0.4], samples=3000, power_shift=0.,
            series_replicates=0)
        assert reports[0].passed
        assert not reports[0].series

    def test_case_needs_start(self):
        with pytest.raises(ValueError):
            run_equivalence('x', cases=[{'alpha': 0.5}], samples=10,
                            series_replicates=0)

    def test_zeta_laplace(self):
        reports = run_zeta_laplace('zeta-laplace', seed=3, alpha_grid=[1.],
                                   samples=20000, block=5000)
        assert reports[0].passed
        assert reports[0].samples == {'zeta': 20000}
        assert len(reports[0].series['laplace_alpha1.0']) == 3

    def test_zeta_laplace_open_tables(self):
        # Near-critical tables are followed up to a short horizon only;
        # the tables still open there do not stop the campaign.
        reports = run_zeta_laplace('zeta-laplace', seed=8, alpha_grid=[0.3],
                                   samples=20000, block=5000, horizon=20.)
        report = reports[0]
        assert report.passed
        assert report.parameters['horizon'] == 20.
        mean = report.checks[-1]
        assert mean['check'] == 'mean lifetime'
        assert mean['open'] > 0
        assert all(row['open_bound'] < 1e-3 for row in report.checks
                   if 'open_bound' in row)

    def test_besq_table_scaling(self):
        reports = run_besq_table_scaling(
            'besq-table-scaling', seed=9, alpha_grid=[0., 0.5], n=100,
            samples=2000, step=1e-3, ks_tol=0.1, slack=0.05, gamma=1e-6,
            absorb_upper=0.5, block=1000)
        assert len(reports) == 2
        assert all(r.passed for r in reports)
        # The exact birth-death law only applies at alpha = 0.
        assert len(reports[0].checks) == 3
        assert len(reports[1].checks) == 2
        assert reports[1].samples['censored'] == 0

    def test_besq_mass_scaling(self):
        reports = run_besq_mass_scaling(
            'besq-mass-scaling', seed=10, theta_grid=[0., 0.5], n=100,
            times=[0.25, 0.5], samples=2000, step=1e-3, ks_tol=0.1,
            slack=0.05, gamma=1e-6, absorb_upper=0.5, block=1000)
        assert all(r.passed for r in reports)
        # Extinction only for theta = 0.
        assert len(reports[0].checks) == 3
        assert len(reports[1].checks) == 2
        assert all(row['threshold'] == 5e-7 for row in reports[1].checks)

    def test_stable_exponent(self):
        reports = run_stable_exponent(
            'stable-exponent', seed=11, alpha_grid=[0.8], n=10,
            lambda_grid=[0.5, 1.], samples=1000, block=100)
        report = reports[0]
        assert report.passed
        assert len(report.checks) == 4
        assert report.samples['cut_paths'] == 0
        assert len(report.series['exponent_alpha0.8']) == 2

    def test_levy_tails(self):
        reports = run_levy_tails(
            'levy-tails', seed=12, mc_alpha_grid=[0.5], n=50,
            eps_grid=[0.5, 1.], samples=100000, rel_slack=0.3,
            tail_upper=3., block=25000)
        assert len(reports) == 1
        report = reports[0]
        assert report.passed
        assert len(report.checks) == 3 + 3 + 2 * 2
        assert all(row['exceedances'] > 0 for row in report.checks
                   if 'exceedances' in row)
        with pytest.raises(ValueError):
            run_levy_tails('levy-tails', eps_grid=[0.5, 1.], tail_upper=1.)

    def test_stats_calibration(self):
        reports = run_stats_calibration(
            'stats-calibration', seed=13, repeats=100, size=2000,
            ks_band=0.05, chi_size=500, chi_band=0.1)
        report = reports[0]
        assert report.passed
        assert [row['check'] for row in report.checks] == [
            'KS null rejection rate', 'KS power, Exp(1) against Exp(2)',
            'chi2 null rejection rate',
            'Laplace standard error halves for 4x samples']
        assert report.checks[2]['band'] == 0.1

    def test_stationarity(self):
        reports = run_stationarity('stationarity', seed=4,
                                   cases=[{'alpha': 0.5, 'theta': 0.5}],
                                   n_grid=[3], samples=5000)
        assert reports[0].passed
        assert len(reports[0].checks) == 3

    def test_chain_oracle(self):
        reports = run_chain_oracle('chain-oracle', seed=5, starts=[1, 2],
                                   times=[0.25], samples=20000,
                                   tv_tol=0.05, coupling_samples=5000,
                                   block=5000)
        assert [r.parameters['chain'] for r in reports] == \
            ['Qalpha', 'TotalMass']
        assert all(r.passed for r in reports)
        # The coupling check only applies to the absorbing chain.
        assert len(reports[0].checks) == 3
        assert len(reports[1].checks) == 2

    def test_besq_oracle(self):
        reports = run_besq_oracle('besq-oracle', seed=6, step=1e-2,
                                  samples=5000, absorb_step=1e-3,
                                  absorb_horizon=2., ks_tol=0.05,
                                  nonhit_step=1e-3, k=4., block=5000)
        report = reports[0]
        assert report.passed
        assert report.checks[-1]['hits'] >= 0

    def test_reproducible(self):
        kwargs = dict(seed=7, alpha_grid=[0.5], samples=2000, block=500)
        a = run_zeta_laplace('zeta-laplace', **kwargs)[0]
        b = run_zeta_laplace('zeta-laplace', workers=2, **kwargs)[0]
        assert a.to_dict() == b.to_dict()
        estimates = [row['estimate'] for row in a.checks if 'se' in row]
        assert all(np.isfinite(estimates))
