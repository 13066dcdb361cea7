"""
experiment_templates: dictionaries of experiment templates for use in an
ocrpsim setup.

An experiment template is a prototype campaign (as opposed to an
experiment, which has a definite set of parameter values). It is a
dictionary containing:

'name': the label used on the command line and in reports.
'function': the campaign to call, as function(name, seed=..., workers=...,
    **parameters); it returns a list of ExperimentReport.
'parameters': the default value of every parameter the campaign takes.
    A setup fills these in without overwriting values set by the user.
'description': one line for list-experiments.
"""

from .experiment_functions import (
    run_equivalence, run_zeta_laplace, run_stationarity,
    run_besq_table_scaling, run_besq_mass_scaling, run_stable_exponent,
    run_levy_tails, run_chain_oracle, run_stats_calibration,
    run_besq_oracle, run_special_functions)


def make_experiment(name, func, description='', **parameters):
    """
    Helper function to make a legitimate experiment template.
    """
    return {
        'name': name,
        'function': func,
        'parameters': dict(parameters),
        'description': description,
    }


# A labeled list of all experiments to be found below.
class ExperimentData:

    def __init__(self):
        self.available_experiment_dic = {
            'skewer-equivalence': SkewerEquivalence,
            'theta-equivalence': ThetaEquivalence,
            'generalized-equivalence': GeneralizedEquivalence,
            'zeta-laplace': ZetaLaplace,
            'stationarity': Stationarity,
            'besq-table-scaling': BesqTableScaling,
            'besq-mass-scaling': BesqMassScaling,
            'stable-exponent': StableExponent,
            'levy-tails': LevyTails,
            'chain-oracle': ChainOracle,
            'stats-calibration': StatsCalibration,
            'besq-oracle': BesqOracle,
            'special-functions': SpecialFunctions,
        }


# Parameters shared by the three equivalence campaigns.
_equivalence = {
    'alpha': None,
    'theta': None,
    'start': None,
    'levels': [0.3, 0.8],
    'samples': 100000,
    'mass_cap': 8,
    'gamma': 1e-3,
    'power_shift': 0.1,
    'series_replicates': 200,
    'series_points': 21,
    'birth': None,
    'death': None,
    'p': None,
    'p_minus': None,
    'criticality_samples': 10000,
}

SkewerEquivalence = make_experiment(
    'skewer-equivalence', run_equivalence,
    'skewer of the contour paths against the direct oCRP(alpha, 0)',
    **{**_equivalence,
       'cases': [{'alpha': 0.5, 'theta': 0., 'start': [2]},
                 {'alpha': 0.8, 'theta': 0., 'start': [1, 2]},
                 {'alpha': 1., 'theta': 0., 'start': [3]}]})

ThetaEquivalence = make_experiment(
    'theta-equivalence', run_equivalence,
    'skewer with the negative part against the direct oCRP(alpha, theta)',
    **{**_equivalence,
       'cases': [{'alpha': 0.5, 'theta': 0.7, 'start': [1, 2]},
                 {'alpha': 0., 'theta': 1., 'start': [1, 2]}]})

GeneralizedEquivalence = make_experiment(
    'generalized-equivalence', run_equivalence,
    'skewer against the direct generalised oCRP with linear birth-death '
    'table sizes',
    **{**_equivalence,
       'cases': [{'alpha': 0.5, 'theta': 0.5, 'start': [1, 2]}],
       'birth': 0.4, 'death': 1., 'p': {2: 1.}, 'p_minus': {1: 1.}})

ZetaLaplace = make_experiment(
    'zeta-laplace', run_zeta_laplace,
    'table lifetime transform against the closed form and the continued '
    'fraction',
    alpha_grid=[0.3, 0.5, 0.8, 1.], lambda_grid=[0.5, 1., 2.],
    samples=1000000, depth=200, k=4., cf_tol=1e-10, block=100000,
    horizon=200.)

Stationarity = make_experiment(
    'stationarity', run_stationarity,
    'discrete up-down chain against its stationary law p_n',
    cases=[{'alpha': 0.5, 'theta': 0.5}, {'alpha': 0.5, 'theta': 0.}],
    alpha=None, theta=None, n_grid=[3, 4, 5], samples=1000000, gamma=1e-3)

BesqTableScaling = make_experiment(
    'besq-table-scaling', run_besq_table_scaling,
    'rescaled table size against BESQ(-2 alpha)',
    alpha_grid=[0., 0.5], z=1., n=1000, s=0.25, samples=100000, step=1e-4,
    ks_tol=0.01, slack=0.02, gamma=1e-3, block=10000, absorb_upper=1.)

BesqMassScaling = make_experiment(
    'besq-mass-scaling', run_besq_mass_scaling,
    'rescaled total mass against BESQ(2 theta)',
    theta_grid=[0., 0.5], a=1., n=1000, times=[0.25, 1.], samples=100000,
    step=1e-4, ks_tol=0.01, slack=0.02, gamma=1e-3, block=10000,
    absorb_upper=1.)

StableExponent = make_experiment(
    'stable-exponent', run_stable_exponent,
    'rescaled contour path exponent against the stable exponent',
    alpha_grid=[0.3, 0.5, 0.8], n=200, t=1., lambda_grid=[0.5, 1., 2.],
    samples=200000, k=4., exponent_n=10000, exponent_tol=1e-3, block=200)

LevyTails = make_experiment(
    'levy-tails', run_levy_tails,
    'jump measure of the stable limit from BESQ tails and lifetimes',
    alpha=0.5, y=1e-4, s_grid=[0.5, 1., 2.], det_tol=1e-3,
    mc_alpha_grid=[0.5, 0.8], n=500, eps_grid=[0.5, 1.], samples=10000000,
    k=4., rel_slack=0.1, ks_tol=0.02, ks_slack=0.05,
    lambda_grid=[0.5, 1., 2.], measure_tol=1e-6, block=100000,
    tail_upper=3.)

ChainOracle = make_experiment(
    'chain-oracle', run_chain_oracle,
    'chain marginals against the truncated generator exponential',
    alpha=0.5, theta=0.5, starts=[1, 2, 3], times=[0.25, 1.], cap=40,
    samples=1000000, tv_tol=0.005, bound=1e-4, coupling_samples=100000,
    coupling_points=20, k=3., block=100000, coupling_horizon=100.)

StatsCalibration = make_experiment(
    'stats-calibration', run_stats_calibration,
    'null rejection rates and power of the statistical tests',
    repeats=200, size=10000, gamma_ks=0.01, ks_band=0.02, power_p=1e-6,
    chi_n=4, chi_alpha=0.5, chi_theta=0.5, chi_size=2000, gamma_chi=0.05,
    chi_band=None, laplace_ratio_tol=0.05)

BesqOracle = make_experiment(
    'besq-oracle', run_besq_oracle,
    'BESQ simulator: symmetry, absorption law, mean, zero hits',
    a=1., delta=-1., s=0.5, step=1e-3, samples=100000, gamma=1e-3,
    absorb_alpha=0.5, absorb_step=1e-4, absorb_horizon=4., ks_tol=0.01,
    mean_theta=0.5, nonhit_delta=2., nonhit_step=1e-4, k=3., block=10000)

SpecialFunctions = make_experiment(
    'special-functions', run_special_functions,
    'incomplete gamma, continued fraction and exponent identities',
    alpha_grid=[0.3, 0.5, 0.8, 1.], lambda_grid=[0.5, 1., 2.], depth=200,
    gamma_tol=1e-12, cf_tol=1e-10, slope_h=1e-6, slope_tol=1e-4)
