"""
default_setup: functions to return the campaigns and their default
parameters in a format compatible with the experiment controller.
"""
import logging
import os
import warnings

import numpy as np

from .experiment_setup import Setup
from . import experiment_templates as et
from .setup_functions import make_experiment_set

logger = logging.getLogger(__name__)

WORKERS_ENV = 'OCRPSIM_WORKERS'


def quick_setup(experiments, rng=None, *, seed=None, workers=None,
                output=None, **kwargs):
    """
    Quick setup: a function to return a setup that may be immediately
    handed to an experiment controller.

    Parameters
    ----------
    experiments: an experiment name or alias, a comma separated list of
        them, a list of them, or 'all'.
    rng(=None): integer seed for every campaign; `seed` is an alias.
        Without either a fresh seed is drawn (and recorded in the
        setup), with a warning as the run is then not reproducible.
    workers(=None): worker processes per campaign; defaults to the
        OCRPSIM_WORKERS environment variable, else 1.
    output(=None): directory for the report files.
    kwargs: parameter values, applied to every selected campaign that
        takes them (see get_parameters for the names and defaults).
    """
    if seed is None:
        seed = rng
    if seed is None:
        warnings.warn('No seed given: the campaigns are not reproducible',
                      UserWarning)
        seed = int(np.random.SeedSequence().entropy % 2**63)
        logger.info('drew seed %d', seed)

    experiment_dic = {}
    for name in resolve_experiments(experiments):
        template = get_experiment_dic()[name]
        experiment_dic[template['name']] = template

    return Setup(seed=int(seed), workers=get_workers(workers), output=output,
                 experiment_dic=experiment_dic,
                 experiment_set=make_experiment_set(
                     list(experiment_dic), experiment_dic, **kwargs))


def resolve_experiments(experiments):
    '''
    Canonical names for a name, alias, comma separated list or 'all'.
    '''
    if isinstance(experiments, str):
        experiments = [e.strip() for e in experiments.split(',')
                       if e.strip()]
    experiments = list(experiments)
    if not experiments:
        raise ValueError('No experiment selected')
    if experiments == ['all']:
        return list(et.ExperimentData().available_experiment_dic)
    experiment_dic = get_experiment_dic()
    names = []
    for name in experiments:
        if name not in experiment_dic:
            raise ValueError('Unknown experiment {}'.format(name))
        if experiment_dic[name]['name'] not in names:
            names.append(experiment_dic[name]['name'])
    return names


def get_experiment_dic():
    """
    Returns the set of campaigns, under their names and short aliases.
    """
    experiment_dic = {
        'skewer-equivalence': et.SkewerEquivalence,
        'skewer': et.SkewerEquivalence,
        'theta-equivalence': et.ThetaEquivalence,
        'theta': et.ThetaEquivalence,
        'generalized-equivalence': et.GeneralizedEquivalence,
        'generalized': et.GeneralizedEquivalence,
        'zeta-laplace': et.ZetaLaplace,
        'zeta': et.ZetaLaplace,
        'stationarity': et.Stationarity,
        'besq-table-scaling': et.BesqTableScaling,
        'table-scaling': et.BesqTableScaling,
        'besq-mass-scaling': et.BesqMassScaling,
        'mass-scaling': et.BesqMassScaling,
        'stable-exponent': et.StableExponent,
        'stable': et.StableExponent,
        'levy-tails': et.LevyTails,
        'tails': et.LevyTails,
        'chain-oracle': et.ChainOracle,
        'oracle': et.ChainOracle,
        'stats-calibration': et.StatsCalibration,
        'calibration': et.StatsCalibration,
        'besq-oracle': et.BesqOracle,
        'besq': et.BesqOracle,
        'special-functions': et.SpecialFunctions,
        'special': et.SpecialFunctions,
    }

    return experiment_dic


def get_parameters(name, **kwargs):
    """
    The parameters of one campaign, with standard values pre-set and
    kwargs applied on top.
    """
    template = get_experiment_dic().get(name)
    if template is None:
        raise ValueError('Unknown experiment {}'.format(name))
    unknown = set(kwargs) - set(template['parameters'])
    if unknown:
        raise ValueError('{} takes no parameters {}'.format(
            template['name'], sorted(unknown)))
    return {**template['parameters'], **kwargs}


def get_workers(workers=None):
    if workers is not None:
        return int(workers)
    value = os.environ.get(WORKERS_ENV)
    if value:
        try:
            return int(value)
        except ValueError:
            raise ValueError('{} must be an integer, got {!r}'.format(
                WORKERS_ENV, value))
    return 1
