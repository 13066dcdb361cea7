"""
setup_functions: functions to assist in creating a setup for the
ocrpsim experiment controller.

Experiment-set creation:

An experiment_set is a dictionary {experiment name: parameters}, one
entry per campaign to run. The parameters are a plain dictionary that is
passed, together with the seed and worker count, to the campaign
function of the template with that name.

The following functions fill, build and validate experiment sets.
"""
from .core import validate_composition, parse_composition

# Parameters that count draws or sizes and must be positive integers.
count_keys = ('samples', 'repeats', 'size', 'chi_size', 'coupling_samples',
              'criticality_samples', 'block', 'n', 'depth', 'cap',
              'exponent_n', 'series_points', 'chi_n')
# Levels of statistical tests, in (0, 1).
level_keys = ('gamma', 'gamma_ks', 'gamma_chi')
# Parameters that must be positive reals.
positive_keys = ('step', 'absorb_step', 'nonhit_step', 'absorb_horizon',
                 's', 't', 'z', 'y', 'slope_h', 'death', 'horizon',
                 'absorb_upper', 'tail_upper', 'coupling_horizon',
                 'chi_band')


def fill_experiment_set(experiment_dic, experiment_set):
    """
    Fills a pre-existing experiment set with the default parameters of
    each template. Parameters already in the experiment set are not
    overwritten.
    """
    for name, parameters in experiment_set.items():
        if name not in experiment_dic:
            raise ValueError('Unknown experiment {}'.format(name))
        defaults = experiment_dic[name]['parameters']
        unknown = set(parameters) - set(defaults)
        if unknown:
            raise ValueError('{} takes no parameters {}'.format(
                name, sorted(unknown)))
        experiment_set[name] = {**defaults, **parameters}
    return experiment_set


def make_experiment_set(names, experiment_dic, **overrides):
    """
    An experiment set for the named experiments, with every override
    applied to each experiment that takes that parameter. An override
    that no named experiment takes is an error.
    """
    experiment_set = {}
    used = set()
    for name in names:
        if name not in experiment_dic:
            raise ValueError('Unknown experiment {}'.format(name))
        defaults = experiment_dic[name]['parameters']
        experiment_set[name] = {k: v for k, v in overrides.items()
                                if k in defaults}
        used |= set(experiment_set[name])
    unused = set(overrides) - used
    if unused:
        raise ValueError('No selected experiment takes {}'.format(
            sorted(unused)))
    return fill_experiment_set(experiment_dic, experiment_set)


def _check_alpha(alpha, key):
    if not 0 <= float(alpha) <= 1:
        raise ValueError('{} must lie in [0, 1], got {}'.format(key, alpha))


def _check_theta(theta, key):
    if float(theta) < 0:
        raise ValueError('{} must be nonnegative, got {}'.format(key, theta))


def _check_case(case):
    if case.get('alpha') is not None:
        _check_alpha(case['alpha'], 'alpha')
    if case.get('theta') is not None:
        _check_theta(case['theta'], 'theta')
    start = case.get('start')
    if start is not None:
        if isinstance(start, str):
            parse_composition(start)
        elif isinstance(start, (list, tuple)):
            validate_composition(start)
        else:
            validate_composition([start])


def validate_parameters(name, parameters):
    """
    Raises ValueError for parameter values outside their domain:
    alpha in [0, 1], theta >= 0, positive sample counts and steps,
    test levels in (0, 1), nonnegative levels, valid compositions.
    """
    for key, value in parameters.items():
        if value is None:
            continue
        if key in ('alpha', 'absorb_alpha', 'chi_alpha'):
            _check_alpha(value, key)
        elif key in ('alpha_grid', 'mc_alpha_grid'):
            for alpha in value:
                _check_alpha(alpha, key)
        elif key in ('theta', 'chi_theta', 'mean_theta'):
            _check_theta(value, key)
        elif key == 'theta_grid':
            for theta in value:
                _check_theta(theta, key)
        elif key in count_keys:
            if int(value) != value or value < 1:
                raise ValueError('{} must be a positive integer, got {}'
                                 .format(key, value))
        elif key in level_keys:
            if not 0 < value < 1:
                raise ValueError('{} must lie in (0, 1), got {}'.format(
                    key, value))
        elif key in positive_keys:
            if not value > 0:
                raise ValueError('{} must be positive, got {}'.format(
                    key, value))
        elif key in ('levels', 'times', 's_grid', 'eps_grid',
                     'lambda_grid'):
            if not len(value) or min(value) < 0:
                raise ValueError('{} must be a nonempty list of nonnegative '
                                 'numbers, got {}'.format(key, value))
        elif key == 'cases':
            for case in value:
                _check_case(case)
        elif key == 'start':
            _check_case({'start': value})
    return True
