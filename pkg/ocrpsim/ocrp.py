"""
ocrp: direct simulation of the up-down ordered Chinese Restaurant Process.

A state is a composition (tuple of table sizes, left to right). In the
continuous-time up-down oCRP(alpha, theta):
    - a customer joins table i at rate n_i - alpha,
    - a new table of size 1 opens right after table i at rate alpha,
    - a new table of size 1 opens on the far left at rate theta,
    - each customer leaves at rate 1 (empty tables are removed).
The generalised process replaces the per-table moves by an arbitrary
Q-matrix and the new-table sizes by the entry laws p, p_minus, all
carried by a RateSpec.

Also contains the discrete-time chain on compositions of n (an up-step
then a uniform down-step) and its stationary law p_n.
"""
import logging

import numpy as np
from scipy.special import gammaln

from .chains import RateSpec
from .core import (validate_composition, ensure_rng, trajectory_value,
                   NonAbsorptionError)

logger = logging.getLogger(__name__)


class OcrpParams:

    def __init__(self, alpha, theta=0., spec=None):
        """
        @alpha: right-insertion rate, in [0, 1].
        @theta: left-insertion rate, nonnegative.
        @spec: RateSpec of the per-table size moves and of the entry laws
            p, p_minus. Defaults to the basic model RateSpec.qalpha(alpha)
            with new tables of size 1.
        """
        if not 0 <= alpha <= 1:
            raise ValueError('alpha must lie in [0, 1], got {}'.format(alpha))
        if theta < 0:
            raise ValueError('theta must be nonnegative, got {}'.format(theta))
        self.alpha = float(alpha)
        self.theta = float(theta)
        self.spec = spec if spec is not None else RateSpec.qalpha(alpha)
        if self.spec.kind == 'total_mass':
            raise ValueError('table sizes cannot follow a TotalMass chain')

    @property
    def is_basic(self):
        return (self.spec.kind == 'qalpha'
                and self.spec.alpha == self.alpha
                and self.spec.p == {1: 1.0}
                and self.spec.p_minus == {1: 1.0})

    def to_dict(self):
        return {'alpha': self.alpha, 'theta': self.theta,
                'spec': self.spec.to_dict()}

    @classmethod
    def from_dict(cls, data):
        spec = data.get('spec')
        return cls(data['alpha'], data.get('theta', 0.),
                   RateSpec.from_dict(spec) if spec is not None else None)

    def __repr__(self):
        return 'OcrpParams(alpha={}, theta={}, spec={!r})'.format(
            self.alpha, self.theta, self.spec)


def step_rates(composition, params):
    """
    All enabled transitions out of composition with their positive
    rates, as a list of (transition, rate). A transition is one of
        ('resize', i, l): table i changes to size l (l = 0 removes it),
        ('insert_right', i, l): a table of size l opens after table i,
        ('insert_left', None, l): a table of size l opens on the left.
    """
    composition = validate_composition(composition)
    out = []
    spec = params.spec
    for i, n in enumerate(composition):
        for l, rate in spec.transitions(n).items():
            out.append((('resize', i, l), rate))
        if params.alpha > 0:
            for l, w in spec.p.items():
                out.append((('insert_right', i, l), params.alpha * w))
    if params.theta > 0:
        for l, w in spec.p_minus.items():
            out.append((('insert_left', None, l), params.theta * w))
    return out


def apply_transition(composition, transition):
    kind, i, l = transition
    composition = list(composition)
    if kind == 'resize':
        if l == 0:
            del composition[i]
        else:
            composition[i] = l
    elif kind == 'insert_right':
        composition.insert(i + 1, l)
    elif kind == 'insert_left':
        composition.insert(0, l)
    else:
        raise ValueError('Unknown transition {}'.format(transition))
    return tuple(composition)


def simulate_ocrp(start, params, level_max, rng=None, max_events=10**7):
    """
    Gillespie simulation of the (generalised) up-down oCRP from start
    on levels [0, level_max]. Returns the trajectory as a list of
    (level, composition), starting with (0.0, start); each entry holds
    until the next one.
    """
    rng = ensure_rng(rng)
    composition = validate_composition(start)
    if level_max < 0:
        raise ValueError('level_max must be nonnegative')

    level = 0.
    trajectory = [(level, composition)]
    for _ in range(max_events):
        moves = step_rates(composition, params)
        if not moves:
            return trajectory
        rates = np.cumsum([rate for _, rate in moves])
        level += rng.exponential(1 / rates[-1])
        if level > level_max:
            return trajectory
        k = np.searchsorted(rates, rng.random() * rates[-1], side='right')
        composition = apply_transition(
            composition, moves[min(k, len(moves) - 1)][0])
        trajectory.append((level, composition))

    logger.debug('event budget %d exhausted by the oCRP', max_events)
    raise NonAbsorptionError('oCRP used more than {} events below level {}'
                             .format(max_events, level_max))


# The discrete-time chain on compositions of n

def up_step(composition, alpha, theta, rng=None):
    """
    Adds one customer with the ordered CRP weights: join table i with
    weight n_i - alpha, open a table right after table i with weight
    alpha, open a table on the far left with weight theta.
    """
    rng = ensure_rng(rng)
    composition = validate_composition(composition)
    weights = []
    for n in composition:
        weights += [n - alpha, alpha]
    weights.append(theta)
    weights = np.cumsum(weights)
    if weights[-1] <= 0:
        raise ValueError('no up-step possible from {} with theta={}'.format(
            composition, theta))
    k = min(np.searchsorted(weights, rng.random() * weights[-1],
                            side='right'), len(weights) - 1)
    if k == len(weights) - 1:
        return (1,) + composition
    i, insert = divmod(k, 2)
    if insert:
        return composition[:i + 1] + (1,) + composition[i + 1:]
    return composition[:i] + (composition[i] + 1,) + composition[i + 1:]


def down_step(composition, rng=None):
    '''
    Removes a uniformly chosen customer.
    '''
    rng = ensure_rng(rng)
    composition = validate_composition(composition)
    if not composition:
        raise ValueError('cannot remove a customer from the empty '
                         'composition')
    sizes = np.cumsum(composition)
    i = int(np.searchsorted(sizes, rng.integers(sizes[-1]), side='right'))
    return apply_transition(composition, ('resize', i, composition[i] - 1))


def discrete_up_down_step(composition, alpha, theta, rng=None):
    composition = validate_composition(composition)
    if not composition:
        raise ValueError('the discrete chain needs at least one customer')
    rng = ensure_rng(rng)
    return down_step(up_step(composition, alpha, theta, rng), rng)


def _log_rising(x, k):
    if k == 0:
        return 0.
    if x <= 0:
        return -np.inf
    return gammaln(x + k) - gammaln(x)


def _log_r(n, m, alpha, theta):
    if m == n:
        return _log_rising(1 - alpha, n - 1) - _log_rising(1 + theta, n - 1)
    weight = (n - m) * alpha + m * theta
    if weight <= 0:
        return -np.inf
    return (gammaln(n + 1) - gammaln(m + 1) - gammaln(n - m + 1)
            + np.log(weight) - np.log(n)
            + _log_rising(1 - alpha, m - 1)
            - _log_rising(n - m + theta, m))


def composition_probability(composition, alpha, theta):
    """
    Stationary probability p_n of a composition of n (tables left to
    right) for the discrete up-down chain, a product of r(N, m) factors
    taken from the right-most table inwards.
    """
    composition = validate_composition(composition)
    if not composition:
        raise ValueError('p_n is defined for n >= 1')
    if not 0 <= alpha <= 1 or theta < 0:
        raise ValueError('need 0 <= alpha <= 1 and theta >= 0')
    remaining = sum(composition)
    log_p = 0.
    for m in reversed(composition):
        log_p += _log_r(remaining, m, alpha, theta)
        remaining -= m
    return float(np.exp(log_p))


def compositions(n):
    '''
    All compositions of n, as tuples.
    '''
    if n == 0:
        return [()]
    out = []
    for first in range(1, n + 1):
        out += [(first,) + rest for rest in compositions(n - first)]
    return out


def stationary_law(n, alpha, theta):
    '''
    p_n as a dictionary over every composition of n with positive mass.
    '''
    law = {c: composition_probability(c, alpha, theta)
           for c in compositions(n)}
    return {c: p for c, p in law.items() if p > 0}


def sample_stationary(n, alpha, theta, rng=None):
    '''
    A draw from p_n: n - 1 up-steps from (1).
    '''
    if n < 1:
        raise ValueError('n must be at least 1, got {}'.format(n))
    rng = ensure_rng(rng)
    composition = (1,)
    for _ in range(n - 1):
        composition = up_step(composition, alpha, theta, rng)
    return composition


def ocrp_at_levels(rng, start, params, levels):
    """
    One replicate: the compositions of a direct simulation at each of
    levels. Module-level so it can be sent to worker processes.
    """
    trajectory = simulate_ocrp(start, params, max(levels), rng)
    return [trajectory_value(trajectory, y) for y in levels]


def ocrp_trajectory_sample(rng, start, params, level_max):
    return simulate_ocrp(start, params, level_max, rng)
