"""
chains: exact event-driven simulation of integer-valued Markov chains
on {0, 1, 2, ...}.

Three families of Q-matrix are supported through RateSpec:
    'qalpha': the table-size chain, up-rate m - alpha, down-rate m;
    'total_mass': the customer-count chain, up-rate m + theta,
        down-rate m;
    'general': any Q-matrix with 0 absorbing, given as a function
        m -> {l: q(m, l)}, or as a linear birth-death chain.

Simulation is Gillespie-style (competing exponential clocks). The
nearest-neighbour families additionally have a vectorised sampler that
runs many replicates at once; it follows the same law as simulate_chain.
"""
import logging

import numpy as np
import scipy.linalg

from .core import (StepFunction, NonAbsorptionError, OracleUnreliableError,
                   ensure_rng)

logger = logging.getLogger(__name__)

DEFAULT_MAX_EVENTS = 10**7


def _check_distribution(dist, name):
    if dist is None:
        return {1: 1.0}
    dist = {int(n): float(w) for n, w in dict(dist).items() if float(w) > 0}
    if not dist or min(dist) < 1:
        raise ValueError('{} must be a distribution on positive '
                         'integers, got {}'.format(name, dist))
    if abs(sum(dist.values()) - 1) > 1e-9:
        raise ValueError('{} must sum to 1, got {}'.format(
            name, sum(dist.values())))
    return dist


class RateSpec:

    kinds = ('qalpha', 'total_mass', 'general')

    def __init__(self, kind, alpha=None, theta=None, rates=None,
                 birth=None, death=None, p=None, p_minus=None):
        """
        A Q-matrix on {0, 1, ...} together with the entry distributions
        p (sizes of tables inserted to the right of a table) and p_minus
        (sizes of tables inserted on the far left).

        Prefer the constructors RateSpec.qalpha, RateSpec.total_mass,
        RateSpec.general and RateSpec.linear_birth_death.
        """
        if kind not in self.kinds:
            raise ValueError('Unknown rate spec kind {}'.format(kind))
        self.kind = kind
        self.alpha = alpha
        self.theta = theta
        self.rates = rates
        self.birth = birth
        self.death = death
        self.p = _check_distribution(p, 'p')
        self.p_minus = _check_distribution(p_minus, 'p_minus')

        if kind == 'qalpha':
            if alpha is None or not 0 <= alpha <= 1:
                raise ValueError('Qalpha needs 0 <= alpha <= 1, got '
                                 '{}'.format(alpha))
        elif kind == 'total_mass':
            if theta is None or theta < 0:
                raise ValueError('TotalMass needs theta >= 0, got '
                                 '{}'.format(theta))
        elif birth is not None or death is not None:
            if birth is None or death is None or birth < 0 or death <= 0:
                raise ValueError('a linear birth-death spec needs birth >= 0 '
                                 'and death > 0')
        elif not callable(rates):
            raise ValueError('a general spec needs a rate function '
                             'm -> {l: rate}')

    @classmethod
    def qalpha(cls, alpha, p=None, p_minus=None):
        return cls('qalpha', alpha=alpha, p=p, p_minus=p_minus)

    @classmethod
    def total_mass(cls, theta):
        return cls('total_mass', theta=theta)

    @classmethod
    def general(cls, rates, p=None, p_minus=None):
        return cls('general', rates=rates, p=p, p_minus=p_minus)

    @classmethod
    def linear_birth_death(cls, birth, death, p=None, p_minus=None):
        '''
        The general spec with q(m, m+1) = birth*m, q(m, m-1) = death*m.
        '''
        return cls('general', birth=birth, death=death, p=p,
                   p_minus=p_minus)

    @property
    def is_birth_death(self):
        return self.kind != 'general' or self.birth is not None

    @property
    def absorbing(self):
        '''
        Whether 0 is an absorbing state.
        '''
        return self.kind != 'total_mass'

    def transitions(self, m):
        """
        Positive off-diagonal rates out of state m, as {l: q(m, l)}.
        """
        m = int(m)
        if m < 0:
            raise ValueError('states are nonnegative, got {}'.format(m))
        if self.is_birth_death:
            up, down = self.birth_death_rates(m)
            out = {}
            if up > 0:
                out[m + 1] = float(up)
            if down > 0:
                out[m - 1] = float(down)
            return out

        if m == 0:
            return {}
        out = {}
        for l, rate in dict(self.rates(m)).items():
            rate = float(rate)
            if rate < 0 or not np.isfinite(rate):
                raise ValueError('rate q({}, {}) = {} is not a finite '
                                 'nonnegative number'.format(m, l, rate))
            if int(l) < 0:
                raise ValueError('q({}, {}) targets a negative state'
                                 .format(m, l))
            if rate > 0 and int(l) != m:
                out[int(l)] = rate
        return out

    def birth_death_rates(self, m):
        """
        (up-rate, down-rate) for a state or an array of states, for the
        nearest-neighbour families.
        """
        m = np.asarray(m)
        if self.kind == 'qalpha':
            up = np.where(m > 0, m - self.alpha, 0.)
            down = m * 1.
        elif self.kind == 'total_mass':
            up = m + self.theta * 1.
            down = m * 1.
        elif self.birth is not None:
            up = self.birth * m
            down = self.death * m
        else:
            raise ValueError('a general rate function has no birth-death '
                             'form')
        if up.ndim == 0:
            return float(up), float(down)
        return up, down

    def total_rate(self, m):
        return sum(self.transitions(m).values())

    def sample_entry(self, rng, left=False):
        '''
        Draws an initial table size from p (or p_minus if left).
        '''
        dist = self.p_minus if left else self.p
        if len(dist) == 1:
            return next(iter(dist))
        sizes = list(dist)
        return int(sizes[rng.choice(len(sizes), p=list(dist.values()))])

    def to_dict(self):
        if self.kind == 'general' and self.birth is None:
            raise ValueError('a general spec given by a rate function '
                             'cannot be saved')
        data = {'kind': self.kind,
                'p': {str(k): v for k, v in self.p.items()},
                'p_minus': {str(k): v for k, v in self.p_minus.items()}}
        for key in ['alpha', 'theta', 'birth', 'death']:
            if getattr(self, key) is not None:
                data[key] = getattr(self, key)
        return data

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        kind = data.pop('kind')
        return cls(kind, **data)

    def __repr__(self):
        if self.kind == 'qalpha':
            return 'RateSpec.qalpha({})'.format(self.alpha)
        if self.kind == 'total_mass':
            return 'RateSpec.total_mass({})'.format(self.theta)
        if self.birth is not None:
            return 'RateSpec.linear_birth_death({}, {})'.format(
                self.birth, self.death)
        return 'RateSpec.general({!r})'.format(self.rates)


def _next_state(rates, rng):
    targets = list(rates)
    cumulative = np.cumsum(list(rates.values()))
    u = rng.random() * cumulative[-1]
    return targets[min(np.searchsorted(cumulative, u, side='right'),
                       len(targets) - 1)], cumulative[-1]


def simulate_chain(spec, start, horizon=None, rng=None,
                   max_events=DEFAULT_MAX_EVENTS):
    """
    Runs the chain from start, either until absorption at 0 (horizon
    None) or until the horizon.

    Returns a StepFunction: absorbed if 0 was hit (lifetime = absorption
    time), otherwise open with lifetime = horizon.
    """
    rng = ensure_rng(rng)
    start = int(start)
    if start < 0:
        raise ValueError('start must be nonnegative, got {}'.format(start))
    if horizon is None and not spec.absorbing:
        raise ValueError('{} has no absorbing state, give a horizon'
                         .format(spec))
    if horizon is not None and horizon <= 0:
        raise ValueError('horizon must be positive')

    if start == 0 and spec.absorbing:
        return StepFunction(0)

    t = 0.
    m = start
    events = []
    while True:
        rates = spec.transitions(m)
        if not rates:
            if horizon is None:
                raise NonAbsorptionError(
                    '{} is stuck in state {}'.format(spec, m))
            break
        total = sum(rates.values())
        t += rng.exponential(1 / total)
        if horizon is not None and t >= horizon:
            break
        m, _ = _next_state(rates, rng)
        events.append((t, m))
        if m == 0 and spec.absorbing:
            return StepFunction(start, events)
        if len(events) >= max_events:
            logger.debug('event budget %d exhausted for %s', max_events,
                         spec)
            raise NonAbsorptionError(
                'no absorption after {} events of {}'.format(
                    max_events, spec))

    return StepFunction(start, events, lifetime=horizon, absorbed=False)


def sample_absorption_time(spec, start, rng=None,
                           max_events=DEFAULT_MAX_EVENTS):
    '''
    One draw of the absorption time zeta from start.
    '''
    if not spec.absorbing:
        raise ValueError('{} carries no absorption guarantee'.format(spec))
    if int(start) < 1:
        raise ValueError('start must be positive, got {}'.format(start))
    rng = ensure_rng(rng)
    t = 0.
    m = int(start)
    for _ in range(max_events):
        rates = spec.transitions(m)
        if not rates:
            raise NonAbsorptionError(
                '{} is stuck in state {}'.format(spec, m))
        m, total = _next_state(rates, rng)
        t += rng.exponential(1 / total)
        if m == 0:
            return t
    logger.debug('event budget %d exhausted for %s', max_events, spec)
    raise NonAbsorptionError('no absorption after {} events of {}'.format(
        max_events, spec))


def sample_marginals(spec, start, times, size, rng=None,
                     until_absorption=False, max_events=DEFAULT_MAX_EVENTS,
                     horizon=None, censor=False):
    """
    Vectorised exact simulation of size replicates of a birth-death spec.

    @start: initial state, an int or an array of length size.
    @times: times at which to record the state.
    @until_absorption: keep running past the last time until every
        replicate is absorbed.
    @horizon: with until_absorption, also stop a replicate at its first
        event after horizon.
    @max_events: events per replicate. Above it the run raises
        NonAbsorptionError, or with censor=True stops the replicates
        still running.

    Returns a dictionary with
        'values': array (size, len(times)) of states at the given times,
            -1 where a censored replicate never got there;
        'absorption': array of absorption times (inf if not absorbed
            during the run);
        'clock', 'state': time and state at which each replicate stopped,
            a stopping time of its chain;
        'censored': replicates stopped by the event budget.
    """
    rng = ensure_rng(rng)
    if until_absorption and not spec.absorbing:
        raise ValueError('{} carries no absorption guarantee'.format(spec))
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or np.any(np.diff(times) < 0) or np.any(times < 0):
        raise ValueError('times must be a nondecreasing list of '
                         'nonnegative numbers')
    if horizon is not None and not horizon > 0:
        raise ValueError('horizon must be positive, got {}'.format(horizon))

    state = np.broadcast_to(np.asarray(start, dtype=np.int64),
                            (size,)).copy()
    clock = np.zeros(size)
    next_k = np.zeros(size, dtype=np.int64)
    values = np.zeros((size, len(times)), dtype=np.int64)
    absorption = np.full(size, np.inf)
    censored = np.zeros(size, dtype=bool)
    if spec.absorbing:
        absorption[state == 0] = 0.

    active = np.arange(size)
    rounds = 0
    while active.size:
        m = state[active]
        up, down = spec.birth_death_rates(m)
        total = up + down
        with np.errstate(divide='ignore'):
            step = rng.standard_exponential(active.size) / total
        t_new = clock[active] + step

        pending = next_k[active] < len(times)
        while np.any(pending):
            idx = np.flatnonzero(pending)
            k = next_k[active[idx]]
            due = times[k] < t_new[idx]
            idx, k = idx[due], k[due]
            values[active[idx], k] = m[idx]
            next_k[active[idx]] += 1
            pending[:] = False
            pending[idx] = next_k[active[idx]] < len(times)

        moved = np.isfinite(t_new)
        goes_up = rng.random(active.size) * total < up
        m_new = np.where(goes_up, m + 1, m - 1)
        state[active[moved]] = m_new[moved]
        clock[active[moved]] = t_new[moved]
        if spec.absorbing:
            hit = moved & (m_new == 0)
            absorption[active[hit]] = t_new[hit]

        recorded = next_k[active] == len(times)
        if until_absorption:
            done = state[active] == 0
            if horizon is not None:
                done |= clock[active] > horizon
            finished = ~moved | (recorded & done)
        else:
            finished = ~moved | recorded
        active = active[~finished]

        rounds += 1
        if rounds >= max_events and active.size:
            if not censor:
                raise NonAbsorptionError(
                    '{} replicates still running after {} events of {}'
                    .format(active.size, max_events, spec))
            logger.debug('censored %d replicates of %s after %d events',
                         active.size, spec, max_events)
            censored[active] = True
            unseen = np.arange(len(times)) >= next_k[active][:, None]
            values[active] = np.where(unseen, -1, values[active])
            break

    logger.debug('vectorised run of %s: %d replicates, %d rounds',
                 spec, size, rounds)
    return {'values': values, 'absorption': absorption, 'clock': clock,
            'state': state, 'censored': censored}


def sample_absorption_times(spec, start, size, rng=None,
                            max_events=DEFAULT_MAX_EVENTS, horizon=None,
                            censor=False):
    """
    size independent absorption times from start (int or array), inf for
    replicates stopped by horizon or by a censored budget. Uses the
    vectorised sampler for birth-death specs.
    """
    rng = ensure_rng(rng)
    if spec.is_birth_death:
        return sample_marginals(spec, start, [], size, rng,
                                until_absorption=True,
                                max_events=max_events, horizon=horizon,
                                censor=censor)['absorption']
    if horizon is not None or censor:
        raise ValueError('horizon and censor need a birth-death spec')
    starts = np.broadcast_to(np.asarray(start), (size,))
    return np.array([sample_absorption_time(spec, s, rng, max_events)
                     for s in starts])


def truncated_generator(spec, cap):
    """
    Dense generator on {0, ..., cap} plus one absorbing overflow state
    (index cap + 1) collecting every move above cap. Rows sum to zero.
    """
    cap = int(cap)
    if cap < 1:
        raise ValueError('cap must be at least 1, got {}'.format(cap))
    Q = np.zeros((cap + 2, cap + 2))
    for m in range(cap + 1):
        for l, rate in spec.transitions(m).items():
            Q[m, min(l, cap + 1)] += rate
        Q[m, m] = -Q[m].sum()
    return Q


def marginal_by_expm(spec, start, cap, t, bound=1e-4):
    """
    The law of the chain at time t from start, as the start row of
    exp(t Q_cap). The last entry is the overflow mass, an upper bound on
    the truncation error; above bound the oracle is refused.
    """
    if not 0 <= start <= cap:
        raise ValueError('start {} outside 0..{}'.format(start, cap))
    if t < 0:
        raise ValueError('t must be nonnegative')
    Q = truncated_generator(spec, cap)
    row = scipy.linalg.expm(t * Q)[int(start)]
    row = np.clip(row, 0, None)
    overflow = row[-1]
    logger.debug('expm oracle for %s at t=%s, cap=%d: overflow %.3g',
                 spec, t, cap, overflow)
    if overflow > bound:
        raise OracleUnreliableError(
            'overflow mass {:.3g} above the bound {:.3g}; raise cap'.format(
                overflow, bound))
    return row


def estimate_mean_lifetime(spec, rng=None, size=10**4,
                           max_events=DEFAULT_MAX_EVENTS):
    '''
    Monte Carlo estimate of mu = sum_n p_n E_n(zeta), the mean jump
    height of the marked path. Returns (estimate, standard error).
    '''
    rng = ensure_rng(rng)
    sizes = list(spec.p)
    starts = np.array(sizes)[rng.choice(len(sizes), size=size,
                                        p=list(spec.p.values()))]
    zetas = sample_absorption_times(spec, starts, size, rng, max_events)
    return float(zetas.mean()), float(zetas.std(ddof=1) / np.sqrt(size))
