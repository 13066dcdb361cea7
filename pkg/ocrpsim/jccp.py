"""
jccp: an overlay to build jumping chronological contour processes.

A contour process is a path of slope -1 with positive jumps, where each
jump carries the size path of one table (its mark) and the jump height is
the mark's lifetime. The Builder inserts new jumps end-on, keeping track
of the time and level at which the next jump can be placed.

On top of the Builder sit the constructions:
    build_forward: one tree started from a table of size n0, new tables
        arriving at rate alpha, stopped when the path first hits 0;
    build_concatenated: one independent forward path per initial table;
    build_negative: the excursions inserted at rate theta on the left;
    excursion_decomposition / reassemble: splitting a forward path into
        its excursions above the running minimum, and back.

Builds accept level_max: jumps that would start above level_max are never
drawn, and the time the path spends above level_max is cut out. The
resulting object is itself a valid contour path, and agrees in law with the
full path at every level below level_max.
"""
import logging
import warnings

import numpy as np

from .chains import simulate_chain, estimate_mean_lifetime
from .core import (Jump, MarkedPath, NonAbsorptionError, OutOfDomainError,
                   validate_composition, ensure_rng)

logger = logging.getLogger(__name__)

DEFAULT_MAX_JUMPS = 10**6


class Builder:

    def __init__(self, params=None, rng=None, max_jumps=DEFAULT_MAX_JUMPS,
                 **kwargs):
        '''
        params: OcrpParams; needed only to draw marks with add_table.
        rng: anything ensure_rng accepts.
        max_jumps: jump budget of a single path.

        kwargs are passed to new_path.
        '''
        self.params = params
        self.rng = ensure_rng(rng)
        self.max_jumps = max_jumps
        self.new_path(**kwargs)

    def new_path(self, origin=0., initial_level=0.):
        '''
        Start a new path at time origin from level initial_level.
        '''
        self.origin = float(origin)
        self.initial_level = float(initial_level)
        self.jumps = []

        # The time from which the next jump may be placed
        self.time = self.origin

    def level_at(self, time):
        """
        Level of the path under construction at time (>= the last jump).
        """
        if self.jumps:
            last = self.jumps[-1]
            return last.post_level - (time - last.time)
        return self.initial_level - (time - self.origin)

    def hitting_time(self, level=0.):
        '''
        Time at which the drift after the last jump reaches level.
        '''
        if self.jumps:
            last = self.jumps[-1]
            return last.time + (last.post_level - level)
        return self.origin + (self.initial_level - level)

    def add_jump(self, mark, time=None):
        """
        Appends a jump marked by mark at time (default: the current time),
        starting from the level the drift has reached.
        """
        if time is None:
            time = self.time
        if time < self.time or (self.jumps and time <= self.jumps[-1].time):
            raise ValueError('jumps must be added in increasing time order, '
                             'got {} after {}'.format(time, self.time))
        if len(self.jumps) >= self.max_jumps:
            logger.debug('jump budget %d exhausted', self.max_jumps)
            raise NonAbsorptionError(
                'path exceeded {} jumps; the mark law may be '
                'supercritical'.format(self.max_jumps))
        jump = Jump(time, self.level_at(time), mark)
        self.jumps.append(jump)
        self.time = jump.time
        return jump

    def add_table(self, size=None, time=None, left=False):
        '''
        Draws a mark path from size (default: from the entry law p, or
        p_minus if left) and adds it as a jump.
        '''
        spec = self.params.spec
        if size is None:
            size = spec.sample_entry(self.rng, left=left)
        mark = simulate_chain(spec, size, rng=self.rng)
        return self.add_jump(mark, time)

    def add_path(self, path, time=None):
        """
        Appends every jump of path (a MarkedPath with origin 0 starting
        from level 0), shifted to start at time and at the current level.
        Returns the time at which the appended path has returned to the
        level it started from.
        """
        if time is None:
            time = self.time
        for jump in path.jumps:
            self.add_jump(jump.mark, time + jump.time)
        return time + (path.horizon - path.origin)

    def finalize(self, horizon=None):
        '''
        Returns the MarkedPath, by default stopped when it hits 0.
        '''
        if horizon is None:
            horizon = self.hitting_time(0.)
        return MarkedPath(self.jumps, self.origin, horizon,
                          self.initial_level)


class ForwardJccp:

    def __init__(self, marked, stop_time, initial_size, level_max=None):
        """
        A forward contour path: the first jump is at time 0 from level 0,
        and the path is stopped at its first return to 0.

        marked: the MarkedPath on [0, stop_time].
        level_max: if not None, the path was built with jumps above
            level_max removed, and is valid for levels up to level_max.
        """
        self.marked = marked
        self.stop_time = float(stop_time)
        self.initial_size = int(initial_size)
        self.level_max = level_max

    @property
    def jumps(self):
        return self.marked.jumps

    @property
    def jump_count(self):
        return len(self.marked.jumps)

    @property
    def zeta0(self):
        return self.marked.jumps[0].height

    def __repr__(self):
        return 'ForwardJccp(n0={}, {} jumps, T={:.6g})'.format(
            self.initial_size, self.jump_count, self.stop_time)


def build_forward(n0, params, rng=None, level_max=None,
                  max_jumps=DEFAULT_MAX_JUMPS):
    """
    Builds the contour path of one tree: a jump at time 0 marked by a
    table-size path from n0, then new tables at the times of a Poisson
    process of rate alpha with marks from the entry law p, stopped when
    the path hits 0.
    """
    if int(n0) < 1:
        raise ValueError('n0 must be positive, got {}'.format(n0))
    b = Builder(params, rng, max_jumps)
    b.add_table(size=int(n0), time=0.)

    while True:
        last = b.jumps[-1]
        resume_time, resume_level = last.time, last.post_level
        if level_max is not None and resume_level > level_max:
            # Cut out the time spent above level_max.
            resume_time = last.time + (resume_level - level_max)
            resume_level = level_max
        if params.alpha == 0:
            break
        wait = b.rng.exponential(1 / params.alpha)
        if wait >= resume_level:
            break
        b.add_table(time=resume_time + wait)

    stop_time = resume_time + resume_level
    return ForwardJccp(b.finalize(stop_time), stop_time, n0, level_max)


def build_concatenated(start, params, rng=None, level_max=None,
                       max_jumps=DEFAULT_MAX_JUMPS):
    '''
    One independent forward path per table of start, left to right.
    '''
    start = validate_composition(start)
    if not start:
        raise ValueError('start must be a nonempty composition')
    rng = ensure_rng(rng)
    return [build_forward(n, params, rng, level_max, max_jumps)
            for n in start]


class NegativeJccp:

    def __init__(self, levels, excursions, level_max):
        """
        The negative-time part of the contour path: excursion j (j = 1,
        2, ...) is inserted at level A_j and occupies the times [L_j, R_j]
        with L_j = -A_j - (xi_1 + ... + xi_j), xi_j its duration. Between
        excursions the path drifts down; it reaches 0 at time 0.

        levels: increasing insertion levels A_j, all <= level_max.
        excursions: ForwardJccp excursions, in the same order.
        """
        self.levels = [float(a) for a in levels]
        self.excursions = list(excursions)
        self.level_max = float(level_max)

        durations = np.cumsum([e.stop_time for e in self.excursions])
        self.lefts = [-a - xi for a, xi in zip(self.levels, durations)]
        self.rights = [left + e.stop_time
                       for left, e in zip(self.lefts, self.excursions)]

        b = Builder()
        if self.excursions:
            b.new_path(origin=self.lefts[-1],
                       initial_level=self.levels[-1])
            for left, exc in zip(reversed(self.lefts),
                                 reversed(self.excursions)):
                b.add_path(exc.marked, left)
            self.marked = b.finalize(0.)
        else:
            self.marked = MarkedPath([], 0., 0.)

    def __len__(self):
        return len(self.excursions)

    @property
    def jumps(self):
        return self.marked.jumps

    def __repr__(self):
        return 'NegativeJccp({} excursions below level {})'.format(
            len(self), self.level_max)


def build_negative(params, level_max, rng=None,
                   max_jumps=DEFAULT_MAX_JUMPS):
    """
    Builds the excursions inserted at rate theta at the levels of a
    Poisson process, keeping those inserted at levels <= level_max (the
    only ones with jumps crossing such levels). Excursion j is a forward
    path started from the entry law p_minus and cut above
    level_max - A_j.
    """
    if not params.theta > 0:
        raise ValueError('the negative part needs theta > 0')
    if level_max < 0:
        raise ValueError('level_max must be nonnegative')
    rng = ensure_rng(rng)
    spec = params.spec

    levels, excursions = [], []
    level = rng.exponential(1 / params.theta)
    while level <= level_max:
        n = spec.sample_entry(rng, left=True)
        excursions.append(build_forward(n, params, rng, level_max - level,
                                        max_jumps))
        levels.append(level)
        level += rng.exponential(1 / params.theta)
    return NegativeJccp(levels, excursions, level_max)


# Excursions above the running minimum

def excursion_decomposition(forward):
    """
    Splits a forward path into its first jump and the excursions above
    the running minimum started by the later jumps.

    A jump starts an excursion iff its pre-level is the running minimum;
    the excursion lasts until the path returns to that level. Returns
    (first jump, [(A, excursion), ...]) with increasing starting levels
    A, i.e. in the order the corresponding tables appear as the level
    rises.
    """
    jumps = forward.jumps
    starts = []
    running_min = np.inf
    for i, jump in enumerate(jumps[1:], 1):
        if jump.pre_level <= running_min:
            starts.append(i)
            running_min = jump.pre_level

    excursions = []
    for k, i in enumerate(starts):
        end = starts[k + 1] if k + 1 < len(starts) else len(jumps)
        origin, base = jumps[i].time, jumps[i].pre_level
        b = Builder()
        for jump in jumps[i:end]:
            b.add_jump(jump.mark, jump.time - origin)
        stop_time = b.hitting_time(0.)
        excursion = ForwardJccp(b.finalize(stop_time), stop_time,
                                jumps[i].mark.initial_value,
                                None if forward.level_max is None
                                else forward.level_max - base)
        excursions.append((base, excursion))

    return jumps[0], sorted(excursions, key=lambda e: e[0])


def reassemble(first_jump, excursions, level_max=None):
    """
    Inverse of excursion_decomposition: the excursions are placed in
    decreasing order of their levels A, each when the drift from the
    first jump reaches A.
    """
    b = Builder()
    b.add_jump(first_jump.mark, 0.)
    for base, excursion in sorted(excursions, key=lambda e: -e[0]):
        time = b.hitting_time(base)
        b.add_path(excursion.marked, time)
    stop_time = b.hitting_time(0.)
    return ForwardJccp(b.finalize(stop_time), stop_time,
                       first_jump.mark.initial_value, level_max)


def ladder_levels(forward):
    '''
    Pre-jump levels of the jumps (after the first) that sit at the
    running minimum.
    '''
    levels = []
    running_min = np.inf
    for jump in forward.jumps[1:]:
        if jump.pre_level <= running_min:
            running_min = jump.pre_level
            levels.append(jump.pre_level)
    return levels


def check_criticality(params, rng=None, size=10**4):
    """
    Monte Carlo check of mu = sum_n p_n E_n(zeta) <= 1/alpha. Warns when
    the estimate exceeds 1/alpha by more than 3 standard errors.

    Returns (estimate, standard error); for the basic model mu = 1/alpha
    exactly and nothing is sampled.
    """
    if params.alpha == 0:
        return 0., 0.
    if params.is_basic:
        return 1 / params.alpha, 0.
    mu, se = estimate_mean_lifetime(params.spec, rng, size)
    logger.info('mean mark lifetime %.4g +- %.2g (critical value %.4g)',
                mu, se, 1 / params.alpha)
    if mu - 1 / params.alpha > 3 * se:
        warnings.warn('mean mark lifetime {:.4g} exceeds 1/alpha = {:.4g}: '
                      'the contour path may never return to 0'.format(
                          mu, 1 / params.alpha), UserWarning)
    return mu, se


def single_path_to_crossing(start, params, rng=None, max_tries=10**4,
                            max_jumps=DEFAULT_MAX_JUMPS):
    """
    One unstopped contour path from start[0], run to its k-th
    down-crossing of 0 (k = len(start)) and accepted only if the jumps
    crossing level 0 carry the sizes start[1:]. Rejection sampling; the
    acceptance probability is small for long start compositions.

    Returns the accepted MarkedPath on [0, T_k].
    """
    start = validate_composition(start)
    if not start:
        raise ValueError('start must be a nonempty composition')
    if params.alpha == 0 and len(start) > 1:
        raise ValueError('with alpha = 0 the path never returns above 0')
    rng = ensure_rng(rng)

    for attempt in range(max_tries):
        b = Builder(params, rng, max_jumps)
        b.add_table(size=start[0], time=0.)
        up_crossings, down_crossings = 1, 0
        accepted = True
        while True:
            last = b.jumps[-1]
            wait = rng.exponential(1 / params.alpha) \
                if params.alpha > 0 else np.inf
            if last.post_level > 0 and wait >= last.post_level:
                down_crossings += 1
                if down_crossings == len(start):
                    break
            jump = b.add_table(time=last.time + wait)
            if jump.crosses(0.):
                if up_crossings == len(start) or \
                        jump.value_at_level(0.) != start[up_crossings]:
                    accepted = False
                    break
                up_crossings += 1
        if accepted:
            logger.debug('accepted a single path after %d tries',
                         attempt + 1)
            return b.finalize()
    raise NonAbsorptionError('no accepted path in {} tries'.format(
        max_tries))


def check_level(parts, y):
    '''
    Raises OutOfDomainError if a pruned part is queried above its
    level_max.
    '''
    for part in parts:
        level_max = getattr(part, 'level_max', None)
        if level_max is not None and y > level_max:
            raise OutOfDomainError(
                'level {} above the level {} the path was built '
                'for'.format(y, level_max))
