"""
core: shared domain types for ocrpsim.

Compositions are plain tuples of positive integers (table sizes, left to
right). Integer-valued paths are stored sparsely as event lists
(StepFunction), and the marked Levy paths (MarkedPath) are lists of jumps,
each jump carrying the StepFunction that records the size of one table
along its lifetime.

Also contains the random-source plumbing shared by every sampler and the
JSON-lines codecs used by the command line tools.
"""
import json
import logging
from concurrent.futures import ProcessPoolExecutor

import numpy as np

logger = logging.getLogger(__name__)


class OutOfDomainError(ValueError):
    pass


class NonAbsorptionError(RuntimeError):
    pass


class OracleUnreliableError(RuntimeError):
    pass


class InsufficientCountsError(ValueError):
    pass


# Compositions

def validate_composition(composition):
    '''
    Returns the composition as a tuple of ints, raising ValueError
    if any part is not a positive integer.
    '''
    parts = tuple(int(n) for n in composition)
    for n, orig in zip(parts, composition):
        if n < 1 or n != orig:
            raise ValueError(
                'composition parts must be positive integers, '
                'got {}'.format(tuple(composition)))
    return parts


def total_mass(composition):
    return sum(composition)


def parse_composition(text):
    '''
    Parses '1,2,3' (or '' for the empty composition) into a tuple.
    '''
    text = text.strip().strip('()')
    if not text:
        return ()
    return validate_composition(int(x) for x in text.split(',') if x.strip())


# Random sources

class RandomSource:

    def __init__(self, seed, stream=0):
        """
        A reproducible random stream. Identical (seed, stream) pairs give
        bit-identical draws; distinct streams are independent (they are
        distinct spawn keys of one numpy SeedSequence).

        @seed: nonnegative integer (64 bit).
        @stream: nonnegative integer or tuple of nonnegative integers.
        """
        if isinstance(stream, (int, np.integer)):
            stream = (int(stream),)
        self.seed = int(seed)
        self.stream = tuple(int(s) for s in stream)
        seq = np.random.SeedSequence(self.seed, spawn_key=self.stream)
        self.generator = np.random.Generator(np.random.PCG64(seq))

    def spawn(self, index):
        return RandomSource(self.seed, self.stream + (int(index),))

    def __repr__(self):
        return 'RandomSource(seed={}, stream={})'.format(
            self.seed, self.stream)


def ensure_rng(rng=None):
    '''
    Turns None, an integer seed, a RandomSource or a Generator
    into a numpy Generator.
    '''
    if isinstance(rng, RandomSource):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None or isinstance(rng, (int, np.integer)):
        return np.random.default_rng(rng)
    raise ValueError('Cannot make a random generator from {!r}'.format(rng))


def _run_chunk(sampler, args, seed, stream, count):
    rng = RandomSource(seed, stream).generator
    return [sampler(rng, *args) for _ in range(count)]


def sample_replicates(sampler, args, count, seed, stream=0,
                      workers=1, chunk_size=1000):
    '''
    Draws count replicates of sampler(rng, *args).

    Replicates are cut into chunks of chunk_size; chunk j always uses the
    stream (stream, j) of seed, so the result does not depend on the
    number of workers. With workers > 1 the chunks run in a process pool
    (sampler must then be a module-level function).
    '''
    if count < 1:
        raise ValueError('count must be positive, got {}'.format(count))
    if isinstance(stream, (int, np.integer)):
        stream = (int(stream),)
    chunks = [(j, min(chunk_size, count - j * chunk_size))
              for j in range((count + chunk_size - 1) // chunk_size)]

    if workers is None or workers <= 1 or len(chunks) == 1:
        results = [_run_chunk(sampler, args, seed, tuple(stream) + (j,), n)
                   for j, n in chunks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_chunk, sampler, args, seed,
                                   tuple(stream) + (j,), n)
                       for j, n in chunks]
            results = [f.result() for f in futures]

    logger.debug('drew %d replicates of %s in %d chunks',
                 count, getattr(sampler, '__name__', sampler), len(chunks))
    return [x for chunk in results for x in chunk]


# Integer-valued paths

class StepFunction:

    def __init__(self, initial_value, events=(), lifetime=None,
                 absorbed=True):
        """
        A right-continuous integer-valued path on [0, lifetime).

        @initial_value: value at time 0.
        @events: sequence of (time, new value) pairs with strictly
            increasing times.
        @lifetime: the lifetime zeta. For an absorbed path it is the time
            of the last event, whose value must be 0, and 0 occurs nowhere
            else. For an open path (truncated at a horizon) it is the
            horizon and must exceed every event time.
        """
        self.initial_value = int(initial_value)
        self.times = np.array([float(t) for t, _ in events], dtype=float)
        self.values = np.array([int(v) for _, v in events], dtype=np.int64)
        self.absorbed = bool(absorbed)

        if self.initial_value < 0 or np.any(self.values < 0):
            raise ValueError('step function values must be nonnegative')
        if np.any(self.times < 0) or np.any(np.diff(self.times) <= 0):
            raise ValueError('event times must be nonnegative and '
                             'strictly increasing')

        if self.absorbed:
            if len(self.times) == 0:
                # A path started at 0 is absorbed from the outset.
                if self.initial_value != 0:
                    raise ValueError('an absorbed path needs a final event '
                                     'to 0')
                self.lifetime = 0.0
            else:
                if self.values[-1] != 0 or np.any(self.values[:-1] == 0) \
                        or self.initial_value == 0:
                    raise ValueError('an absorbed path takes the value 0 '
                                     'only at its last event')
                self.lifetime = float(self.times[-1])
                if lifetime is not None and float(lifetime) != self.lifetime:
                    raise ValueError('lifetime {} does not match the '
                                     'absorption time {}'.format(
                                         lifetime, self.lifetime))
        else:
            if lifetime is None:
                raise ValueError('an open path needs a lifetime (horizon)')
            self.lifetime = float(lifetime)
            if len(self.times) and self.times[-1] >= self.lifetime:
                raise ValueError('event times must be below the horizon')

    @property
    def events(self):
        return list(zip(self.times.tolist(), self.values.tolist()))

    def __len__(self):
        return len(self.times)

    def evaluate(self, s):
        """
        Value in force at time s, for 0 <= s < lifetime.
        """
        if not 0 <= s < self.lifetime:
            raise OutOfDomainError(
                'time {} outside [0, {})'.format(s, self.lifetime))
        return self._value_at(np.searchsorted(self.times, s, side='right'))

    def evaluate_level(self, y, offset):
        """
        Value in force at level y when the path is started at level
        offset, comparing y with the event levels offset + t directly.
        """
        k = np.searchsorted(offset + self.times, y, side='right')
        return self._value_at(k)

    def _value_at(self, k):
        if k == 0:
            return self.initial_value
        return int(self.values[k - 1])

    def maximum(self):
        if len(self.values):
            return max(self.initial_value, int(self.values.max()))
        return self.initial_value

    def to_dict(self):
        return {'initial': self.initial_value,
                'times': self.times.tolist(),
                'values': self.values.tolist(),
                'lifetime': self.lifetime,
                'absorbed': self.absorbed}

    @classmethod
    def from_dict(cls, data):
        return cls(data['initial'],
                   list(zip(data['times'], data['values'])),
                   lifetime=data['lifetime'],
                   absorbed=data['absorbed'])

    def __eq__(self, other):
        return (isinstance(other, StepFunction)
                and self.initial_value == other.initial_value
                and self.lifetime == other.lifetime
                and self.absorbed == other.absorbed
                and np.array_equal(self.times, other.times)
                and np.array_equal(self.values, other.values))

    def __repr__(self):
        return 'StepFunction({}, {} events, lifetime={:.6g})'.format(
            self.initial_value, len(self), self.lifetime)


def evaluate_step(f, s):
    return f.evaluate(s)


# Marked paths

class Jump:

    def __init__(self, time, pre_level, mark, post_level=None):
        """
        A jump of a marked path at time U from level B to level
        D = B + mark.lifetime, marked by an absorbed StepFunction.
        """
        if not mark.absorbed or mark.lifetime <= 0:
            raise ValueError('jump marks must be absorbed paths with '
                             'positive lifetime')
        self.time = float(time)
        self.pre_level = float(pre_level)
        self.mark = mark
        self.post_level = self.pre_level + mark.lifetime
        if post_level is not None and \
                abs(float(post_level) - self.post_level) > \
                1e-9 * max(1.0, abs(self.post_level)):
            raise ValueError('jump height {} differs from the mark '
                             'lifetime {}'.format(
                                 float(post_level) - self.pre_level,
                                 mark.lifetime))

    @property
    def height(self):
        return self.mark.lifetime

    def crosses(self, y):
        return self.pre_level <= y < self.post_level

    def value_at_level(self, y):
        """
        Mark value at level y, for pre_level <= y < post_level.
        """
        return self.mark.evaluate_level(y, self.pre_level)

    def shifted(self, dt, dy):
        return Jump(self.time + dt, self.pre_level + dy, self.mark)

    def to_dict(self):
        return {'U': self.time, 'B': self.pre_level, 'D': self.post_level,
                'mark': self.mark.to_dict()}

    @classmethod
    def from_dict(cls, data):
        return cls(data['U'], data['B'], StepFunction.from_dict(data['mark']),
                   post_level=data['D'])

    def __repr__(self):
        return 'Jump(U={:.6g}, B={:.6g}, D={:.6g})'.format(
            self.time, self.pre_level, self.post_level)


class MarkedPath:

    # Relative tolerance for the slope -1 check between jumps.
    EQ_TOL = 1e-9

    def __init__(self, jumps, origin, horizon, initial_level=0.0):
        """
        A cadlag path of slope -1 with positive jumps on [origin, horizon].

        @jumps: Jump objects with strictly increasing times in
            [origin, horizon].
        @initial_level: the level X_{origin-} just before origin.
        """
        self.jumps = list(jumps)
        self.origin = float(origin)
        self.horizon = float(horizon)
        self.initial_level = float(initial_level)
        if self.horizon < self.origin:
            raise ValueError('horizon before origin')

        times = np.array([j.time for j in self.jumps], dtype=float)
        if len(times) and (times[0] < self.origin
                           or times[-1] > self.horizon
                           or np.any(np.diff(times) <= 0)):
            raise ValueError('jump times must increase strictly within '
                             '[origin, horizon]')
        self._times = times
        self._heights = np.array([j.height for j in self.jumps], dtype=float)
        self._cum_heights = np.concatenate([[0.0], np.cumsum(self._heights)])

        level, t = self.initial_level, self.origin
        for jump in self.jumps:
            expected = level - (jump.time - t)
            if abs(jump.pre_level - expected) > \
                    self.EQ_TOL * max(1.0, abs(expected)):
                raise ValueError('{} does not continue the unit drift '
                                 '(expected pre-level {})'.format(
                                     jump, expected))
            level, t = jump.post_level, jump.time

    def __len__(self):
        return len(self.jumps)

    def at_time(self, t):
        """
        X_t, reconstructed from the jumps and the unit downward drift.
        """
        if not self.origin <= t <= self.horizon:
            raise OutOfDomainError('time {} outside [{}, {}]'.format(
                t, self.origin, self.horizon))
        k = np.searchsorted(self._times, t, side='right')
        if k == 0:
            return self.initial_level - (t - self.origin)
        # Restart from the last jump so that X_T = 0 holds to rounding.
        last = self.jumps[k - 1]
        return last.post_level - (t - last.time)

    def running_minimum_before(self, k):
        '''
        inf of X on [origin, U_k), for the k-th jump.
        '''
        level = self.initial_level
        for jump in self.jumps[:k]:
            level = min(level, jump.pre_level)
        return min(level, self.jumps[k].pre_level)

    def to_records(self):
        '''
        JSON-serialisable records: one header, then one record per jump.
        '''
        yield {'type': 'path', 'origin': self.origin,
               'horizon': self.horizon, 'initial_level': self.initial_level,
               'jumps': len(self.jumps)}
        for jump in self.jumps:
            yield {'type': 'jump', **jump.to_dict()}

    @classmethod
    def from_records(cls, records):
        records = list(records)
        header = records[0]
        if header.get('type') != 'path':
            raise ValueError('first record must be a path header')
        jumps = [Jump.from_dict(r) for r in records[1:]]
        return cls(jumps, header['origin'], header['horizon'],
                   header['initial_level'])


def path_at_time(path, t):
    return path.at_time(t)


# JSON lines

def write_records(records, outfile):
    for record in records:
        outfile.write(json.dumps(record))
        outfile.write('\n')


def read_records(infile):
    return [json.loads(line) for line in infile if line.strip()]


def dumps_path(path):
    return ''.join(json.dumps(r) + '\n' for r in path.to_records())


def loads_path(text):
    return MarkedPath.from_records(
        json.loads(line) for line in text.splitlines() if line.strip())


def trajectory_records(trajectory, **extra):
    '''
    Level-stamped composition records for a (level, composition)
    trajectory; used for both skewer and direct oCRP trajectories.
    '''
    for level, composition in trajectory:
        yield {'level': level, 'composition': list(composition), **extra}


def trajectory_value(trajectory, y):
    '''
    Composition in force at level y in a right-continuous trajectory
    [(level, composition), ...] with increasing levels.
    '''
    levels = [level for level, _ in trajectory]
    k = np.searchsorted(levels, y, side='right')
    if k == 0:
        raise OutOfDomainError('level {} before the trajectory start'
                               .format(y))
    return trajectory[k - 1][1]
