"""
besq: Euler-Maruyama simulation of squared Bessel processes

    dY = delta ds + 2 sqrt(|Y|) dW,   Y(0) = a,

vectorised across independent paths. Three boundary modes:
    'extended': the SDE as written, paths may cross 0;
    'absorb': paths are frozen at 0 from their first crossing, whose
        time is refined by linear interpolation inside the step (and
        optionally by a Brownian bridge test for steps that end above 0);
    'reflect': |Y| is kept after each step.
The default mode is 'absorb' for delta <= 0 and 'reflect' for delta > 0
(a >= 0), and 'extended' for a < 0.
"""
import logging

import numpy as np

from .core import ensure_rng

logger = logging.getLogger(__name__)

modes = ('extended', 'absorb', 'reflect')


class BesqParams:

    def __init__(self, a, delta, step=1e-3, horizon=1., mode=None,
                 bridge=True):
        self.a = float(a)
        self.delta = float(delta)
        self.step = float(step)
        self.horizon = float(horizon)
        self.bridge = bool(bridge)
        if mode is None:
            if self.a < 0:
                mode = 'extended'
            elif self.delta <= 0:
                mode = 'absorb'
            else:
                mode = 'reflect'
        if mode not in modes:
            raise ValueError('Unknown boundary mode {}'.format(mode))
        self.mode = mode

        if not self.step > 0 or not self.horizon > 0:
            raise ValueError('step and horizon must be positive')
        if self.mode != 'extended' and self.a < 0:
            raise ValueError('{} mode needs a >= 0'.format(self.mode))
        if self.mode == 'absorb' and self.delta > 0:
            raise ValueError('absorption at 0 needs delta <= 0')

    @property
    def absorb_mode(self):
        return self.mode == 'absorb'

    @property
    def n_steps(self):
        return max(1, int(np.ceil(self.horizon / self.step - 1e-9)))

    def negated(self):
        '''
        Parameters of -Y, which solves the same SDE from -a with -delta.
        '''
        return BesqParams(-self.a, -self.delta, self.step, self.horizon,
                          'extended', self.bridge)

    def to_dict(self):
        return {'a': self.a, 'delta': self.delta, 'step': self.step,
                'horizon': self.horizon, 'mode': self.mode,
                'bridge': self.bridge}

    def __repr__(self):
        return 'BesqParams({})'.format(self.to_dict())


def run_besq(params, rng=None, size=1, times=None):
    """
    Simulates size paths and records them at times (default: every grid
    point). Record times are rounded to the grid.

    Returns a dictionary with
        'times': the recorded grid times,
        'values': array (size, len(times)),
        'absorption': first crossing times of 0 (inf if none; absorb
            mode only),
        'touched': per path, whether it reached 0 or below.
    """
    rng = ensure_rng(rng)
    n_steps = params.n_steps
    h = params.horizon / n_steps
    if times is None:
        record = np.arange(n_steps + 1)
    else:
        times = np.asarray(times, dtype=float)
        if np.any(times < 0) or np.any(times > params.horizon * (1 + 1e-12)):
            raise ValueError('record times must lie in [0, horizon]')
        record = np.rint(times / h).astype(int)
    slots = {}
    for j, k in enumerate(record):
        slots.setdefault(int(k), []).append(j)

    y = np.full(size, params.a)
    values = np.empty((size, len(record)))
    absorption = np.full(size, np.inf)
    touched = np.zeros(size, dtype=bool)
    absorbed = np.zeros(size, dtype=bool)
    if params.absorb_mode and params.a == 0:
        absorbed[:] = touched[:] = True
        absorption[:] = 0.

    for j in slots.get(0, []):
        values[:, j] = y
    last = max(slots)
    for k in range(1, last + 1):
        noise = rng.standard_normal(size)
        y_new = y + params.delta * h + 2 * np.sqrt(np.abs(y) * h) * noise

        if params.absorb_mode:
            live = ~absorbed
            crossed = live & (y_new <= 0)
            with np.errstate(invalid='ignore', divide='ignore'):
                frac = np.where(crossed, y / (y - y_new), 0.)
            if params.bridge:
                # Crossing inside a step that ends above 0.
                above = live & ~crossed
                u = rng.random(size)
                with np.errstate(over='ignore'):
                    hit = above & (u < np.exp(-y_new / (2 * h)))
                frac = np.where(hit, 0.5, frac)
                crossed |= hit
            absorption[crossed] = (k - 1 + frac[crossed]) * h
            absorbed |= crossed
            touched |= crossed
            y_new[absorbed] = 0.
        elif params.mode == 'reflect':
            touched |= y_new <= 0
            y_new = np.abs(y_new)
        else:
            touched |= (y_new <= 0) if params.a > 0 else (y_new >= 0)

        y = y_new
        for j in slots.get(k, []):
            values[:, j] = y

    logger.debug('BESQ run %s: %d paths, %d steps, %d touched 0',
                 params, size, last, int(touched.sum()))
    return {'times': record * h, 'values': values,
            'absorption': absorption, 'touched': touched}


def simulate_besq(params, rng=None, size=None):
    '''
    Full paths on the grid k * step, k = 0..n_steps. Returns
    (grid, paths); paths has shape (n_steps + 1,) for size None.
    '''
    out = run_besq(params, rng, 1 if size is None else size)
    paths = out['values'][0] if size is None else out['values']
    return out['times'], paths


def besq_marginal_sample(params, s, rng=None, size=None):
    """
    Y(s) for one path (size None) or for size independent paths.
    """
    if not 0 <= s <= params.horizon:
        raise ValueError('s must lie in [0, horizon]')
    out = run_besq(params, rng, 1 if size is None else size, times=[s])
    values = out['values'][:, 0]
    return float(values[0]) if size is None else values


def besq_absorption_times(params, rng=None, size=1):
    '''
    First hitting times of 0 within the horizon (inf if not hit).
    '''
    if not params.absorb_mode:
        raise ValueError('absorption times need absorb mode')
    return run_besq(params, rng, size, times=[params.horizon])['absorption']
