"""
skewer: reading compositions off contour paths.

The skewer at level y lists, left to right, the mark values at y of
every jump whose level interval [B, D) contains y: first the jumps of
the negative part, then those of each forward part, each in time order.
"""
import bisect
import logging

import numpy as np

from .core import ensure_rng, validate_composition, trajectory_value
from .jccp import (build_concatenated, build_negative, check_level)

logger = logging.getLogger(__name__)


def _parts(paths, negative=None):
    if not isinstance(paths, (list, tuple)):
        paths = [paths]
    return ([negative] if negative is not None else []) + list(paths)


def _jumps(parts):
    for part in parts:
        for jump in part.jumps:
            yield jump


def skewer_at_level(paths, y, negative=None):
    """
    The composition at level y >= 0 of forward parts paths (a
    ForwardJccp, a MarkedPath or a list of them), preceded by the
    optional negative part.
    """
    if y < 0:
        raise ValueError('levels are nonnegative, got {}'.format(y))
    parts = _parts(paths, negative)
    check_level(parts, y)
    return tuple(jump.value_at_level(y) for jump in _jumps(parts)
                 if jump.crosses(y))


def change_levels(paths, level_max, negative=None):
    '''
    Sorted distinct levels in (0, level_max] at which the skewer can
    change: births B, deaths D and the levels B + t of mark events.
    '''
    levels = set()
    for jump in _jumps(_parts(paths, negative)):
        for level in jump.pre_level + jump.mark.times:
            if 0 < level <= level_max:
                levels.add(float(level))
        if 0 < jump.pre_level <= level_max:
            levels.add(jump.pre_level)
    return sorted(levels)


def skewer_trajectory(paths, level_max, negative=None):
    """
    The skewer on [0, level_max] as a list of (level, composition), the
    first entry at level 0 and one entry per change level.

    Sweeps over the events of all jumps sorted by level, keeping the
    crossing jumps in an index ordered by their position in the path.
    """
    parts = _parts(paths, negative)
    check_level(parts, level_max)

    active = []
    values = {}
    events = []
    for index, jump in enumerate(_jumps(parts)):
        if jump.post_level <= 0 or jump.pre_level > level_max:
            continue
        if jump.pre_level <= 0:
            bisect.insort(active, index)
            values[index] = jump.value_at_level(0.)
        else:
            events.append((jump.pre_level, index, -1,
                           jump.mark.initial_value))
        for k, (level, value) in enumerate(zip(
                jump.pre_level + jump.mark.times, jump.mark.values)):
            if 0 < level <= level_max:
                events.append((float(level), index, k, int(value)))
    events.sort()

    trajectory = [(0., tuple(values[i] for i in active))]
    k = 0
    while k < len(events):
        level = events[k][0]
        while k < len(events) and events[k][0] == level:
            _, index, order, value = events[k]
            if order < 0:
                bisect.insort(active, index)
            if value == 0:
                active.remove(index)
                del values[index]
            else:
                values[index] = value
            k += 1
        trajectory.append((level, tuple(values[i] for i in active)))
    return trajectory


def build_skewer_paths(start, params, level_max, rng=None):
    '''
    Forward parts for start and, when theta > 0, the negative part, all
    cut above level_max. Returns (forward parts, negative or None).
    '''
    rng = ensure_rng(rng)
    start = validate_composition(start)
    negative = build_negative(params, level_max, rng) \
        if params.theta > 0 else None
    paths = build_concatenated(start, params, rng, level_max) \
        if start else []
    return paths, negative


def skewer_at_levels(rng, start, params, levels):
    """
    One replicate: the skewer compositions at each of levels. Module-level
    so it can be sent to worker processes.
    """
    paths, negative = build_skewer_paths(start, params, max(levels), rng)
    return [skewer_at_level(paths, y, negative) for y in levels]


def skewer_trajectory_sample(rng, start, params, level_max):
    paths, negative = build_skewer_paths(start, params, level_max, rng)
    return skewer_trajectory(paths, level_max, negative)


def masses_on_grid(trajectory, grid):
    '''
    Total mass of a (level, composition) trajectory on a level grid.
    '''
    return np.array([sum(trajectory_value(trajectory, y)) for y in grid])
