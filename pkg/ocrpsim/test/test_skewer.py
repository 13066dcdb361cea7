import numpy as np
import pytest

from ocrpsim.core import StepFunction, OutOfDomainError, trajectory_value
from ocrpsim.jccp import Builder, build_concatenated
from ocrpsim.ocrp import OcrpParams
from ocrpsim.skewer import (
    skewer_at_level, change_levels, skewer_trajectory, build_skewer_paths,
    skewer_at_levels, skewer_trajectory_sample, masses_on_grid)


def _path():
    # A table of size 2 that shrinks at 0.5 and closes at 1, then a table
    # of size 1 born at level 0.5 that closes at 1.5.
    b = Builder()
    b.add_jump(StepFunction(2, [(0.5, 1), (1.0, 0)]), 0.)
    b.add_jump(StepFunction(1, [(1.0, 0)]), 0.5)
    return b.finalize()


def _negative():
    b = Builder(origin=-1.)
    b.add_jump(StepFunction(3, [(1.0, 0)]), -1.)
    return b.finalize(0.)


class TestSkewer:

    def test_levels(self):
        path = _path()
        assert skewer_at_level(path, 0.) == (2,)
        assert skewer_at_level(path, 0.7) == (1, 1)
        assert skewer_at_level(path, 1.2) == (1,)
        assert skewer_at_level(path, 1.5) == ()

    def test_negative_part_first(self):
        assert skewer_at_level(_path(), 0.2, _negative()) == (3, 2)
        assert skewer_at_level([_path(), _path()], 0.7) == (1, 1, 1, 1)

    def test_trajectory(self):
        path = _path()
        assert change_levels(path, 2.) == [0.5, 1., 1.5]
        assert skewer_trajectory(path, 2.) == [
            (0., (2,)), (0.5, (1, 1)), (1., (1,)), (1.5, ())]
        assert skewer_trajectory(path, 0.7) == [(0., (2,)), (0.5, (1, 1))]
        trajectory = skewer_trajectory(path, 2.)
        assert list(masses_on_grid(trajectory, [0., 0.7, 1.2])) == [2, 2, 1]

    def test_domain(self):
        with pytest.raises(ValueError):
            skewer_at_level(_path(), -0.1)
        paths = build_concatenated((1,), OcrpParams(0.5), rng=1,
                                   level_max=0.5)
        with pytest.raises(OutOfDomainError):
            skewer_at_level(paths, 1.)
        with pytest.raises(OutOfDomainError):
            skewer_trajectory(paths, 1.)


class TestSampled:

    def test_starts_at_start(self):
        params = OcrpParams(0.5, 0.5)
        paths, negative = build_skewer_paths((1, 2), params, 1., rng=4)
        assert negative is not None
        trajectory = skewer_trajectory(paths, 1., negative)
        assert trajectory[0] == (0., (1, 2))
        assert skewer_at_level(paths, 0., negative) == (1, 2)

    def test_trajectory_matches_scan(self):
        params = OcrpParams(0.5, 0.5)
        paths, negative = build_skewer_paths((2, 1), params, 1., rng=5)
        trajectory = skewer_trajectory(paths, 1., negative)
        for y in [0.1, 0.25, 0.5, 0.9]:
            assert trajectory_value(trajectory, y) == \
                skewer_at_level(paths, y, negative)

    def test_no_negative_part(self):
        paths, negative = build_skewer_paths((1,), OcrpParams(0.5), 1.,
                                             rng=6)
        assert negative is None
        assert len(paths) == 1

    def test_samplers(self):
        rng = np.random.default_rng(7)
        out = skewer_at_levels(rng, (1,), OcrpParams(0.5, 1.), [0.2, 0.5])
        assert len(out) == 2
        trajectory = skewer_trajectory_sample(rng, (1,), OcrpParams(0.5, 1.),
                                              0.5)
        assert trajectory[0] == (0., (1,))
        assert trajectory[-1][0] <= 0.5
