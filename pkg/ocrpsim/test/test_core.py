import io

import numpy as np
import pytest

from ocrpsim.experiment_functions import _stationary_draw
from ocrpsim.jccp import build_forward, build_negative
from ocrpsim.ocrp import OcrpParams
from ocrpsim.core import (
    validate_composition, parse_composition, total_mass, RandomSource,
    ensure_rng, sample_replicates, StepFunction, evaluate_step, Jump,
    MarkedPath, dumps_path, loads_path, write_records, read_records,
    trajectory_records, trajectory_value, path_at_time, OutOfDomainError)


def _mark(lifetime, initial=1):
    return StepFunction(initial, [(lifetime, 0)])


class TestCompositions:

    def test_validate(self):
        assert validate_composition([1, 2]) == (1, 2)
        assert validate_composition(()) == ()
        with pytest.raises(ValueError):
            validate_composition([1, 0])
        with pytest.raises(ValueError):
            validate_composition([1.5])

    def test_parse(self):
        assert parse_composition('1,2,3') == (1, 2, 3)
        assert parse_composition('(2, 1)') == (2, 1)
        assert parse_composition('') == ()
        assert total_mass((2, 1, 3)) == 6


class TestRandomSource:

    def test_reproducible(self):
        a = RandomSource(7, 3).generator.random(5)
        b = RandomSource(7, 3).generator.random(5)
        assert np.array_equal(a, b)

    def test_streams_differ(self):
        a = RandomSource(7, 0).generator.random(5)
        b = RandomSource(7, 1).generator.random(5)
        c = RandomSource(7, 0).spawn(1).generator.random(5)
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_ensure_rng(self):
        rng = np.random.default_rng(1)
        assert ensure_rng(rng) is rng
        assert isinstance(ensure_rng(3), np.random.Generator)
        assert isinstance(ensure_rng(RandomSource(3)), np.random.Generator)
        with pytest.raises(ValueError):
            ensure_rng('seed')

    def test_replicates_independent_of_workers(self):
        serial = sample_replicates(_stationary_draw, (4, 0.5, 0.5), 25,
                                   seed=5, chunk_size=10)
        pooled = sample_replicates(_stationary_draw, (4, 0.5, 0.5), 25,
                                   seed=5, chunk_size=10, workers=2)
        assert len(serial) == 25
        assert serial == pooled

    def test_replicates_count(self):
        with pytest.raises(ValueError):
            sample_replicates(_stationary_draw, (4, 0.5, 0.5), 0, seed=1)


class TestStepFunction:

    def test_evaluate(self):
        f = StepFunction(2, [(0.5, 3), (1.0, 1), (2.0, 0)])
        assert f.lifetime == 2.0
        assert f.evaluate(0.) == 2
        assert f.evaluate(0.5) == 3
        assert f.evaluate(1.9) == 1
        assert evaluate_step(f, 0.7) == 3
        assert f.maximum() == 3
        with pytest.raises(OutOfDomainError):
            f.evaluate(2.0)
        with pytest.raises(OutOfDomainError):
            f.evaluate(-0.1)

    def test_zero_start(self):
        f = StepFunction(0, [])
        assert f.lifetime == 0.
        with pytest.raises(OutOfDomainError):
            f.evaluate(0.)

    def test_zero_only_at_the_end(self):
        with pytest.raises(ValueError):
            StepFunction(1, [(0.5, 0), (1.0, 1), (2.0, 0)])
        with pytest.raises(ValueError):
            StepFunction(1, [(1.0, 2)])
        with pytest.raises(ValueError):
            StepFunction(1, [(1.0, 2), (1.0, 0)])

    def test_open_path(self):
        f = StepFunction(1, [(0.5, 2)], lifetime=1.0, absorbed=False)
        assert f.lifetime == 1.0
        assert f.evaluate(0.9) == 2
        with pytest.raises(ValueError):
            StepFunction(1, [(1.5, 2)], lifetime=1.0, absorbed=False)

    def test_dict(self):
        f = StepFunction(2, [(0.5, 3), (2.0, 0)])
        assert StepFunction.from_dict(f.to_dict()) == f


class TestMarkedPath:

    def make_path(self):
        j1 = Jump(0., 0., _mark(2.))
        j2 = Jump(1., 1., _mark(0.5))
        return MarkedPath([j1, j2], 0., 2.5)

    def test_levels(self):
        path = self.make_path()
        assert np.abs(path.at_time(0.) - 2.) < 1e-12
        assert np.abs(path.at_time(1.) - 1.5) < 1e-12
        assert np.abs(path.at_time(2.5)) < 1e-12
        with pytest.raises(OutOfDomainError):
            path.at_time(3.)
        assert path_at_time(path, 1.) == path.at_time(1.)

    def test_slope_check(self):
        j1 = Jump(0., 0., _mark(2.))
        j2 = Jump(1., 0.5, _mark(0.5))
        with pytest.raises(ValueError):
            MarkedPath([j1, j2], 0., 2.)

    def test_jump(self):
        j = Jump(1., 0.5, StepFunction(2, [(0.3, 1), (1.0, 0)]))
        assert j.post_level == 1.5
        assert j.crosses(0.5) and not j.crosses(1.5)
        assert j.value_at_level(0.7) == 2
        assert j.value_at_level(1.0) == 1
        with pytest.raises(ValueError):
            Jump(0., 0., StepFunction(0, []))
        with pytest.raises(ValueError):
            Jump(0., 0., _mark(1.), post_level=2.)

    def test_running_minimum(self):
        path = self.make_path()
        assert path.running_minimum_before(0) == 0.
        assert path.running_minimum_before(1) == 0.

    def test_records(self):
        path = self.make_path()
        back = loads_path(dumps_path(path))
        assert len(back) == 2
        assert back.horizon == path.horizon
        assert back.jumps[1].mark == path.jumps[1].mark

        out = io.StringIO()
        write_records(path.to_records(), out)
        records = read_records(io.StringIO(out.getvalue()))
        assert records[0]['type'] == 'path'
        assert records[1]['B'] == 0.

    def test_sampled_records(self):
        forward = build_forward(2, OcrpParams(0.8), rng=8, level_max=2.)
        negative = build_negative(OcrpParams(0.5, 3.), 1., rng=6)
        for path in (forward.marked, negative.marked):
            back = loads_path(dumps_path(path))
            assert len(back) == len(path)
            assert (back.origin, back.horizon) == (path.origin, path.horizon)
            for t in np.linspace(path.origin, path.horizon, 1000):
                assert back.at_time(t) == path.at_time(t)


class TestTrajectory:

    def test_value(self):
        trajectory = [(0., (1,)), (0.5, (2,)), (0.7, ())]
        assert trajectory_value(trajectory, 0.2) == (1,)
        assert trajectory_value(trajectory, 0.5) == (2,)
        assert trajectory_value(trajectory, 3.) == ()
        with pytest.raises(OutOfDomainError):
            trajectory_value(trajectory, -1.)

    def test_records(self):
        records = list(trajectory_records([(0., (1, 2))], source='x'))
        assert records == [{'level': 0., 'composition': [1, 2],
                            'source': 'x'}]
