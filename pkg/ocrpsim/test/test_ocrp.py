import numpy as np
import pytest

from ocrpsim.chains import RateSpec
from ocrpsim.ocrp import (
    OcrpParams, step_rates, apply_transition, simulate_ocrp, up_step,
    down_step, discrete_up_down_step, composition_probability,
    compositions, stationary_law, sample_stationary, ocrp_at_levels)
from ocrpsim.stats import chi_square_composition


class TestParams:

    def test_domain(self):
        with pytest.raises(ValueError):
            OcrpParams(1.5)
        with pytest.raises(ValueError):
            OcrpParams(0.5, -1.)
        with pytest.raises(ValueError):
            OcrpParams(0.5, 0., RateSpec.total_mass(0.5))

    def test_basic(self):
        assert OcrpParams(0.5, 1.).is_basic
        assert not OcrpParams(0.5, 1., RateSpec.qalpha(0.5, p={2: 1.})) \
            .is_basic
        spec = RateSpec.linear_birth_death(0.4, 1., p={2: 1.})
        back = OcrpParams.from_dict(OcrpParams(0.5, 0.5, spec).to_dict())
        assert back.spec.birth == 0.4
        assert back.theta == 0.5


class TestRates:

    def test_no_insertion(self):
        rates = dict(step_rates((2, 1), OcrpParams(0., 0.)))
        assert rates == {('resize', 0, 3): 2., ('resize', 0, 1): 2.,
                         ('resize', 1, 2): 1., ('resize', 1, 0): 1.}
        assert np.abs(sum(rates.values()) - 6.) < 1e-12

    def test_total_rate(self):
        # sum of (2 n_i - alpha), plus alpha per table, plus theta.
        rates = step_rates((2, 1), OcrpParams(0.5, 0.5))
        assert np.abs(sum(r for _, r in rates) - 6.5) < 1e-12
        assert (('insert_left', None, 1), 0.5) in rates
        assert (('insert_right', 1, 1), 0.5) in rates

    def test_empty(self):
        assert step_rates((), OcrpParams(0.5, 0.)) == []
        assert step_rates((), OcrpParams(0.5, 1.)) == \
            [(('insert_left', None, 1), 1.)]

    def test_apply(self):
        assert apply_transition((2, 1), ('resize', 0, 3)) == (3, 1)
        assert apply_transition((2, 1), ('resize', 1, 0)) == (2,)
        assert apply_transition((2, 1), ('insert_right', 0, 1)) == (2, 1, 1)
        assert apply_transition((2, 1), ('insert_left', None, 2)) == \
            (2, 2, 1)
        with pytest.raises(ValueError):
            apply_transition((2, 1), ('swap', 0, 1))


class TestSimulate:

    def test_trajectory(self):
        trajectory = simulate_ocrp((1, 2), OcrpParams(0.5, 0.5), 2., rng=3)
        assert trajectory[0] == (0., (1, 2))
        levels = [level for level, _ in trajectory]
        assert all(b > a for a, b in zip(levels, levels[1:]))
        assert levels[-1] <= 2.
        for (_, a), (_, b) in zip(trajectory, trajectory[1:]):
            assert abs(sum(b) - sum(a)) == 1

    def test_empty(self):
        assert simulate_ocrp((), OcrpParams(0.5, 0.), 5.) == [(0., ())]
        trajectory = simulate_ocrp((), OcrpParams(0.5, 1.), 50., rng=1)
        assert trajectory[1][1] == (1,)

    def test_levels(self):
        out = ocrp_at_levels(np.random.default_rng(2), (2,),
                             OcrpParams(0.5, 0.), [0.1, 0.4])
        assert len(out) == 2
        assert all(isinstance(c, tuple) for c in out)

    def test_domain(self):
        with pytest.raises(ValueError):
            simulate_ocrp((1,), OcrpParams(0.5), -1.)


class TestDiscreteChain:

    def test_p2(self):
        alpha, theta = 0.3, 0.7
        assert np.abs(composition_probability((2,), alpha, theta)
                      - (1 - alpha) / (1 + theta)) < 1e-12
        assert np.abs(composition_probability((1, 1), alpha, theta)
                      - (alpha + theta) / (1 + theta)) < 1e-12

    def test_p3_is_ordered(self):
        alpha, theta = 0.3, 0.7
        norm = (1 + theta) * (2 + theta)
        assert np.abs(composition_probability((2, 1), alpha, theta)
                      - (1 - alpha) * (2 * alpha + theta) / norm) < 1e-12
        assert np.abs(composition_probability((1, 2), alpha, theta)
                      - (1 - alpha) * (alpha + 2 * theta) / norm) < 1e-12

    def test_normalised(self):
        for n in [1, 3, 5]:
            for alpha, theta in [(0.3, 0.7), (0.5, 0.), (0., 1.), (1., 0.)]:
                total = sum(stationary_law(n, alpha, theta).values())
                assert np.abs(total - 1) < 1e-12

    def test_compositions(self):
        assert compositions(3) == [(1, 1, 1), (1, 2), (2, 1), (3,)]
        assert len(compositions(6)) == 2 ** 5

    def test_domain(self):
        with pytest.raises(ValueError):
            composition_probability((), 0.5, 0.5)
        with pytest.raises(ValueError):
            sample_stationary(0, 0.5, 0.5)
        with pytest.raises(ValueError):
            down_step(())
        with pytest.raises(ValueError):
            up_step((), 0.5, 0.)

    def test_up_step_weights(self):
        rng = np.random.default_rng(4)
        alpha, theta, size = 0.5, 0.5, 20000
        draws = [up_step((2,), alpha, theta, rng) for _ in range(size)]
        for outcome, weight in [((3,), 2 - alpha), ((2, 1), alpha),
                                ((1, 2), theta)]:
            p = weight / (2 + theta)
            freq = draws.count(outcome) / size
            assert np.abs(freq - p) < 4 * np.sqrt(p * (1 - p) / size)

    def test_down_step_weights(self):
        rng = np.random.default_rng(5)
        size = 20000
        draws = [down_step((2, 1), rng) for _ in range(size)]
        freq = draws.count((1, 1)) / size
        assert np.abs(freq - 2 / 3) < 4 * np.sqrt(2 / 9 / size)
        assert set(draws) == {(1, 1), (2,)}

    def test_step_keeps_mass(self):
        rng = np.random.default_rng(6)
        c = (1, 2, 1)
        for _ in range(50):
            c = discrete_up_down_step(c, 0.5, 0.5, rng)
            assert sum(c) == 4

    def test_sampler_matches_law(self):
        rng = np.random.default_rng(7)
        n, alpha, theta = 4, 0.5, 0.5
        draws = [sample_stationary(n, alpha, theta, rng)
                 for _ in range(20000)]
        _, _, p = chi_square_composition(draws,
                                         stationary_law(n, alpha, theta),
                                         mass_cap=n)
        assert p > 1e-3

    def test_stationary_under_step(self):
        rng = np.random.default_rng(8)
        n, alpha, theta = 3, 0.5, 0.
        law = stationary_law(n, alpha, theta)
        draws = [discrete_up_down_step(sample_stationary(n, alpha, theta,
                                                         rng),
                                       alpha, theta, rng)
                 for _ in range(20000)]
        _, _, p = chi_square_composition(draws, law, mass_cap=n)
        assert p > 1e-3
