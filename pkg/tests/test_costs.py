import numpy as np
import pytest

from collabmech.costs import (EmpiricalCosts, GaussianCosts, KnownCosts,
                              UniformCosts, cost_model_from_config)
from collabmech.errors import DomainError
from collabmech.prob import RngHandle


class TestCdf:
    def test_uniform_midpoint(self):
        assert UniformCosts(4.0).cdf(2.0) == 0.5

    def test_uniform_clipping(self):
        m = UniformCosts(4.0)
        assert m.cdf(-1.0) == 0.0
        assert m.cdf(9.0) == 1.0

    def test_gaussian_symmetry(self):
        assert GaussianCosts(3.0, 1.0).cdf(3.0) == pytest.approx(0.5, abs=1e-15)

    def test_gaussian_untruncated_below_zero(self):
        # negative-cost mass is kept in the cdf on purpose
        assert GaussianCosts(3.0, 2.5).cdf(0.0) > 0.1

    def test_gaussian_degenerate(self):
        m = GaussianCosts(3.0, 0.0)
        assert m.cdf(2.999) == 0.0
        assert m.cdf(3.0) == 1.0

    def test_empirical_counting(self):
        assert EmpiricalCosts((1.0, 2.0, 3.0)).cdf(2.0) == pytest.approx(2 / 3)

    def test_empirical_right_continuous_with_ties(self):
        m = EmpiricalCosts((1.0, 2.0, 2.0, 3.0))
        assert m.cdf(2.0) == 0.75
        assert m.cdf(1.9999) == 0.25

    def test_monotone_on_random_pairs(self):
        rng = np.random.default_rng(5)
        models = [UniformCosts(4.0), GaussianCosts(3.0, 1.5),
                  EmpiricalCosts(tuple(rng.uniform(0, 5, 12)))]
        for m in models:
            for _ in range(200):
                x, y = sorted(rng.uniform(-2.0, 7.0, 2))
                assert m.cdf(x) <= m.cdf(y)


class TestMean:
    def test_uniform(self):
        assert UniformCosts(4.0).mean() == 2.0

    def test_gaussian(self):
        assert GaussianCosts(3.0, 2.0).mean() == 3.0

    def test_empirical(self):
        assert EmpiricalCosts((1.0, 2.0, 3.0)).mean() == 2.0


class TestSampling:
    def test_uniform_law_of_large_numbers(self):
        draws = UniformCosts(4.0).sample(RngHandle(2), 10**5).as_array()
        assert draws.mean() == pytest.approx(2.0, abs=0.02)

    def test_gaussian_degenerate_all_at_mean(self):
        draws = GaussianCosts(3.0, 0.0).sample(RngHandle(2), 100).as_array()
        assert np.all(draws == 3.0)

    def test_same_seed_identical_vectors(self):
        for model in (UniformCosts(4.0), GaussianCosts(3.0, 1.0),
                      EmpiricalCosts((1.0, 2.0, 5.0))):
            a = model.sample(RngHandle(7), 64).as_array()
            b = model.sample(RngHandle(7), 64).as_array()
            assert np.array_equal(a, b)

    def test_nonpositive_draws_clamped(self):
        draws = GaussianCosts(0.2, 3.0).sample(RngHandle(3), 10**4).as_array()
        assert np.all(draws > 0)
        assert np.any(draws == 1e-6)

    def test_count_guard(self):
        with pytest.raises(DomainError):
            UniformCosts(1.0).sample(RngHandle(1), 0)

    @pytest.mark.parametrize("model", [
        UniformCosts(4.0),
        GaussianCosts(3.0, 1.0),
        EmpiricalCosts((0.5, 1.0, 1.5, 4.0)),
    ])
    def test_kolmogorov_distance(self, model):
        draws = np.sort(model.sample(RngHandle(11), 10**6).as_array())
        # evaluate both step functions on a grid that includes the atoms
        xs = np.union1d(np.linspace(draws[0] - 1, draws[-1] + 1, 600), draws[::2500])
        emp = np.searchsorted(draws, xs, side="right") / draws.size
        ref = np.array([model.cdf(float(x)) for x in xs])
        assert np.max(np.abs(ref - emp)) < 0.005


class TestValidationAndConfig:
    def test_known_costs_positive(self):
        with pytest.raises(DomainError):
            KnownCosts((1.0, -2.0))
        with pytest.raises(DomainError):
            KnownCosts(())

    def test_bad_params(self):
        with pytest.raises(DomainError):
            UniformCosts(0.0)
        with pytest.raises(DomainError):
            GaussianCosts(3.0, -1.0)
        with pytest.raises(DomainError):
            EmpiricalCosts(())

    def test_config_round_trip(self):
        for model in (UniformCosts(4.0), GaussianCosts(3.0, 1.25),
                      EmpiricalCosts((2.0, 1.0))):
            clone = cost_model_from_config(model.to_config())
            assert clone == model

    def test_unknown_kind(self):
        with pytest.raises(DomainError):
            cost_model_from_config({"kind": "cauchy", "params": {}})
