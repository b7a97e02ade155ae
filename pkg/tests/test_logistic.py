import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import expit

from hurdle_qr.diagnostics import credible_interval
from hurdle_qr.logistic import (
    HurdleIndicators,
    LogisticPriors,
    SeparationError,
    fit_logistic,
    logistic_loglik,
    metropolis_accept,
    odds_effect,
)
from hurdle_qr.mcmc import ChainConfig

from oracles import logistic_mle

QUICK = ChainConfig(chains=2, iterations=4000, burn_in=1000, thinning=5, seed=3)


def planted(n=2000, gamma=(-1.0, 2.0), seed=0):
    rng = np.random.default_rng(seed)
    z = np.column_stack([np.ones(n), rng.normal(size=n)])
    return HurdleIndicators((rng.random(n) < expit(z @ np.array(gamma))).astype(int), z)


class TestLoglik:
    def test_null_coefficients(self):
        data = HurdleIndicators([0, 1, 1, 0, 1], np.ones(5))
        assert logistic_loglik([0.0], data) == pytest.approx(5 * math.log(0.5))

    def test_scalar_evaluation(self):
        data = HurdleIndicators([1], [[1.0]])
        assert logistic_loglik([0.345], data) == pytest.approx(-0.53545, abs=5e-5)
        assert logistic_loglik([0.345], data) == pytest.approx(-math.log1p(math.exp(-0.345)))

    def test_flip_symmetry(self):
        data = planted(200, seed=1)
        flipped = HurdleIndicators(1 - data.indicator, data.z)
        g = np.array([0.3, -1.1])
        assert logistic_loglik(-g, flipped) == pytest.approx(logistic_loglik(g, data), rel=1e-13)

    def test_no_overflow(self):
        data = HurdleIndicators([1, 0], [[1.0], [1.0]])
        assert np.isfinite(logistic_loglik([800.0], data))
        assert logistic_loglik([800.0], data) == pytest.approx(-800.0)

    @given(st.lists(st.floats(-30, 30), min_size=2, max_size=2), st.integers(0, 2**16))
    def test_never_positive(self, gamma, seed):
        data = planted(20, seed=seed)
        assert logistic_loglik(gamma, data) <= 0

    def test_indicator_validation(self):
        with pytest.raises(ValueError):
            HurdleIndicators([0, 2], np.ones(2))
        with pytest.raises(ValueError):
            HurdleIndicators([0, 1], np.ones(3))

    def test_from_y_star(self):
        ind = HurdleIndicators.from_y_star(np.array([0.0, 1.2, 0.0, -0.3]), np.ones(4))
        np.testing.assert_array_equal(ind.indicator, [1, 0, 1, 0])


class TestMetropolisAccept:
    @pytest.mark.parametrize(
        "cur,new,log_u,expected",
        [
            (-10.0, -9.0, -0.01, True),  # uphill always
            (-10.0, -11.0, math.log(0.3), True),  # ratio e^-1 = 0.368 > 0.3
            (-10.0, -11.0, math.log(0.4), False),
            (-10.0, -10.0, -1e-12, True),
            (-10.0, -np.inf, -50.0, False),
        ],
    )
    def test_fixed_triples(self, cur, new, log_u, expected):
        assert metropolis_accept(cur, new, log_u) is expected


class TestFit:
    def test_separation(self):
        with pytest.raises(SeparationError, match="separation: hurdle part degenerate"):
            fit_logistic(HurdleIndicators(np.ones(10, int), np.ones(10)), QUICK)
        with pytest.raises(SeparationError):
            fit_logistic(HurdleIndicators(np.zeros(10, int), np.ones(10)), QUICK)

    def test_coin_data_has_null_slope(self):
        rng = np.random.default_rng(4)
        z = np.column_stack([np.ones(500), rng.normal(size=500)])
        draws = fit_logistic(HurdleIndicators(rng.integers(0, 2, 500), z), QUICK)
        slope = draws.pooled("gamma[1]")
        assert abs(slope.mean()) < 2 * slope.std()

    def test_planted_recovery_against_ml_oracle(self):
        data = planted()
        draws = fit_logistic(data, QUICK, names=["g0", "g1"])
        mle, se = logistic_mle(data.z, data.indicator)
        truth = np.array([-1.0, 2.0])
        for j, name in enumerate(["g0", "g1"]):
            x = draws.pooled(name)
            assert x.mean() == pytest.approx(truth[j], abs=0.2)
            assert abs(x.mean() - mle[j]) < 2 * x.std()
            assert x.std() == pytest.approx(se[j], rel=0.2)
            lo, hi = credible_interval(x)
            assert lo <= truth[j] <= hi

    def test_intercept_only_proportion(self):
        n = 1000
        ind = np.zeros(n, int)
        ind[: int(0.3 * n)] = 1
        draws = fit_logistic(HurdleIndicators(ind, np.ones(n)), QUICK)
        assert expit(draws.pooled()).mean() == pytest.approx(0.30, abs=0.02)

    def test_adaptation_frozen_after_burn_in(self):
        draws = fit_logistic(planted(300, seed=5), QUICK)
        scale = draws.extras["proposal_scale"]
        assert scale.shape == (QUICK.chains, QUICK.retained)
        assert np.all(scale == scale[:, :1])
        assert np.all((draws.extras["acceptance"] > 0.1) & (draws.extras["acceptance"] < 0.5))

    def test_relabeling_negates_posterior(self):
        data = planted(800, seed=6)
        flipped = HurdleIndicators(1 - data.indicator, data.z)
        a = fit_logistic(data, QUICK).mean()
        b = fit_logistic(flipped, QUICK.with_seed(9)).mean()
        np.testing.assert_allclose(a, -b, atol=0.05)

    def test_deterministic(self):
        data = planted(200, seed=7)
        a = fit_logistic(data, QUICK).samples
        b = fit_logistic(data, QUICK).samples
        np.testing.assert_array_equal(a, b)

    def test_prior_validation(self):
        with pytest.raises(ValueError):
            LogisticPriors(np.zeros(2), np.array([[1.0, 2.0], [2.0, 1.0]]))


class TestOddsEffect:
    def test_printed_values(self):
        assert round(odds_effect(0.345)) == 41
        assert round(odds_effect(0.674)) == 96

    def test_null(self):
        assert odds_effect(0.0) == 0.0

    def test_non_finite(self):
        with pytest.raises(ValueError):
            odds_effect(float("nan"))
