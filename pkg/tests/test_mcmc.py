import numpy as np
import pytest

from hurdle_qr.mcmc import ChainConfig, PosteriorDraws, chain_rngs, child_seed


class TestChainConfig:
    def test_defaults_keep_100(self):
        assert ChainConfig().retained == 100
        assert ChainConfig.heavy().retained == 312

    def test_keep_matches_retained(self):
        cfg = ChainConfig(iterations=1000, burn_in=137, thinning=7)
        assert sum(cfg.keep(t) for t in range(1, cfg.iterations + 1)) == cfg.retained

    @pytest.mark.parametrize(
        "kw",
        [
            dict(burn_in=10_000),
            dict(chains=0),
            dict(thinning=0),
            dict(seed=-1),
            dict(seed=2**64),
            dict(iterations=1100, burn_in=1000, thinning=90),
        ],
    )
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            ChainConfig(**kw)

    def test_with_seed(self):
        cfg = ChainConfig(chains=2).with_seed(42)
        assert cfg.seed == 42 and cfg.chains == 2


class TestStreams:
    def test_child_seed_deterministic_and_distinct(self):
        assert child_seed(1, 2) == child_seed(1, 2)
        assert len({child_seed(1, k) for k in range(100)}) == 100
        assert child_seed(1, 2) != child_seed(2, 1)

    def test_chain_rngs_independent(self):
        a, b = chain_rngs(3, 2)
        assert a.random() != b.random()
        again = chain_rngs(3, 2)[0]
        assert again.random() == chain_rngs(3, 2)[0].random()


class TestPosteriorDraws:
    def test_accessors(self):
        cfg = ChainConfig(chains=2, iterations=20, burn_in=0, thinning=2)
        s = np.arange(40.0).reshape(2, 10, 2)
        d = PosteriorDraws(s, ["a", "b"], cfg)
        assert d.n_chains == 2 and d.n_draws == 10
        np.testing.assert_array_equal(d.param("b"), s[:, :, 1])
        assert d.pooled("a").size == 20
        np.testing.assert_allclose(d.mean(), s.reshape(-1, 2).mean(axis=0))

    def test_shape_checked(self):
        with pytest.raises(ValueError):
            PosteriorDraws(np.zeros((2, 10)), ["a"], ChainConfig())
