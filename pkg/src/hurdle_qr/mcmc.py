"""Chain configuration, posterior draw storage and per-chain random streams."""

from dataclasses import dataclass, field

import numpy as np

__all__ = ["ChainConfig", "PosteriorDraws", "NonFiniteStateError", "chain_rngs", "child_seed"]


class NonFiniteStateError(RuntimeError):
    """A sampler produced NaN/inf; carries the iteration where it happened."""

    def __init__(self, message, iteration):
        super().__init__(f"{message} (iteration {iteration})")
        self.iteration = iteration


@dataclass(frozen=True)
class ChainConfig:
    """Length, burn-in, thinning and seeding of an MCMC run.

    Retained draws per chain are ``(iterations - burn_in) // thinning``:
    iteration ``t`` (1-based) is kept when ``t > burn_in`` and
    ``(t - burn_in) % thinning == 0``.
    """

    chains: int = 3
    iterations: int = 10_000
    burn_in: int = 1_000
    thinning: int = 90
    seed: int = 0

    def __post_init__(self):
        if self.chains < 1:
            raise ValueError("need at least one chain")
        if self.iterations < 1:
            raise ValueError("iterations must be positive")
        if not (0 <= self.burn_in < self.iterations):
            raise ValueError("burn_in must satisfy 0 <= burn_in < iterations")
        if self.thinning < 1:
            raise ValueError("thinning must be positive")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.retained < 10:
            raise ValueError(
                f"configuration keeps only {self.retained} draws per chain; at least 10 are required"
            )

    @property
    def retained(self):
        return (self.iterations - self.burn_in) // self.thinning

    def keep(self, t):
        """Whether 1-based iteration ``t`` is stored."""
        return t > self.burn_in and (t - self.burn_in) % self.thinning == 0

    @classmethod
    def simulation_default(cls, seed=0):
        return cls(chains=3, iterations=10_000, burn_in=1_000, thinning=90, seed=seed)

    @classmethod
    def heavy(cls, seed=0):
        """The long configuration used for slowly mixing real-data fits."""
        return cls(chains=3, iterations=100_000, burn_in=50_000, thinning=160, seed=seed)

    def with_seed(self, seed):
        return ChainConfig(self.chains, self.iterations, self.burn_in, self.thinning, int(seed))


def child_seed(seed, *path):
    """Deterministic 64-bit seed derived from ``seed`` and an integer path."""
    ss = np.random.SeedSequence([int(seed), *map(int, path)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def chain_rngs(seed, chains):
    """Independent generators, one per chain, derived from ``seed``."""
    return [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(int(seed)).spawn(chains)]


@dataclass
class PosteriorDraws:
    """Thinned post-burn-in draws of one model fit.

    ``samples`` has shape ``(chains, retained, n_params)`` with columns
    named by ``names``.  ``extras`` holds sampler-specific per-chain traces
    (e.g. the Metropolis proposal scale).
    """

    samples: np.ndarray
    names: list
    chain_config: ChainConfig
    tau: float = None
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 3 or self.samples.shape[2] != len(self.names):
            raise ValueError("samples must be (chains, draws, params) matching names")

    @property
    def n_chains(self):
        return self.samples.shape[0]

    @property
    def n_draws(self):
        return self.samples.shape[1]

    def param(self, name):
        """(chains, draws) array for one parameter."""
        return self.samples[:, :, self.names.index(name)]

    def pooled(self, name=None):
        """Draws with chains concatenated; all parameters if ``name`` is None."""
        if name is None:
            return self.samples.reshape(-1, self.samples.shape[2])
        return self.param(name).ravel()

    def mean(self):
        return self.pooled().mean(axis=0)
