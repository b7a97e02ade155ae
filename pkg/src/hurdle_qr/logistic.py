"""Bayesian logistic regression for the point-mass (at-or-below hurdle) part.

Sampling is random-walk Metropolis on the whole coefficient vector.  The
proposal is ``N(0, s^2 C)`` where ``C`` is the inverse negative Hessian of
the log posterior at its mode, and the scalar ``s`` is tuned toward a 0.234
acceptance rate during burn-in only.
"""

from dataclasses import dataclass
import logging

import numpy as np
from scipy.special import expit, log_expit

from .mcmc import NonFiniteStateError, PosteriorDraws, chain_rngs

__all__ = [
    "LogisticPriors",
    "HurdleIndicators",
    "SeparationError",
    "TARGET_ACCEPTANCE",
    "logistic_loglik",
    "log_posterior",
    "metropolis_accept",
    "posterior_mode",
    "fit_logistic",
    "odds_effect",
]

logger = logging.getLogger(__name__)

TARGET_ACCEPTANCE = 0.234
_ADAPT_BATCH = 50


class SeparationError(ValueError):
    """All indicators are equal, so the hurdle part has nothing to fit."""


@dataclass(frozen=True)
class LogisticPriors:
    g_mean: np.ndarray
    g_cov: np.ndarray

    def __post_init__(self):
        g_mean = np.atleast_1d(np.asarray(self.g_mean, dtype=float))
        g_cov = np.atleast_2d(np.asarray(self.g_cov, dtype=float))
        if g_cov.shape != (g_mean.size, g_mean.size) or not np.allclose(g_cov, g_cov.T):
            raise ValueError("g_cov must be symmetric and match g_mean")
        try:
            np.linalg.cholesky(g_cov)
        except np.linalg.LinAlgError:
            raise ValueError("g_cov must be positive definite") from None
        object.__setattr__(self, "g_mean", g_mean)
        object.__setattr__(self, "g_cov", g_cov)

    @classmethod
    def vague(cls, q, variance=100.0):
        return cls(np.zeros(q), variance * np.eye(q))

    @property
    def precision(self):
        return np.linalg.inv(self.g_cov)


@dataclass(frozen=True)
class HurdleIndicators:
    """``indicator[i] == 1`` when observation ``i`` is at or below the hurdle."""

    indicator: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        ind = np.asarray(self.indicator)
        z = np.asarray(self.z, dtype=float)
        if z.ndim == 1:
            z = z[:, None]
        if not np.all((ind == 0) | (ind == 1)):
            raise ValueError("indicators must be 0 or 1")
        if z.shape[0] != ind.size:
            raise ValueError("one covariate row per indicator is required")
        object.__setattr__(self, "indicator", ind.astype(float))
        object.__setattr__(self, "z", z)

    @classmethod
    def from_y_star(cls, y_star, z):
        return cls((np.asarray(y_star) == 0).astype(int), z)


def logistic_loglik(gamma, data):
    """Bernoulli log likelihood with ``P(indicator = 1) = expit(z'gamma)``.

    Uses ``log_expit`` so large linear predictors do not overflow.
    """
    eta = data.z @ np.asarray(gamma, dtype=float)
    d = data.indicator
    return float(np.sum(d * log_expit(eta) + (1.0 - d) * log_expit(-eta)))


def log_posterior(gamma, data, priors):
    d = np.asarray(gamma, dtype=float) - priors.g_mean
    return logistic_loglik(gamma, data) - 0.5 * d @ priors.precision @ d


def metropolis_accept(log_target_current, log_target_proposed, log_u):
    """Accept when ``log_u < min(0, proposed - current)``; symmetric proposal."""
    return log_u < min(0.0, log_target_proposed - log_target_current)


def posterior_mode(data, priors, max_iter=100, tol=1e-10):
    """Newton iterations for the posterior mode; returns (mode, inverse negative Hessian)."""
    prec = priors.precision
    gamma = priors.g_mean.copy()
    for _ in range(max_iter):
        eta = data.z @ gamma
        p = expit(eta)
        grad = data.z.T @ (data.indicator - p) - prec @ (gamma - priors.g_mean)
        hess = (data.z.T * (p * (1.0 - p))) @ data.z + prec
        step = np.linalg.solve(hess, grad)
        gamma = gamma + step
        if np.max(np.abs(step)) < tol:
            break
    eta = data.z @ gamma
    p = expit(eta)
    hess = (data.z.T * (p * (1.0 - p))) @ data.z + prec
    return gamma, np.linalg.inv(hess)


def _run_chain(start, data, priors, chol, config, rng, chain):
    q = start.size
    out = np.empty((config.retained, q))
    scale = 2.38 / np.sqrt(q)
    scale_trace = np.empty(config.retained)
    gamma = start
    lp = log_posterior(gamma, data, priors)
    accepted_batch = 0
    accepted_kept = 0
    kept = 0
    for t in range(1, config.iterations + 1):
        proposal = gamma + scale * (chol @ rng.standard_normal(q))
        lp_new = log_posterior(proposal, data, priors)
        if metropolis_accept(lp, lp_new, np.log(rng.random())):
            gamma, lp = proposal, lp_new
            accepted_batch += 1
            if t > config.burn_in:
                accepted_kept += 1
        if not np.isfinite(lp):
            raise NonFiniteStateError(f"non-finite log posterior in chain {chain}", t)
        if t <= config.burn_in and t % _ADAPT_BATCH == 0:
            rate = accepted_batch / _ADAPT_BATCH
            # diminishing Robbins-Monro step on log scale
            scale *= np.exp((rate - TARGET_ACCEPTANCE) / np.sqrt(t / _ADAPT_BATCH))
            accepted_batch = 0
        if config.keep(t):
            out[kept] = gamma
            scale_trace[kept] = scale
            kept += 1
    acceptance = accepted_kept / (config.iterations - config.burn_in)
    return out, scale_trace, acceptance


def fit_logistic(data, chain_config, priors=None, names=None):
    """Sample the posterior of the hurdle-part coefficients.

    Parameters
    ----------
    data : HurdleIndicators
    chain_config : ChainConfig
    priors : LogisticPriors, optional
        ``N(0, 100 I)`` by default.
    names : list of str, optional

    Returns
    -------
    PosteriorDraws
        ``extras`` holds ``proposal_scale`` (chains, draws) and
        ``acceptance`` (per chain, post burn-in).
    """
    ones = data.indicator.sum()
    if ones == 0 or ones == data.indicator.size:
        raise SeparationError("separation: hurdle part degenerate (indicators are all equal)")
    q = data.z.shape[1]
    priors = LogisticPriors.vague(q) if priors is None else priors
    names = [f"gamma[{j}]" for j in range(q)] if names is None else list(names)

    mode, cov = posterior_mode(data, priors)
    chol = np.linalg.cholesky(cov)
    rngs = chain_rngs(chain_config.seed, chain_config.chains)
    results = []
    for k, rng in enumerate(rngs):
        start = mode if k == 0 else mode + chol @ rng.standard_normal(q)
        results.append(_run_chain(start, data, priors, chol, chain_config, rng, k))
    samples = np.stack([r[0] for r in results])
    extras = {
        "proposal_scale": np.stack([r[1] for r in results]),
        "acceptance": np.array([r[2] for r in results]),
    }
    logger.debug("logistic fit acceptance %s", extras["acceptance"])
    return PosteriorDraws(samples, names, chain_config, extras=extras)


def odds_effect(gamma_component):
    """Percentage change in the odds per unit increase: ``(exp(g) - 1) * 100``."""
    g = float(gamma_component)
    if not np.isfinite(g):
        raise ValueError("odds_effect requires a finite coefficient")
    return float(np.expm1(g) * 100.0)
