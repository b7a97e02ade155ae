"""Gibbs sampler for Bayesian quantile regression under the ALD likelihood.

Each observation carries a latent ``v_i ~ Exponential(mean sigma)`` and,
given it, ``y_i ~ N(x_i'beta + theta*v_i, psi^2*sigma*v_i)``.  With the
priors ``beta ~ N(b, B)`` and ``sigma ~ IG(n0, s0)`` every block has a
closed-form full conditional:

* ``beta``: multivariate normal,
* ``v_i``: GIG with index 1/2, ``a_i = r_i^2/(psi^2 sigma)``,
  ``b = 2/sigma + theta^2/(psi^2 sigma)``,
* ``sigma``: IG(n0 + 3n/2, s0 + sum((r_i - theta v_i)^2/(2 psi^2 v_i)) + sum(v_i)).
"""

from dataclasses import dataclass, replace
from functools import cached_property
import logging

import numpy as np

from .distributions import gig_half_from_noise, mixture_constants, validate_tau
from .mcmc import NonFiniteStateError, PosteriorDraws, chain_rngs

__all__ = [
    "QrPriors",
    "QrData",
    "QrState",
    "SingularPrecisionError",
    "RankDeficientError",
    "V_FLOOR",
    "beta_conditional",
    "v_conditional",
    "sigma_conditional",
    "update_beta",
    "update_v",
    "update_sigma",
    "log_joint",
    "initial_states",
    "fit_bayesian_qr",
]

logger = logging.getLogger(__name__)

#: Lower guard on latent scales so the beta precision stays finite.
V_FLOOR = 1e-12


class SingularPrecisionError(np.linalg.LinAlgError):
    """Conditional precision of beta is not positive definite."""


class RankDeficientError(ValueError):
    """Design matrix does not have full column rank."""


@dataclass(frozen=True)
class QrPriors:
    """Normal prior on beta and inverse-gamma prior on sigma."""

    b_mean: np.ndarray
    b_cov: np.ndarray
    sigma_shape: float = 0.01
    sigma_scale: float = 0.01

    def __post_init__(self):
        b_mean = np.atleast_1d(np.asarray(self.b_mean, dtype=float))
        b_cov = np.atleast_2d(np.asarray(self.b_cov, dtype=float))
        if b_cov.shape != (b_mean.size, b_mean.size):
            raise ValueError("b_cov must be square and match b_mean")
        if not np.allclose(b_cov, b_cov.T):
            raise ValueError("b_cov must be symmetric")
        try:
            np.linalg.cholesky(b_cov)
        except np.linalg.LinAlgError:
            raise ValueError("b_cov must be positive definite") from None
        if not (self.sigma_shape > 0 and self.sigma_scale > 0):
            raise ValueError("sigma prior parameters must be positive")
        object.__setattr__(self, "b_mean", b_mean)
        object.__setattr__(self, "b_cov", b_cov)

    @classmethod
    def vague(cls, p, variance=100.0):
        """Default prior: ``N(0, variance*I)`` on beta, IG(0.01, 0.01) on sigma."""
        return cls(np.zeros(p), variance * np.eye(p))

    @cached_property
    def precision(self):
        return np.linalg.inv(self.b_cov)

    @cached_property
    def precision_mean(self):
        return self.precision @ self.b_mean

    @property
    def dim(self):
        return self.b_mean.size


@dataclass(frozen=True)
class QrData:
    """Design matrix (intercept included by the caller) and response."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float).ravel()
        if x.ndim == 1:
            x = x[:, None]
        if x.shape[0] != y.size:
            raise ValueError("x and y must have the same number of rows")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self):
        return self.y.size

    @property
    def p(self):
        return self.x.shape[1]


@dataclass(frozen=True)
class QrState:
    beta: np.ndarray
    sigma: float
    v: np.ndarray

    def is_finite(self):
        return bool(np.all(np.isfinite(self.beta)) and np.isfinite(self.sigma) and np.all(np.isfinite(self.v)))


# --- full conditionals -------------------------------------------------------


def beta_conditional(state, data, priors, constants):
    """Mean and precision of the normal full conditional of beta."""
    w = 1.0 / (constants.psi_sq * state.sigma * state.v)
    precision = priors.precision + (data.x.T * w) @ data.x
    rhs = priors.precision_mean + data.x.T @ (w * (data.y - constants.theta * state.v))
    try:
        chol = np.linalg.cholesky(precision)
    except np.linalg.LinAlgError:
        raise SingularPrecisionError(
            "conditional precision of beta is singular; covariates may be collinear"
        ) from None
    mean = np.linalg.solve(chol.T, np.linalg.solve(chol, rhs))
    return mean, precision, chol


def v_conditional(state, data, constants):
    """GIG(1/2) coefficients ``(a_i, b)`` of the latent-scale full conditional."""
    r = data.y - data.x @ state.beta
    scale = constants.psi_sq * state.sigma
    a = r * r / scale
    b = 2.0 / state.sigma + constants.theta**2 / scale
    return a, b


def sigma_conditional(state, data, priors, constants):
    """Shape and scale of the inverse-gamma full conditional of sigma."""
    e = data.y - data.x @ state.beta - constants.theta * state.v
    shape = priors.sigma_shape + 1.5 * data.n
    scale = priors.sigma_scale + np.sum(e * e / (2.0 * constants.psi_sq * state.v)) + np.sum(state.v)
    return shape, scale


def update_beta(state, data, priors, constants, rng):
    mean, _, chol = beta_conditional(state, data, priors, constants)
    return mean + np.linalg.solve(chol.T, rng.standard_normal(mean.size))


def update_v(state, data, constants, rng, noise=None):
    """Draw every latent scale from its GIG(1/2) conditional.

    Consumes ``n`` standard normals then ``n`` uniforms from ``rng``, unless
    ``noise=(z, u)`` is given.  A zero residual (``a_i == 0``) gives the
    limiting Gamma(1/2, rate b/2) draw.
    """
    a, b = v_conditional(state, data, constants)
    if noise is None:
        z = rng.standard_normal(data.n)
        u = rng.random(data.n)
    else:
        z, u = noise
    return np.maximum(gig_half_from_noise(a, b, z, u), V_FLOOR)


def update_sigma(state, data, priors, constants, rng):
    shape, scale = sigma_conditional(state, data, priors, constants)
    return scale / rng.standard_gamma(shape)


def log_joint(state, data, priors, constants):
    """Unnormalized log posterior of (beta, v, sigma) given the data."""
    r = data.y - data.x @ state.beta - constants.theta * state.v
    var = constants.psi_sq * state.sigma * state.v
    loglik = -0.5 * np.sum(np.log(2.0 * np.pi * var) + r * r / var)
    d = state.beta - priors.b_mean
    log_beta = -0.5 * d @ priors.precision @ d
    log_v = np.sum(-np.log(state.sigma) - state.v / state.sigma)
    log_sigma = -(priors.sigma_shape + 1.0) * np.log(state.sigma) - priors.sigma_scale / state.sigma
    return float(loglik + log_beta + log_v + log_sigma)


# --- driver ------------------------------------------------------------------


def _check_design(data):
    if data.n < data.p + 2:
        raise ValueError(f"need at least {data.p + 2} observations for {data.p} coefficients, got {data.n}")
    if np.linalg.matrix_rank(data.x) < data.p:
        raise RankDeficientError("design matrix is rank deficient")


def initial_states(data, chains, rng, spread=0.5):
    """Least-squares start for beta, sigma = 1, v = 1; later chains get beta jittered."""
    beta0, *_ = np.linalg.lstsq(data.x, data.y, rcond=None)
    states = []
    for k in range(chains):
        beta = beta0.copy()
        if k > 0:
            beta = beta + spread * rng.standard_normal(beta.size)
        states.append(QrState(beta=beta, sigma=1.0, v=np.ones(data.n)))
    return states


def _run_chain(state, data, priors, constants, config, rng, chain):
    out = np.empty((config.retained, data.p + 1))
    kept = 0
    for t in range(1, config.iterations + 1):
        v = update_v(state, data, constants, rng)
        state = replace(state, v=v)
        state = replace(state, beta=update_beta(state, data, priors, constants, rng))
        state = replace(state, sigma=update_sigma(state, data, priors, constants, rng))
        if not state.is_finite():
            raise NonFiniteStateError(f"non-finite state in chain {chain}", t)
        if config.keep(t):
            out[kept, :-1] = state.beta
            out[kept, -1] = state.sigma
            kept += 1
    return out


def fit_bayesian_qr(x, y, tau, chain_config, priors=None, names=None):
    """Fit the ALD quantile regression by Gibbs sampling.

    Parameters
    ----------
    x : ndarray, shape (n, p)
        Design matrix including any intercept column.
    y : ndarray, shape (n,)
        Response on the continuous (transformed) scale.
    tau : float
        Quantile level in (0, 1).
    chain_config : ChainConfig
    priors : QrPriors, optional
        Defaults to :meth:`QrPriors.vague`.
    names : list of str, optional
        Coefficient names; ``beta[j]`` by default.

    Returns
    -------
    PosteriorDraws
        Columns are the coefficients followed by ``sigma``.
    """
    tau = validate_tau(tau)
    data = x if isinstance(x, QrData) else QrData(x, y)
    _check_design(data)
    priors = QrPriors.vague(data.p) if priors is None else priors
    if priors.dim != data.p:
        raise ValueError("prior dimension does not match the design")
    constants = mixture_constants(tau)
    names = [f"beta[{j}]" for j in range(data.p)] if names is None else list(names)

    rngs = chain_rngs(chain_config.seed, chain_config.chains + 1)
    starts = initial_states(data, chain_config.chains, rngs[-1])
    samples = np.stack(
        [
            _run_chain(starts[k], data, priors, constants, chain_config, rngs[k], k)
            for k in range(chain_config.chains)
        ]
    )
    logger.debug("QR fit tau=%.4f n=%d p=%d done", tau, data.n, data.p)
    return PosteriorDraws(samples, names + ["sigma"], chain_config, tau=tau)
