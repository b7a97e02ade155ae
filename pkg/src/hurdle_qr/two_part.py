"""The two-part hurdle quantile regression model.

Observations at or below the hurdle ``c`` are explained by a logistic model
for ``P(y <= c)``; the rest are jittered to ``ln(y - c - u)`` and modelled by
Bayesian quantile regression at the level that matches the requested
full-data quantile.  The likelihood factorizes, so the parts are fitted
independently.
"""

from dataclasses import dataclass
import logging

import numpy as np
from scipy.special import expit

from .diagnostics import credible_interval
from .distributions import mixture_constants, validate_tau
from .hurdle import (
    NO_HURDLE,
    HurdleRegionError,
    HurdleSpec,
    JitteredData,
    empirical_cdf,
    inverse_transform,
    jitter_transform,
    remap_quantile,
)
from .logistic import HurdleIndicators, fit_logistic, logistic_loglik
from .mcmc import child_seed
from .qr_gibbs import fit_bayesian_qr

__all__ = [
    "INTERCEPT",
    "TwoPartFit",
    "CountPrediction",
    "fit_two_part",
    "jitter_for_fit",
    "fit_hurdle_part",
    "two_part_logdensity",
    "joint_loglik",
    "part_logliks",
    "predict_count_quantile",
    "prediction_residuals",
]

logger = logging.getLogger(__name__)

INTERCEPT = "(Intercept)"

# stream indices under the fit seed
_JITTER, _QR, _LOGIT = 0, 1, 2


@dataclass
class TwoPartFit:
    hurdle: HurdleSpec
    tau_requested: float
    tau_effective: float
    qr_draws: object
    logistic_draws: object
    jitter: JitteredData
    x_names: list
    z_names: list

    @property
    def beyond(self):
        """Mask of observations used by the quantile part."""
        return self.jitter.beyond

    def beta_mean(self):
        return self.qr_draws.pooled()[:, : len(self.x_names)].mean(axis=0)

    def beta_draws(self):
        return self.qr_draws.pooled()[:, : len(self.x_names)]


@dataclass(frozen=True)
class CountPrediction:
    """Count-scale conditional quantile: posterior-mean point and interval."""

    point: np.ndarray
    lower: np.ndarray
    upper: np.ndarray


def _as_spec(hurdle):
    if isinstance(hurdle, HurdleSpec):
        return hurdle
    if hurdle is None:
        return HurdleSpec(NO_HURDLE)
    return HurdleSpec(int(hurdle))


def fit_two_part(dataset, hurdle, tau, chain_config, priors_qr=None, priors_logit=None, include_logistic=True):
    """Fit both parts of the hurdle model at full-data quantile ``tau``.

    Parameters
    ----------
    dataset : Dataset
    hurdle : HurdleSpec, int or None
        ``None`` or -1 fits plain Bayesian QR on ``ln(y + 1 - u)`` with no
        logistic part and ``tau_effective == tau``.
    tau : float
        Quantile level on the full data.
    chain_config : ChainConfig
        Its seed drives the jitter and both samplers through derived streams.
    include_logistic : bool
        Skip the logistic part when only the quantile part is of interest
        (its draws are then None).

    Raises
    ------
    HurdleRegionError
        If ``tau`` maps into the hurdle region.
    ValueError
        If nothing lies above the hurdle, or (with the logistic part) nothing
        lies at or below it.
    """
    tau = validate_tau(tau)
    spec = _as_spec(hurdle)
    seed = chain_config.seed
    jd = jitter_for_fit(dataset, spec, seed)
    beyond = jd.beyond
    n_beyond = int(beyond.sum())
    if n_beyond == 0:
        raise ValueError(f"no observations above the hurdle c={spec.c}")

    logistic_draws = None
    z_names = [INTERCEPT] + list(dataset.z_names)
    if spec.is_hurdle:
        if include_logistic and n_beyond == dataset.n:
            raise ValueError(f"no observations at or below the hurdle c={spec.c}")
        try:
            tau_eff = remap_quantile(dataset.counts, dataset.counts[beyond], tau)
        except HurdleRegionError as err:
            floor = empirical_cdf(dataset.counts, spec.c)
            raise HurdleRegionError(f"{err}; requested tau must exceed {floor:.4f}") from None
        if include_logistic:
            logistic_draws = fit_hurdle_part(dataset, spec, chain_config, priors_logit)
    else:
        tau_eff = tau

    x_names = [INTERCEPT] + list(dataset.x_names)
    qr_draws = fit_bayesian_qr(
        dataset.design_x()[beyond],
        jd.y_star[beyond],
        tau_eff,
        chain_config.with_seed(child_seed(seed, _QR)),
        priors_qr,
        names=x_names,
    )
    logger.info("fit c=%d tau=%.4f -> tau_effective=%.4f (n beyond=%d)", spec.c, tau, tau_eff, n_beyond)
    return TwoPartFit(spec, tau, tau_eff, qr_draws, logistic_draws, jd, x_names, z_names)


def jitter_for_fit(dataset, hurdle, seed):
    """The jitter :func:`fit_two_part` applies under ``seed``.

    One uniform is drawn per observation whatever the hurdle, so fits that
    share a seed share their noise.
    """
    return jitter_transform(dataset.counts, _as_spec(hurdle), np.random.default_rng(child_seed(seed, _JITTER)))


def fit_hurdle_part(dataset, hurdle, chain_config, priors_logit=None):
    """Logistic part alone, seeded exactly as inside :func:`fit_two_part`."""
    spec = _as_spec(hurdle)
    if not spec.is_hurdle:
        raise ValueError("the plain quantile model has no hurdle part")
    indicators = HurdleIndicators((dataset.counts <= spec.c).astype(int), dataset.design_z())
    return fit_logistic(
        indicators,
        chain_config.with_seed(child_seed(chain_config.seed, _LOGIT)),
        priors_logit,
        names=[INTERCEPT] + list(dataset.z_names),
    )


def two_part_logdensity(y_star, omega, location, sigma, constants, v):
    """Log of the two-part density at one observation.

    ``log(omega)`` at ``y_star == 0``; otherwise ``log(1 - omega)`` plus the
    normal log density with mean ``location + theta*v`` and variance
    ``psi^2*sigma*v``.  Returns ``-inf`` for impossible events.
    """
    if y_star == 0:
        return float(np.log(omega)) if omega > 0 else -np.inf
    if omega >= 1:
        return -np.inf
    var = constants.psi_sq * sigma * v
    r = y_star - location - constants.theta * v
    return float(np.log1p(-omega) - 0.5 * (np.log(2.0 * np.pi * var) + r * r / var))


def joint_loglik(gamma, beta, sigma, v, y_star, x, z, tau):
    """Sum of :func:`two_part_logdensity` over observations (``x``, ``z`` are designs)."""
    k = mixture_constants(tau)
    omega = expit(z @ gamma)
    loc = x @ beta
    return float(
        sum(two_part_logdensity(y_star[i], omega[i], loc[i], sigma, k, v[i]) for i in range(y_star.size))
    )


def part_logliks(gamma, beta, sigma, v, y_star, x, z, tau):
    """(logistic part, quantile part) log likelihoods; they add up to :func:`joint_loglik`."""
    k = mixture_constants(tau)
    nz = y_star != 0
    logit = logistic_loglik(gamma, HurdleIndicators.from_y_star(y_star, z))
    var = k.psi_sq * sigma * v[nz]
    r = y_star[nz] - x[nz] @ beta - k.theta * v[nz]
    qr = -0.5 * np.sum(np.log(2.0 * np.pi * var) + r * r / var)
    return logit, float(qr)


def _design(fit, covariates):
    x = np.asarray(covariates, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    p = len(fit.x_names) - 1
    if x.shape[1] != p:
        raise ValueError(f"expected {p} covariates, got {x.shape[1]}")
    return np.column_stack([np.ones(x.shape[0]), x])


def predict_count_quantile(fit, covariates, level=0.95):
    """Count-scale quantile prediction for rows of raw covariates.

    The point prediction maps ``x'beta`` at the posterior-mean ``beta`` back
    through ``ceil(exp(.) + c)``; the interval is the percentile interval of
    the per-draw predictions.
    """
    design = _design(fit, covariates)
    point = inverse_transform(design @ fit.beta_mean(), fit.hurdle)
    per_draw = inverse_transform(fit.beta_draws() @ design.T, fit.hurdle)
    bounds = np.array([credible_interval(col, level) for col in per_draw.T])
    return CountPrediction(
        point=np.atleast_1d(point), lower=bounds[:, 0].astype(np.int64), upper=bounds[:, 1].astype(np.int64)
    )


def prediction_residuals(fit, dataset):
    """``y - y_hat`` on the observations the quantile part was fitted to."""
    mask = fit.beyond
    y_hat = inverse_transform(dataset.design_x()[mask] @ fit.beta_mean(), fit.hurdle)
    return dataset.counts[mask] - y_hat
