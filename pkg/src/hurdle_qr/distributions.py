"""Asymmetric Laplace distribution and the auxiliary samplers used by the
quantile-regression Gibbs sampler.

All samplers take a ``numpy.random.Generator`` and are deterministic given
its state.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "validate_tau",
    "AldParams",
    "MixtureConstants",
    "check_loss",
    "mixture_constants",
    "ald_logpdf",
    "sample_ald_mixture",
    "sample_gig_half",
    "gig_half_from_noise",
    "sample_inverse_gamma",
]


def validate_tau(tau):
    """Return ``tau`` as a float, rejecting anything outside (0, 1)."""
    tau = float(tau)
    if not (0.0 < tau < 1.0):
        raise ValueError(f"quantile level must lie in the open interval (0, 1), got {tau}")
    return tau


@dataclass(frozen=True)
class AldParams:
    """Location, scale and skewness of an asymmetric Laplace law."""

    mu: float
    sigma: float
    tau: float

    def __post_init__(self):
        if not np.isfinite(self.mu):
            raise ValueError("mu must be finite")
        if not (self.sigma > 0 and np.isfinite(self.sigma)):
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        object.__setattr__(self, "tau", validate_tau(self.tau))


@dataclass(frozen=True)
class MixtureConstants:
    """Constants of the normal location-scale mixture form of the ALD."""

    theta: float
    psi_sq: float

    @property
    def psi(self):
        return float(np.sqrt(self.psi_sq))


def check_loss(r, tau):
    """Quantile check loss ``tau*max(r, 0) + (1 - tau)*max(-r, 0)``.

    Works elementwise on arrays; scalars in give a float back.
    """
    tau = validate_tau(tau)
    r = np.asarray(r, dtype=float)
    if not np.all(np.isfinite(r)):
        raise ValueError("check_loss requires finite residuals")
    out = tau * np.maximum(r, 0.0) + (1.0 - tau) * np.maximum(-r, 0.0)
    return float(out) if out.ndim == 0 else out


def mixture_constants(tau):
    tau = validate_tau(tau)
    w = tau * (1.0 - tau)
    return MixtureConstants(theta=(1.0 - 2.0 * tau) / w, psi_sq=2.0 / w)


def ald_logpdf(y, p):
    """Log density of ALD(mu, sigma, tau) at ``y``.

    The exponent carries a minus sign: ``log(tau(1-tau)/sigma) - rho((y-mu)/sigma)``.
    """
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise ValueError("ald_logpdf requires finite y")
    out = np.log(p.tau * (1.0 - p.tau) / p.sigma) - check_loss((y - p.mu) / p.sigma, p.tau)
    return float(out) if np.ndim(out) == 0 else out


def sample_ald_mixture(p, rng, size=None):
    """Draw from ALD(mu, sigma, tau) through its normal mixture representation.

    ``v`` is exponential with mean ``sigma`` and the draw is
    ``mu + theta*v + psi*sqrt(sigma*v)*u`` with ``u`` standard normal.
    """
    k = mixture_constants(p.tau)
    v = rng.exponential(scale=p.sigma, size=size)
    u = rng.standard_normal(size=size)
    return p.mu + k.theta * v + k.psi * np.sqrt(p.sigma * v) * u


def gig_half_from_noise(a, b, z, unif):
    """Map one standard normal and one uniform to a GIG(1/2, a, b) draw.

    The density is proportional to ``x**-0.5 * exp(-(a/x + b*x)/2)``.  The
    reciprocal of such a variate is inverse Gaussian with mean
    ``sqrt(b/a)`` and shape ``b``; this is the Michael-Schucany-Haas
    construction for that law, rewritten for the reciprocal so that
    ``a == 0`` is exact and returns the limiting Gamma(1/2, rate b/2) draw
    ``z**2 / b``.

    Elementwise and stateless, so observation ``i`` depends only on
    ``(a[i], b[i], z[i], unif[i])``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    r = np.sqrt(a / b)
    h = np.square(z) / (2.0 * b)
    big = r + h + np.sqrt(h * h + 2.0 * h * r)
    # big >= r always; pick big with probability big/(big + r)
    take_big = unif * (big + r) <= big
    small = np.divide(r * r, big, out=np.zeros(np.shape(big)), where=big > 0)
    return np.where(take_big, big, small)


def _check_positive(**params):
    for name, value in params.items():
        value = np.asarray(value, dtype=float)
        if not np.all(value > 0) or not np.all(np.isfinite(value)):
            raise ValueError(f"{name} must be positive and finite")


def sample_gig_half(a, b, rng, size=None):
    """Generalized inverse Gaussian draw with index 1/2.

    Parameters
    ----------
    a, b : float or ndarray
        Coefficients of ``1/x`` and ``x`` in the exponent, both > 0.
    rng : numpy.random.Generator
    size : int or tuple, optional
        Output shape; defaults to the broadcast shape of ``a`` and ``b``.
    """
    _check_positive(a=a, b=b)
    if size is None:
        size = np.broadcast(np.asarray(a), np.asarray(b)).shape
    z = rng.standard_normal(size)
    unif = rng.random(size)
    out = gig_half_from_noise(a, b, z, unif)
    return float(out) if np.ndim(out) == 0 else out


def sample_inverse_gamma(shape, scale, rng, size=None):
    """Draw ``X`` with density proportional to ``x**(-shape-1) * exp(-scale/x)``."""
    _check_positive(shape=shape, scale=scale)
    out = scale / rng.standard_gamma(shape, size=size)
    return float(out) if np.ndim(out) == 0 else out
