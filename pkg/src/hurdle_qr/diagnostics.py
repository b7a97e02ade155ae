"""Convergence diagnostics and posterior summaries for MCMC output."""

from dataclasses import asdict, dataclass

import numpy as np

from .hurdle import empirical_quantile

__all__ = [
    "DegenerateChainError",
    "ParamSummary",
    "psrf",
    "autocorrelation",
    "effective_sample_size",
    "credible_interval",
    "summarize",
]


class DegenerateChainError(ValueError):
    """Chain has no variation, so variance-based diagnostics are undefined."""


@dataclass(frozen=True)
class ParamSummary:
    mean: float
    sd: float
    lower: float
    upper: float
    psrf: float
    ess: float

    def as_dict(self):
        return asdict(self)


def psrf(chains):
    """Gelman-Rubin potential scale reduction factor.

    Classic estimator: ``sqrt((((n-1)/n) W + B/n) / W)`` with ``W`` the mean
    within-chain variance and ``B`` ``n`` times the variance of chain means.
    Identical chains give ``sqrt((n-1)/n)``, slightly below 1.

    Parameters
    ----------
    chains : array_like, shape (m, n)
        ``m >= 2`` chains of equal length ``n >= 2``.
    """
    x = np.asarray(chains, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("psrf needs at least two chains")
    m, n = x.shape
    if n < 2:
        raise ValueError("psrf needs chains of length >= 2")
    w = np.mean(np.var(x, axis=1, ddof=1))
    if w <= 0:
        raise DegenerateChainError("degenerate chain: zero within-chain variance")
    b = n * np.var(np.mean(x, axis=1), ddof=1)
    pooled = (n - 1) / n * w + b / n
    return float(np.sqrt(pooled / w))


def _centered(chain):
    x = np.asarray(chain, dtype=float).ravel()
    d = x - x.mean()
    if not np.any(d):
        raise DegenerateChainError("degenerate chain: constant values")
    return d


def _acf(d):
    n = d.size
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(d, size)
    acov = np.fft.irfft(f * np.conj(f), size)[:n]
    return acov / acov[0]


def autocorrelation(chain, max_lag):
    """Sample autocorrelations at lags ``0..max_lag`` (lag 0 is 1)."""
    d = _centered(chain)
    if not (0 <= max_lag < d.size):
        raise ValueError("max_lag must be smaller than the chain length")
    rho = _acf(d)[: max_lag + 1]
    rho[0] = 1.0
    return rho


def effective_sample_size(chain):
    """ESS with Geyer's initial positive sequence truncation.

    ``n / (1 + 2 sum_k rho_k)`` where the sum over lags stops before the
    first adjacent pair ``rho_{2m} + rho_{2m+1}`` that is not positive.
    Capped at ``n``.
    """
    d = _centered(chain)
    n = d.size
    rho = _acf(d)
    total = 0.0
    for m in range(n // 2):
        pair = rho[2 * m] + rho[2 * m + 1]
        if pair <= 0:
            break
        total += pair
    tau_int = max(2.0 * total - 1.0, 1.0)
    return float(n / tau_int)


def credible_interval(draws, level=0.95):
    """Percentile interval whose bounds are actual draws (no interpolation)."""
    x = np.asarray(draws, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("credible_interval of empty draws")
    if not (0.0 < level < 1.0):
        raise ValueError("level must lie in (0, 1)")
    return empirical_quantile(x, (1.0 - level) / 2.0), empirical_quantile(x, (1.0 + level) / 2.0)


def summarize(draws, level=0.95):
    """Per-parameter summary of a :class:`PosteriorDraws`.

    PSRF is NaN for single-chain fits; ESS is the sum of per-chain ESS.
    Chains with no variation yield NaN diagnostics rather than an error.
    """
    out = {}
    for j, name in enumerate(draws.names):
        x = draws.samples[:, :, j]
        pooled = x.ravel()
        lower, upper = credible_interval(pooled, level)
        try:
            r = psrf(x) if x.shape[0] > 1 else float("nan")
        except DegenerateChainError:
            r = float("nan")
        try:
            ess = float(sum(effective_sample_size(c) for c in x))
        except DegenerateChainError:
            ess = float("nan")
        out[name] = ParamSummary(
            mean=float(pooled.mean()),
            sd=float(pooled.std(ddof=1)) if pooled.size > 1 else 0.0,
            lower=float(lower),
            upper=float(upper),
            psrf=r,
            ess=ess,
        )
    return out
