"""Mass-point detection, the hurdle jitter transform and quantile remapping."""

from collections import Counter
from dataclasses import dataclass, field
import math

import numpy as np

from .distributions import validate_tau

__all__ = [
    "DEFAULT_THRESHOLD",
    "NO_HURDLE",
    "HurdleSpec",
    "JitteredData",
    "HurdleRegionError",
    "detect_hurdle",
    "frequency_table",
    "jitter_transform",
    "inverse_transform",
    "empirical_quantile",
    "empirical_cdf",
    "remap_quantile",
]

DEFAULT_THRESHOLD = 0.06
_U_EDGE = 2.0**-53

#: Hurdle value meaning "no hurdle": every observation goes through the
#: jitter ``ln(y + 1 - u)`` and nothing is sent to the point-mass part.
NO_HURDLE = -1


class HurdleRegionError(ValueError):
    """The requested quantile sits on or below the hurdle."""


@dataclass(frozen=True)
class HurdleSpec:
    """Hurdle point ``c`` and the mass-point threshold behind it.

    ``c == NO_HURDLE`` (-1) encodes the plain quantile-regression model.
    ``frequencies`` holds the relative frequency table when the spec came
    from :func:`detect_hurdle`.
    """

    c: int
    threshold: float = DEFAULT_THRESHOLD
    frequencies: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if int(self.c) != self.c or self.c < NO_HURDLE:
            raise ValueError(f"hurdle point must be an integer >= 0 (or -1 for none), got {self.c}")
        object.__setattr__(self, "c", int(self.c))
        if not (0.0 < self.threshold < 1.0):
            raise ValueError(f"threshold must lie in (0, 1), got {self.threshold}")

    @property
    def is_hurdle(self):
        return self.c >= 0


@dataclass(frozen=True)
class JitteredData:
    """Result of :func:`jitter_transform`.

    ``u`` is NaN where the count was at or below the hurdle (no noise drawn).
    """

    y_star: np.ndarray
    counts: np.ndarray
    u: np.ndarray
    c: int

    @property
    def beyond(self):
        """Mask of observations above the hurdle."""
        return self.counts > self.c


def _as_counts(counts, integer=True):
    arr = np.asarray(counts, dtype=float)
    if arr.ndim != 1:
        arr = arr.ravel()
    if np.any(~np.isfinite(arr)):
        raise ValueError("counts must be finite")
    if np.any(arr < 0):
        i = int(np.flatnonzero(arr < 0)[0])
        raise ValueError(f"negative count {arr[i]} at position {i}")
    if integer and np.any(arr != np.floor(arr)):
        raise ValueError("counts must be integers")
    return arr


def frequency_table(counts):
    """Relative frequency of each distinct integer value, keyed by value."""
    arr = _as_counts(counts, integer=False)
    n = arr.size
    if n == 0:
        raise ValueError("cannot tabulate an empty collection")
    tally = Counter(arr[arr == np.floor(arr)].astype(int).tolist())
    return {k: tally[k] / n for k in sorted(tally)}


def detect_hurdle(counts, threshold=DEFAULT_THRESHOLD):
    """Place the hurdle past the consecutive run of substantial mass points.

    Returns the largest ``m`` such that each of ``0..m`` has relative
    frequency >= ``threshold``.  If zero itself is not substantial the spec
    has ``c == NO_HURDLE``.  Non-integer values (continuous tails) are
    counted in the denominator but never form mass points.
    """
    freqs = frequency_table(counts)
    c = NO_HURDLE
    while freqs.get(c + 1, 0.0) >= threshold:
        c += 1
    return HurdleSpec(c=c, threshold=threshold, frequencies=freqs)


def jitter_transform(counts, spec, rng=None, u=None):
    """Map counts to the semi-continuous scale used by the hurdle model.

    ``y <= c`` becomes exactly 0; ``y > c`` becomes ``ln(y - c - u)`` with a
    fresh ``u ~ Uniform(0, 1)`` per observation.  Non-integer values above the
    hurdle are jittered the same way.

    Parameters
    ----------
    counts : array_like
        Nonnegative observations.
    spec : HurdleSpec or int
    rng : numpy.random.Generator, optional
        Source of the uniforms.  One uniform is drawn per observation, in
        order, whether or not it is used, so the noise attached to
        observation ``i`` does not depend on the other observations' values.
    u : array_like, optional
        Explicit uniforms (length n), for replaying an audit.
    """
    c = spec.c if isinstance(spec, HurdleSpec) else HurdleSpec(c=spec).c
    y = _as_counts(counts, integer=False)
    if u is None:
        if rng is None:
            raise ValueError("jitter_transform needs either rng or u")
        u = rng.random(y.size)
    else:
        u = np.asarray(u, dtype=float)
        if u.shape != y.shape:
            raise ValueError("u must have one entry per observation")
    # keep ln(1 - u) strictly negative and ln(y - c - u) finite in floating point
    u = np.clip(u, _U_EDGE, 1.0 - _U_EDGE)
    beyond = y > c
    y_star = np.zeros_like(y)
    y_star[beyond] = np.log(y[beyond] - c - u[beyond])
    kept_u = np.where(beyond, u, np.nan)
    return JitteredData(y_star=y_star, counts=y, u=kept_u, c=c)


def inverse_transform(y_star, spec):
    """Back to the count scale: ``ceil(exp(y_star) + c)``."""
    c = spec.c if isinstance(spec, HurdleSpec) else int(spec)
    y_star = np.asarray(y_star, dtype=float)
    if not np.all(np.isfinite(y_star)):
        raise ValueError("inverse_transform requires finite input")
    out = np.ceil(np.exp(y_star) + c)
    # exp underflow keeps the result at the first value above the hurdle
    out = np.maximum(out, c + 1).astype(np.int64)
    return int(out) if out.ndim == 0 else out


def empirical_quantile(data, tau):
    """``inf{y : F_n(y) >= tau}``: the order statistic of rank ``ceil(n*tau)``."""
    tau = validate_tau(tau)
    x = np.sort(np.asarray(data, dtype=float).ravel())
    n = x.size
    if n == 0:
        raise ValueError("empirical_quantile of empty data")
    # guard against n*tau landing a hair above an integer through rounding
    k = math.ceil(round(n * tau, 9))
    return float(x[max(k, 1) - 1])


def empirical_cdf(data, q):
    """Proportion of ``data`` at or below ``q``."""
    x = np.asarray(data, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("empirical_cdf of empty data")
    return float(np.count_nonzero(x <= q)) / x.size


def remap_quantile(full_data, truncated_data, tau, inclusive=True):
    """Level on the truncated data matching the full-data ``tau`` quantile.

    Computes ``q = empirical_quantile(full_data, tau)`` and returns the
    proportion of ``truncated_data`` at or below ``q`` (strictly below when
    ``inclusive`` is False).

    Raises
    ------
    HurdleRegionError
        If ``q`` lies below every truncated value, or the remapped level is
        1 (nothing above ``q`` remains to fit).
    """
    q = empirical_quantile(full_data, tau)
    t = np.asarray(truncated_data, dtype=float).ravel()
    if t.size == 0:
        raise ValueError("truncated data is empty")
    below = np.count_nonzero(t <= q) if inclusive else np.count_nonzero(t < q)
    if below == 0:
        raise HurdleRegionError(
            f"quantile falls inside the hurdle region: the {tau:g} quantile "
            f"({q:g}) is below every retained observation"
        )
    level = below / t.size
    if level >= 1.0:
        raise HurdleRegionError(
            f"the {tau:g} quantile ({q:g}) is at or above every retained observation"
        )
    return level
