"""Replication study comparing plain QR with hurdle-0 and hurdle-c models.

Data are log-normal citation-like counts with planted mass points: values
below ``mass_cutoff`` are floored, larger values stay continuous.  Each
replication fits the quantile part of every model at the level that matches
the requested full-data quantile, then records prediction error, slope MSE
and credible-interval widths.
"""

from concurrent.futures import ProcessPoolExecutor
import csv
from dataclasses import dataclass, field
import logging

import numpy as np

from .dataset import Dataset
from .diagnostics import credible_interval, psrf
from .distributions import validate_tau
from .hurdle import NO_HURDLE, empirical_quantile
from .mcmc import ChainConfig, child_seed
from .two_part import fit_two_part, prediction_residuals

__all__ = [
    "SimConfig",
    "SimulatedSample",
    "ReplicationResult",
    "StudyResult",
    "RESULT_COLUMNS",
    "generate_dataset",
    "parameter_mse",
    "model_label",
    "run_replication",
    "run_replication_study",
]

logger = logging.getLogger(__name__)

RESULT_COLUMNS = ["replication", "model", "n", "tau_requested", "tau_effective", "metric", "parameter", "value", "seed"]
SLOPES = ("x1", "x2")


@dataclass(frozen=True)
class SimConfig:
    n: int = 1000
    intercept: float = 2.0
    slope1: float = -0.2
    slope2: float = 0.0
    lognormal_sd: float = 0.4
    mass_cutoff: float = 4.0
    x1_meanlog: float = 2.0
    x1_sdlog: float = 2.0
    x2_mean: float = 0.5
    x2_sd: float = 0.5
    eps_sd: float = 1.0
    replications: int = 10
    quantiles: tuple = (0.85,)
    hurdle_c: int = 3
    seed: int = 0
    chain_config: ChainConfig = field(default_factory=ChainConfig.simulation_default)
    level: float = 0.95

    def __post_init__(self):
        if self.n <= 0:
            raise ValueError("n must be positive")
        if self.replications < 1:
            raise ValueError("replications must be positive")
        if self.hurdle_c < 1:
            raise ValueError("hurdle_c must be >= 1 so that it differs from the hurdle-0 model")
        object.__setattr__(self, "quantiles", tuple(validate_tau(t) for t in self.quantiles))

    @property
    def truth(self):
        return np.array([self.slope1, self.slope2])

    def models(self):
        return [NO_HURDLE, 0, self.hurdle_c]


@dataclass(frozen=True)
class SimulatedSample:
    dataset: Dataset
    y_continuous: np.ndarray
    meanlog: np.ndarray


def generate_dataset(config, rng):
    """Draw one sample.

    ``y ~ LogNormal(meanlog = intercept + slope1*x1 + slope2*x2 + eps, sdlog)``
    with ``x1 ~ LogNormal(2, 2)``, ``x2 ~ N(0.5, 0.5)``, ``eps ~ N(0, 1)``;
    values below ``mass_cutoff`` are floored.
    """
    n = config.n
    x1 = rng.lognormal(config.x1_meanlog, config.x1_sdlog, n)
    x2 = rng.normal(config.x2_mean, config.x2_sd, n)
    eps = rng.normal(0.0, config.eps_sd, n) if config.eps_sd > 0 else np.zeros(n)
    meanlog = config.intercept + config.slope1 * x1 + config.slope2 * x2 + eps
    y_cont = rng.lognormal(meanlog, config.lognormal_sd)
    y = np.where(y_cont < config.mass_cutoff, np.floor(y_cont), y_cont)
    ds = Dataset(y, np.column_stack([x1, x2]), list(SLOPES))
    return SimulatedSample(ds, y_cont, meanlog)


def parameter_mse(estimates, truth):
    """Mean squared error over slope coefficients (intercept excluded by the caller)."""
    est = np.asarray(estimates, dtype=float).ravel()
    tru = np.asarray(truth, dtype=float).ravel()
    if est.shape != tru.shape:
        raise ValueError("estimates and truth must have the same length")
    if est.size == 0:
        raise ValueError("need at least one slope")
    return float(np.mean((tru - est) ** 2))


def model_label(c):
    return "no_hurdle" if c == NO_HURDLE else f"hurdle{c}"


@dataclass
class ReplicationResult:
    replication: int
    seed: int
    model: str
    n: int
    tau_requested: float
    tau_effective: float
    quantile_value: float
    median_abs_error: float
    mean_abs_error: float
    mse: float
    estimates: dict
    intervals: dict
    max_psrf: float

    def ci_width(self, name):
        lo, hi = self.intervals[name]
        return hi - lo

    def covers(self, name, value):
        lo, hi = self.intervals[name]
        return lo <= value <= hi

    def rows(self):
        base = [self.replication, self.model, self.n, self.tau_requested, self.tau_effective]
        out = [
            base + ["quantile_value", "", self.quantile_value],
            base + ["median_abs_error", "", self.median_abs_error],
            base + ["mean_abs_error", "", self.mean_abs_error],
            base + ["mse", "", self.mse],
            base + ["max_psrf", "", self.max_psrf],
        ]
        for name in self.estimates:
            lo, hi = self.intervals[name]
            out += [
                base + ["estimate", name, self.estimates[name]],
                base + ["ci_lower", name, lo],
                base + ["ci_upper", name, hi],
                base + ["ci_width", name, hi - lo],
            ]
        return [r + [self.seed] for r in out]


@dataclass
class StudyResult:
    config: SimConfig
    results: list
    failures: list

    def select(self, model=None, tau=None, n=None):
        return [
            r
            for r in self.results
            if (model is None or r.model == model)
            and (tau is None or np.isclose(r.tau_requested, tau))
            and (n is None or r.n == n)
        ]

    def median(self, attr, model, tau=None):
        return float(np.median([getattr(r, attr) for r in self.select(model, tau)]))

    def rows(self):
        return [row for r in self.results for row in r.rows()]

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(RESULT_COLUMNS)
            for row in self.rows():
                writer.writerow(_fmt(v) for v in row)


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def run_replication(config, replication):
    """All models and quantiles for one replication; raises on any fit failure."""
    seed = child_seed(config.seed, replication)
    rng = np.random.default_rng(child_seed(seed, 0))
    sample = generate_dataset(config, rng)
    ds = sample.dataset
    chain = config.chain_config.with_seed(child_seed(seed, 1))
    out = []
    for tau in config.quantiles:
        q = empirical_quantile(ds.counts, tau)
        for c in config.models():
            fit = fit_two_part(ds, c, tau, chain, include_logistic=False)
            beta = fit.beta_draws()
            means = beta.mean(axis=0)
            intervals = {name: credible_interval(beta[:, j + 1], config.level) for j, name in enumerate(SLOPES)}
            resid = np.abs(prediction_residuals(fit, ds))
            max_r = max(psrf(fit.qr_draws.param(nm)) for nm in fit.qr_draws.names) if chain.chains > 1 else np.nan
            out.append(
                ReplicationResult(
                    replication=replication,
                    seed=seed,
                    model=model_label(c),
                    n=config.n,
                    tau_requested=tau,
                    tau_effective=fit.tau_effective,
                    quantile_value=q,
                    median_abs_error=float(np.median(resid)),
                    mean_abs_error=float(np.mean(resid)),
                    mse=parameter_mse(means[1:], config.truth),
                    estimates={name: float(means[j + 1]) for j, name in enumerate(SLOPES)},
                    intervals=intervals,
                    max_psrf=float(max_r),
                )
            )
    return out


def _safe_replication(args):
    config, r = args
    try:
        return r, run_replication(config, r), None
    except Exception as err:  # noqa: BLE001 - a failed replication must not stop the study
        return r, None, f"{type(err).__name__}: {err}"


def run_replication_study(config, n_jobs=1):
    """Run every replication; failed ones are logged and counted, not fatal.

    Results are ordered by replication, then quantile, then model, whatever
    ``n_jobs`` is.
    """
    tasks = [(config, r) for r in range(config.replications)]
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            outcomes = list(pool.map(_safe_replication, tasks))
    else:
        outcomes = [_safe_replication(t) for t in tasks]
    results, failures = [], []
    for r, res, err in sorted(outcomes, key=lambda o: o[0]):
        if err is not None:
            logger.warning("replication %d failed: %s", r, err)
            failures.append((r, err))
        else:
            results.extend(res)
    return StudyResult(config, results, failures)
