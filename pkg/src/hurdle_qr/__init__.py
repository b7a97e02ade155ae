"""Bayesian two-part hurdle quantile regression for count data.

Counts at or below a hurdle point ``c`` are modelled by a logistic part;
counts above it are jittered to ``ln(y - c - u)`` and modelled by Bayesian
quantile regression with an asymmetric Laplace likelihood.
"""

from .dataset import Dataset
from .diagnostics import autocorrelation, credible_interval, effective_sample_size, psrf, summarize
from .distributions import (
    AldParams,
    ald_logpdf,
    check_loss,
    mixture_constants,
    sample_ald_mixture,
    sample_gig_half,
    sample_inverse_gamma,
)
from .hurdle import (
    NO_HURDLE,
    HurdleRegionError,
    HurdleSpec,
    detect_hurdle,
    empirical_quantile,
    inverse_transform,
    jitter_transform,
    remap_quantile,
)
from .logistic import HurdleIndicators, LogisticPriors, fit_logistic, logistic_loglik, odds_effect
from .mcmc import ChainConfig, PosteriorDraws
from .qr_gibbs import QrPriors, fit_bayesian_qr
from .simulation import SimConfig, generate_dataset, parameter_mse, run_replication_study
from .two_part import TwoPartFit, fit_two_part, predict_count_quantile, two_part_logdensity

__version__ = "0.1.0"
