"""Command-line interface: ``hurdle-qr fit|sweep|simulate|diagnose``.

Exit codes: 0 success, 1 model or data error, 2 usage error.  Option values
come from the command line first, then a ``--config`` file of ``key = value``
lines (keys are long option names), then built-in defaults.
"""

import argparse
import logging
from pathlib import Path
import sys

import numpy as np

from .diagnostics import DegenerateChainError, autocorrelation, effective_sample_size, psrf, summarize
from .hurdle import DEFAULT_THRESHOLD, NO_HURDLE, HurdleRegionError, HurdleSpec, detect_hurdle
from .io import DataError, load_csv, read_config, read_draws, write_draws, write_json, write_rows
from .logistic import SeparationError, odds_effect
from .mcmc import ChainConfig
from .simulation import SimConfig, model_label, run_replication_study
from .two_part import fit_hurdle_part, fit_two_part, jitter_for_fit

logger = logging.getLogger("hurdle_qr")

EXIT_OK, EXIT_MODEL, EXIT_USAGE = 0, 1, 2

MODEL_ERRORS = (DataError, HurdleRegionError, SeparationError, np.linalg.LinAlgError, ValueError, RuntimeError)

_CHAIN_DEFAULTS = {"chains": 3, "iters": 10_000, "burnin": 1_000, "thin": 90, "seed": 0}
DEFAULTS = {
    "fit": {
        **_CHAIN_DEFAULTS,
        "input": None,
        "count_col": None,
        "covariates": None,
        "hurdle": "3",
        "threshold": DEFAULT_THRESHOLD,
        "tau": ["0.5"],
        "level": 0.95,
        "psrf_limit": 1.1,
        "out_dir": "hurdle_qr_out",
        "log": [],
        "z_covariates": None,
    },
    "simulate": {
        **_CHAIN_DEFAULTS,
        "n": 1000,
        "replications": 10,
        "tau": ["0.85"],
        "hurdle_c": 3,
        "out": "simulation.csv",
        "jobs": 1,
    },
    "diagnose": {"max_lag": 50, "out": None},
}
DEFAULTS["sweep"] = {**DEFAULTS["fit"], "tau": ["range:0.05:0.95:0.05"]}


class UsageError(Exception):
    pass


def parse_taus(values):
    """Expand ``--tau`` values: plain numbers, comma lists, or ``range:start:stop:step``."""
    out = []
    for value in values:
        for item in str(value).split(","):
            item = item.strip()
            if not item:
                continue
            if item.startswith("range:"):
                try:
                    start, stop, step = (float(s) for s in item.split(":")[1:])
                except ValueError:
                    raise UsageError(f"bad tau range {item!r}; use range:start:stop:step") from None
                if step <= 0 or stop < start:
                    raise UsageError(f"bad tau range {item!r}")
                count = int(round((stop - start) / step)) + 1
                out.extend(round(start + i * step, 10) for i in range(count))
            else:
                try:
                    out.append(float(item))
                except ValueError:
                    raise UsageError(f"bad tau value {item!r}") from None
    taus = sorted(set(out))
    if not taus or any(not (0 < t < 1) for t in taus):
        raise UsageError("every tau must lie in (0, 1)")
    return taus


def _split_names(value):
    if value is None:
        return None
    if isinstance(value, list):
        value = ",".join(value)
    return [s.strip() for s in value.split(",") if s.strip()]


def _add_chain_options(p):
    g = p.add_argument_group("MCMC")
    g.add_argument("--chains", type=int)
    g.add_argument("--iters", type=int, help="iterations per chain (default 10000)")
    g.add_argument("--burnin", type=int, help="burn-in iterations (default 1000)")
    g.add_argument("--thin", type=int, help="thinning interval (default 90)")
    g.add_argument("--seed", type=int)
    g.add_argument("--heavy", action="store_true", help="100000 iterations, burn-in 50000, thinning 160")


def build_parser():
    parser = argparse.ArgumentParser(prog="hurdle-qr", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    for name, helptext in (
        ("fit", "fit the two-part model at one or more quantile levels"),
        ("sweep", "fit over a quantile grid (default 0.05..0.95 by 0.05)"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", help="key = value file of option defaults")
        p.add_argument("--input", help="CSV file with a header row")
        p.add_argument("--count-col", dest="count_col")
        p.add_argument("--covariates", help="comma-separated covariate columns for the quantile part")
        p.add_argument("--z-covariates", dest="z_covariates", help="covariates of the logistic part (default: same)")
        p.add_argument("--log", action="append", help="column to log-transform (repeatable)")
        p.add_argument("--hurdle", help='integer hurdle point, "auto" or "none" (default 3)')
        p.add_argument("--threshold", type=float, help="mass-point share for --hurdle auto (default 0.06)")
        p.add_argument("--tau", action="append", help="quantile level, comma list or range:start:stop:step")
        p.add_argument("--level", type=float, help="credible level (default 0.95)")
        p.add_argument("--psrf-limit", dest="psrf_limit", type=float)
        p.add_argument("--out-dir", dest="out_dir")
        _add_chain_options(p)

    p = sub.add_parser("simulate", help="run the replication study on simulated data")
    p.add_argument("--config")
    p.add_argument("--n", type=int)
    p.add_argument("--replications", type=int)
    p.add_argument("--full", action="store_true", help="100 replications")
    p.add_argument("--tau", action="append")
    p.add_argument("--hurdle-c", dest="hurdle_c", type=int)
    p.add_argument("--out")
    p.add_argument("--jobs", type=int, help="worker processes over replications")
    _add_chain_options(p)

    p = sub.add_parser("diagnose", help="PSRF, ESS and autocorrelations of a draws CSV")
    p.add_argument("--config")
    p.add_argument("--draws", required=True)
    p.add_argument("--max-lag", dest="max_lag", type=int)
    p.add_argument("--out", help="JSON output (stdout summary only when omitted)")
    return parser


def _coerce(key, raw, default):
    if isinstance(default, bool):
        return str(raw).lower() in ("1", "true", "yes")
    if isinstance(default, list):
        return [raw] if isinstance(raw, str) else list(raw)
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


def resolve(args):
    """Fill unset options from the config file, then defaults."""
    defaults = DEFAULTS[args.command]
    config = read_config(args.config) if getattr(args, "config", None) else {}
    for key, default in defaults.items():
        if getattr(args, key, None) is None:
            if key in config:
                try:
                    value = _coerce(key, config[key], default)
                except ValueError:
                    raise UsageError(f"config value for {key!r} is invalid: {config[key]!r}") from None
            else:
                value = default
            setattr(args, key, value)
    return args


def chain_config_from(args):
    try:
        if getattr(args, "heavy", False):
            heavy = ChainConfig.heavy()
            return ChainConfig(args.chains, heavy.iterations, heavy.burn_in, heavy.thinning, args.seed)
        return ChainConfig(args.chains, args.iters, args.burnin, args.thin, args.seed)
    except ValueError as err:
        raise UsageError(str(err)) from None


def _hurdle_spec(args, counts):
    value = str(args.hurdle).strip().lower()
    if value == "auto":
        return detect_hurdle(counts, args.threshold)
    if value == "none":
        return HurdleSpec(NO_HURDLE, args.threshold)
    try:
        c = int(value)
    except ValueError:
        raise UsageError(f'--hurdle must be an integer, "auto" or "none", got {args.hurdle!r}') from None
    if c < 0:
        raise UsageError("--hurdle must be nonnegative")
    return HurdleSpec(c, args.threshold)


def _blocks(summary):
    return {name: s.as_dict() for name, s in summary.items()}


def _psrf_warnings(summary, limit):
    return [
        f"PSRF for {name} is {s.psrf:.4f}, above {limit:g}"
        for name, s in summary.items()
        if np.isfinite(s.psrf) and s.psrf > limit
    ]


def _tau_tag(tau):
    return f"{tau:.4f}"


def run_fit(args):
    """Fit every requested quantile and write summaries, draws and trajectories."""
    if not args.input or not args.count_col or not args.covariates:
        raise UsageError("--input, --count-col and --covariates are required")
    taus = parse_taus(args.tau)
    chain = chain_config_from(args)
    covariates = _split_names(args.covariates)
    z_covariates = _split_names(args.z_covariates)
    transforms = {c: "log" for c in _split_names(args.log) or []}
    ds = load_csv(args.input, args.count_col, covariates, transforms, z_covariates)
    spec = _hurdle_spec(args, ds.counts)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    jd = jitter_for_fit(ds, spec, chain.seed)
    write_rows(
        out / "jitter_audit.csv",
        ["row", "count", "u", "y_star"],
        ([i + 1, ds.counts[i], jd.u[i], jd.y_star[i]] for i in range(ds.n)),
    )

    run = {
        "input": str(args.input),
        "rows_in": ds.n + ds.rows_rejected,
        "rows_used": ds.n,
        "rows_rejected": ds.rows_rejected,
        "model": model_label(spec.c),
        "hurdle": spec.c if spec.is_hurdle else None,
        "hurdle_threshold": spec.threshold,
        "chain_config": {
            "chains": chain.chains,
            "iterations": chain.iterations,
            "burn_in": chain.burn_in,
            "thinning": chain.thinning,
            "seed": chain.seed,
        },
        "level": args.level,
        "taus": taus,
        "fitted": [],
        "errors": {},
    }
    if spec.frequencies is not None:
        run["mass_point_frequencies"] = {str(k): v for k, v in spec.frequencies.items() if v >= spec.threshold}

    if spec.is_hurdle:
        logit = fit_hurdle_part(ds, spec, chain)
        lsum = summarize(logit, args.level)
        write_json(
            out / "logistic.json",
            {
                "hurdle": spec.c,
                "n_observations": ds.n,
                "n_at_or_below_hurdle": int(np.sum(ds.counts <= spec.c)),
                "level": args.level,
                "parameters": _blocks(lsum),
                "odds_effect_percent": {name: odds_effect(s.mean) for name, s in lsum.items()},
                "acceptance": logit.extras["acceptance"],
                "warnings": _psrf_warnings(lsum, args.psrf_limit),
            },
        )
        write_draws(out / "draws_logistic.csv", logit)

    trajectory = []
    for tau in taus:
        try:
            fit = fit_two_part(ds, spec, tau, chain, include_logistic=False)
        except MODEL_ERRORS as err:
            logger.warning("tau=%g: %s", tau, err)
            run["errors"][_tau_tag(tau)] = str(err)
            continue
        qsum = summarize(fit.qr_draws, args.level)
        write_json(
            out / f"fit_tau_{_tau_tag(tau)}.json",
            {
                "model": model_label(spec.c),
                "hurdle": spec.c if spec.is_hurdle else None,
                "tau_requested": tau,
                "tau_effective": fit.tau_effective,
                "n_observations": ds.n,
                "n_quantile_part": int(fit.beyond.sum()),
                "level": args.level,
                "parameters": _blocks(qsum),
                "warnings": _psrf_warnings(qsum, args.psrf_limit),
            },
        )
        write_draws(out / f"draws_tau_{_tau_tag(tau)}.csv", fit.qr_draws)
        run["fitted"].append(tau)
        for name in fit.x_names:
            s = qsum[name]
            for stat in ("mean", "lower", "upper"):
                trajectory.append([tau, fit.tau_effective, name, stat, getattr(s, stat)])
        print(f"tau={tau:.4f} tau_effective={fit.tau_effective:.4f} " + " ".join(
            f"{n}={qsum[n].mean:.4g}" for n in fit.x_names
        ))

    write_rows(out / "trajectories.csv", ["tau", "tau_effective", "parameter", "statistic", "value"], trajectory)
    write_json(out / "run.json", run)
    if not run["fitted"]:
        raise HurdleRegionError("no quantile level could be fitted: " + "; ".join(run["errors"].values()))
    return EXIT_OK


def run_simulate(args):
    taus = parse_taus(args.tau)
    chain = chain_config_from(args)
    replications = 100 if args.full else args.replications
    try:
        config = SimConfig(
            n=args.n,
            replications=replications,
            quantiles=tuple(taus),
            hurdle_c=args.hurdle_c,
            seed=args.seed,
            chain_config=chain,
        )
    except ValueError as err:
        raise UsageError(str(err)) from None
    study = run_replication_study(config, n_jobs=max(1, args.jobs))
    study.write_csv(args.out)
    models = [model_label(c) for c in config.models()]
    header = f"{'tau':>6} {'model':>10} {'med|y-yhat|':>12} {'MSE':>10} {'CIw(x1)':>10} {'CIw(x2)':>10}"
    print(header)
    for tau in taus:
        for m in models:
            sel = study.select(m, tau)
            if not sel:
                continue
            print(
                f"{tau:6.3f} {m:>10} {np.median([r.median_abs_error for r in sel]):12.4f} "
                f"{np.median([r.mse for r in sel]):10.5f} {np.median([r.ci_width('x1') for r in sel]):10.5f} "
                f"{np.median([r.ci_width('x2') for r in sel]):10.5f}"
            )
    print(f"{len(study.results) // (len(models) * len(taus))} of {replications} replications succeeded; wrote {args.out}")
    if not study.results:
        return EXIT_MODEL
    return EXIT_OK


def run_diagnose(args):
    draws = read_draws(args.draws)
    report = {}
    for name, chains in draws.items():
        entry = {"chains": chains.shape[0], "draws_per_chain": chains.shape[1]}
        try:
            entry["psrf"] = psrf(chains) if chains.shape[0] > 1 else None
            entry["ess"] = float(sum(effective_sample_size(c) for c in chains))
            lag = min(args.max_lag, chains.shape[1] - 1)
            entry["autocorrelation"] = [autocorrelation(c, lag).tolist() for c in chains]
        except DegenerateChainError as err:
            entry["error"] = str(err)
        report[name] = entry
        psrf_txt = "n/a" if entry.get("psrf") is None else f"{entry['psrf']:.4f}"
        ess_txt = f"{entry['ess']:.1f}" if "ess" in entry else "n/a"
        print(f"{name:>20} psrf={psrf_txt} ess={ess_txt}")
    if args.out:
        write_json(args.out, report)
    return EXIT_OK


COMMANDS = {"fit": run_fit, "sweep": run_fit, "simulate": run_simulate, "diagnose": run_diagnose}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        resolve(args)
        return COMMANDS[args.command](args)
    except UsageError as err:
        parser.print_usage(sys.stderr)
        print(f"hurdle-qr: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except MODEL_ERRORS as err:
        print(f"hurdle-qr: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_MODEL
    except OSError as err:
        print(f"hurdle-qr: {err}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
