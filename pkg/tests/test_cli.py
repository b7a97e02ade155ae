import csv
import json
import time

import numpy as np
import pytest

from hurdle_qr.cli import EXIT_MODEL, EXIT_OK, EXIT_USAGE, main, parse_taus, UsageError
from hurdle_qr.simulation import SimConfig, generate_dataset

CHAIN = ["--chains", "2", "--iters", "600", "--burnin", "100", "--thin", "10"]
BLOCK_KEYS = {"mean", "sd", "lower", "upper", "psrf", "ess"}


def write_sim_csv(path, n=400, seed=3, extra_rows=()):
    """Simulated counts rounded to integers, in a citation-style layout."""
    s = generate_dataset(SimConfig(n=n), np.random.default_rng(seed))
    ds = s.dataset
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["citations", "collab", "intl"])
        for y, (a, b) in zip(np.floor(ds.counts).astype(int), ds.x):
            w.writerow([y, repr(float(a)), repr(float(b))])
        for row in extra_rows:
            w.writerow(row)
    return path


@pytest.fixture
def data_csv(tmp_path):
    return write_sim_csv(tmp_path / "cites.csv")


def fit_args(data, out, *extra):
    return ["fit", "--input", str(data), "--count-col", "citations", "--covariates", "collab,intl",
            "--out-dir", str(out), *CHAIN, *extra]


def load(path):
    return json.loads(path.read_text())


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestParseTaus:
    def test_range(self):
        taus = parse_taus(["range:0.05:0.95:0.05"])
        assert len(taus) == 19
        assert taus[0] == 0.05 and taus[-1] == 0.95

    def test_lists_sorted_unique(self):
        assert parse_taus(["0.9,0.5", "0.5"]) == [0.5, 0.9]

    @pytest.mark.parametrize("bad", [["1.2"], ["abc"], ["range:0.1:0.5"], ["range:0.5:0.1:0.1"]])
    def test_invalid(self, bad):
        with pytest.raises(UsageError):
            parse_taus(bad)


class TestFit:
    def test_hurdle_zero_outputs(self, data_csv, tmp_path):
        out = tmp_path / "out"
        assert main(fit_args(data_csv, out, "--hurdle", "0", "--tau", "0.85")) == EXIT_OK
        fit = load(out / "fit_tau_0.8500.json")
        assert fit["tau_requested"] == 0.85
        assert 0.6 < fit["tau_effective"] < 0.8
        assert list(fit["parameters"]) == ["(Intercept)", "collab", "intl", "sigma"]
        for block in fit["parameters"].values():
            assert set(block) == BLOCK_KEYS
        logit = load(out / "logistic.json")
        for block in logit["parameters"].values():
            assert set(block) == BLOCK_KEYS
        assert set(logit["odds_effect_percent"]) == set(logit["parameters"])
        audit = read_rows(out / "jitter_audit.csv")
        assert len(audit) == 400
        assert all(r["u"] == "nan" for r in audit if r["count"] == "0")

    def test_no_hurdle(self, data_csv, tmp_path):
        out = tmp_path / "out"
        assert main(fit_args(data_csv, out, "--hurdle", "none", "--tau", "0.5")) == EXIT_OK
        assert not (out / "logistic.json").exists()
        fit = load(out / "fit_tau_0.5000.json")
        assert fit["tau_effective"] == fit["tau_requested"] == 0.5
        assert fit["hurdle"] is None

    def test_sweep_trajectory_rows(self, data_csv, tmp_path):
        out = tmp_path / "out"
        args = fit_args(data_csv, out, "--hurdle", "none", "--tau", "range:0.05:0.95:0.05")
        args[0] = "sweep"
        assert main(args) == EXIT_OK
        rows = read_rows(out / "trajectories.csv")
        for param in ("(Intercept)", "collab", "intl"):
            for stat in ("mean", "lower", "upper"):
                sel = [r for r in rows if r["parameter"] == param and r["statistic"] == stat]
                assert len(sel) == 19
        taus = [float(r["tau"]) for r in rows]
        assert taus == sorted(taus)

    def test_hurdle_region_recorded_and_run_continues(self, data_csv, tmp_path):
        out = tmp_path / "out"
        assert main(fit_args(data_csv, out, "--hurdle", "3", "--tau", "0.3,0.9")) == EXIT_OK
        run = load(out / "run.json")
        assert run["fitted"] == [0.9]
        assert "hurdle region" in run["errors"]["0.3000"]

    def test_all_taus_in_hurdle_region_is_model_error(self, data_csv, tmp_path):
        assert main(fit_args(data_csv, tmp_path / "o", "--hurdle", "3", "--tau", "0.2")) == EXIT_MODEL

    def test_rejected_rows(self, tmp_path):
        data = write_sim_csv(tmp_path / "c.csv", extra_rows=[[5, "", "0.1"], [7, "1.0", "x"]])
        out = tmp_path / "out"
        assert main(fit_args(data, out, "--hurdle", "none")) == EXIT_OK
        run = load(out / "run.json")
        assert run["rows_rejected"] == 2
        assert run["rows_in"] == run["rows_used"] + run["rows_rejected"] == 402

    def test_auto_hurdle(self, data_csv, tmp_path):
        out = tmp_path / "out"
        assert main(fit_args(data_csv, out, "--hurdle", "auto", "--tau", "0.9")) == EXIT_OK
        run = load(out / "run.json")
        assert run["hurdle"] >= 0
        assert all(v >= 0.06 for v in run["mass_point_frequencies"].values())

    def test_negative_count_is_data_error(self, tmp_path, capsys):
        data = write_sim_csv(tmp_path / "c.csv", n=20, extra_rows=[[-1, "1", "1"]])
        assert main(fit_args(data, tmp_path / "o")) == EXIT_MODEL
        assert "row 21" in capsys.readouterr().err

    def test_usage_errors(self, data_csv, tmp_path):
        assert main(fit_args(data_csv, tmp_path / "o", "--tau", "1.5")) == EXIT_USAGE
        assert main(fit_args(data_csv, tmp_path / "o", "--hurdle", "sometimes")) == EXIT_USAGE
        assert main(["fit", "--input", str(data_csv)]) == EXIT_USAGE
        assert main(fit_args(data_csv, tmp_path / "o", "--burnin", "700")) == EXIT_USAGE
        with pytest.raises(SystemExit) as exc:
            main(["fit", "--chains", "many"])
        assert exc.value.code == EXIT_USAGE

    def test_config_precedence(self, data_csv, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(f"seed = 7\nhurdle = none\ntau = 0.4\nthin = 25\ninput = {data_csv}\n")
        out = tmp_path / "out"
        args = ["fit", "--config", str(cfg), "--count-col", "citations", "--covariates", "collab,intl",
                "--out-dir", str(out), "--chains", "2", "--iters", "600", "--burnin", "100", "--seed", "9"]
        assert main(args) == EXIT_OK
        run = load(out / "run.json")
        assert run["chain_config"]["seed"] == 9  # flag beats file
        assert run["chain_config"]["thinning"] == 25  # file beats default
        assert run["hurdle"] is None and run["taus"] == [0.4]

    def test_byte_identical_reruns(self, data_csv, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert main(fit_args(data_csv, out, "--hurdle", "0", "--tau", "0.7,0.9", "--seed", "5")) == EXIT_OK
        names = sorted(p.name for p in a.iterdir())
        assert names == sorted(p.name for p in b.iterdir())
        for name in names:
            assert (a / name).read_bytes() == (b / name).read_bytes(), name


class TestSimulate:
    def test_models_and_determinism(self, tmp_path, capsys):
        paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for p in paths:
            code = main(["simulate", "--n", "200", "--replications", "1", "--seed", "4", "--out", str(p), *CHAIN])
            assert code == EXIT_OK
        assert paths[0].read_bytes() == paths[1].read_bytes()
        assert {r["model"] for r in read_rows(paths[0])} == {"no_hurdle", "hurdle0", "hurdle3"}
        assert "hurdle3" in capsys.readouterr().out

    def test_invalid_config(self, tmp_path):
        assert main(["simulate", "--n", "0", "--out", str(tmp_path / "x.csv"), *CHAIN]) == EXIT_USAGE
        assert main(["simulate", "--hurdle-c", "0", "--out", str(tmp_path / "x.csv"), *CHAIN]) == EXIT_USAGE


class TestDiagnose:
    def test_report(self, data_csv, tmp_path):
        out = tmp_path / "out"
        assert main(fit_args(data_csv, out, "--hurdle", "none", "--tau", "0.5")) == EXIT_OK
        report_path = tmp_path / "diag.json"
        assert main(["diagnose", "--draws", str(out / "draws_tau_0.5000.csv"), "--max-lag", "5",
                     "--out", str(report_path)]) == EXIT_OK
        report = load(report_path)
        assert set(report) == {"(Intercept)", "collab", "intl", "sigma"}
        entry = report["collab"]
        assert entry["chains"] == 2 and entry["draws_per_chain"] == 50
        assert len(entry["autocorrelation"][0]) == 6
        assert entry["autocorrelation"][0][0] == 1.0

    def test_missing_file(self, tmp_path):
        assert main(["diagnose", "--draws", str(tmp_path / "nope.csv")]) == EXIT_MODEL


@pytest.mark.slow
def test_small_simulation_runtime_budget(tmp_path):
    start = time.perf_counter()
    assert main(["simulate", "--replications", "1", "--n", "200", "--out", str(tmp_path / "s.csv")]) == EXIT_OK
    assert time.perf_counter() - start < 300
