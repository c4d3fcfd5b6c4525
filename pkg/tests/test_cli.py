import csv
import json
import subprocess
import sys

import pytest

from carxefe import cli
from carxefe.experiment import ExperimentConfig, run_trial


@pytest.fixture
def out(tmp_path):
    return tmp_path / "out"


class TestParseArgs:
    def test_run_coupled_seed(self):
        inv = cli.parse_args(["run", "--coupled", "--seed", "7"])
        assert inv.command == "run"
        assert inv.config == ExperimentConfig(coupled=True, seed=7)

    def test_mc_invocation(self):
        inv = cli.parse_args(["mc", "--seeds", "20", "--horizon", "100", "--out", "results/"])
        assert (inv.command, inv.seeds, inv.config.horizon, str(inv.out_dir)) == ("mc", 20, 100, "results")

    def test_negative_eta(self):
        with pytest.raises(cli.CliError) as info:
            cli.parse_args(["run", "--eta", "-1"])
        assert info.value.code == cli.EXIT_BAD_VALUE
        assert "eta must be positive" in str(info.value)

    def test_distinct_exit_codes(self, tmp_path):
        codes = {}
        for key, argv in {
            "unknown": ["run", "--bogus"],
            "unparsable": ["run", "--eta", "abc"],
            "missing": ["run", "--config", str(tmp_path / "nope.ini")],
        }.items():
            with pytest.raises(cli.CliError) as info:
                cli.parse_args(argv)
            codes[key] = info.value.code
        assert codes == {"unknown": cli.EXIT_USAGE, "unparsable": cli.EXIT_BAD_VALUE, "missing": cli.EXIT_MISSING_FILE}

    def test_messages_name_offending_token(self, tmp_path):
        for argv, token in [(["run", "--bogus"], "--bogus"), (["run", "--eta", "abc"], "abc")]:
            with pytest.raises(cli.CliError, match=token):
                cli.parse_args(argv)

    def test_tuple_and_mode_flags(self):
        inv = cli.parse_args(["compare", "--uncoupled", "--goal-means", "0.5,1.5", "--initial-state", "0.1,0,0,0"])
        assert inv.config.coupled is False
        assert inv.config.goal_means == (0.5, 1.5)
        assert inv.config.initial_state == (0.1, 0.0, 0.0, 0.0)

    def test_negative_scientific_values(self):
        inv = cli.parse_args(["run", "--u-min", "-1e-1", "--goal-means", "-2e0,1", "--mu0=-0.5"])
        assert inv.config.u_min == -0.1
        assert inv.config.goal_means == (-2.0, 1.0)
        assert inv.config.mu0 == -0.5

    def test_precedence(self, tmp_path, monkeypatch):
        ini = tmp_path / "c.ini"
        ini.write_text("[agent]\neta = 0.5\nbeta0 = 4.0\n\n[experiment]\nhorizon = 12\ncoupled = false\n")
        inv = cli.parse_args(["run", "--config", str(ini), "--eta", "0.25"])
        assert inv.config.eta == 0.25
        assert inv.config.beta0 == 4.0
        assert inv.config.horizon == 12
        assert inv.config.coupled is False
        assert inv.config.alpha0 == 2.0

    def test_config_file_errors(self, tmp_path):
        bad = tmp_path / "bad.ini"
        bad.write_text("[agent]\nwhat = 1\n")
        with pytest.raises(cli.CliError) as info:
            cli.parse_args(["run", "--config", str(bad)])
        assert info.value.code == cli.EXIT_USAGE and "what" in str(info.value)
        bad.write_text("[plant]\neta = 1\n")
        with pytest.raises(cli.CliError, match=r"\[agent\]"):
            cli.parse_args(["run", "--config", str(bad)])
        bad.write_text("[plant]\ndt = fast\n")
        with pytest.raises(cli.CliError) as info:
            cli.parse_args(["run", "--config", str(bad)])
        assert info.value.code == cli.EXIT_BAD_VALUE

    def test_out_dir_env(self, monkeypatch, tmp_path):
        monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "env"))
        assert cli.parse_args(["run"]).out_dir == tmp_path / "env"
        assert cli.parse_args(["run", "--out", "x"]).out_dir.name == "x"

    def test_help_lists_every_field_with_default(self, capsys):
        with pytest.raises(SystemExit) as info:
            cli.build_parser().parse_args(["run", "--help"])
        assert info.value.code == 0
        text = " ".join(capsys.readouterr().out.split())
        for name in ("--m1", "--c2", "--dt", "--n-iter", "--noise-var", "--initial-state", "--mu0", "--lambda0",
                     "--alpha0", "--beta0", "--eta", "--output-memory", "--input-memory", "--u-min", "--u-max",
                     "--n-grid", "--goal-means", "--goal-vars", "--coupled", "--horizon", "--seed"):
            assert name in text
        for default in ("(default: 0.001)", "(default: 999)", "(default: 1e-05)", "(default: 1.0,2.0)",
                        "(default: 120)", "(default: 3.0)"):
            assert default in text


class TestOutputs:
    def test_one_step_run(self, out):
        assert cli.main(["run", "--horizon", "1", "--out", str(out)]) == 0
        rows = list(csv.reader(open(out / "steps.csv")))
        assert rows[0] == list(cli.STEP_COLUMNS)
        assert len(rows) == 3
        summary = json.load(open(out / "summary.json"))
        assert summary["config"]["horizon"] == 1
        assert len(summary["cum_surprise"]) == 2

    def test_csv_round_trip(self, out):
        cli.main(["run", "--horizon", "15", "--seed", "2", "--out", str(out)])
        log = run_trial(ExperimentConfig(horizon=15, seed=2))
        rows = cli.read_steps_csv(out / "steps.csv")
        for row in rows:
            r = log.records[row["step"]]
            i = row["agent"] - 1
            assert row["control"] == r.controls[i]
            assert row["observation"] == r.observations[i]
            assert row["pred_mean"] == r.pred_means[i]
            assert row["pred_std"] == r.pred_stds[i]
            assert row["surprise"] == r.surprises[i]
            assert row["goal_alignment"] == r.goal_alignments[i]

    def test_format_selection(self, out):
        cli.main(["run", "--horizon", "2", "--out", str(out), "--format", "json"])
        assert (out / "summary.json").exists() and not (out / "steps.csv").exists()

    def test_compare_schema(self, out):
        assert cli.main(["compare", "--horizon", "10", "--out", str(out)]) == 0
        s = json.load(open(out / "summary.json"))
        assert {"coupled_dominates", "delta_surprise", "delta_goal_alignment"} <= set(s["comparison"])
        assert len(s["comparison"]["delta_surprise"]) == 2
        assert (out / "coupled" / "steps.csv").exists() and (out / "uncoupled" / "steps.csv").exists()
        assert s["coupled"]["config"]["coupled"] is True and s["uncoupled"]["config"]["coupled"] is False

    def test_mc_schema(self, out):
        assert cli.main(["mc", "--seeds", "3", "--horizon", "8", "--out", str(out)]) == 0
        s = json.load(open(out / "summary.json"))
        assert len(s["coupled"]["trials"]) == 3 and s["coupled"]["n_failed"] == 0
        assert "coupled_dominates" in s["comparison"]
        seeds = list(csv.DictReader(open(out / "seeds.csv")))
        assert len(seeds) == 2 * 3 * 2

    def test_unwritable_output(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        assert cli.main(["run", "--horizon", "1", "--out", str(blocker / "sub")]) == cli.EXIT_IO

    def test_failed_trial_exit_code(self, out, capsys):
        argv = ["run", "--u-min", "-1e300", "--u-max", "1e300", "--n-grid", "3", "--eta", "1e-300",
                "--mu0", "1", "--horizon", "20", "--out", str(out)]
        assert cli.main(argv) == cli.EXIT_TRIAL_FAILED
        assert "step" in capsys.readouterr().err

    def test_bad_value_exit_code(self, capsys):
        assert cli.main(["run", "--eta", "-1"]) == cli.EXIT_BAD_VALUE
        assert "eta" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    res = subprocess.run(
        [sys.executable, "-m", "carxefe", "run", "--horizon", "3", "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert res.returncode == 0, res.stderr
    assert (tmp_path / "steps.csv").exists()
