"""
Tests for the ewel CLI.
"""

import msgspec
import orjson
import pytest
from typer.testing import CliRunner

import ewel.coefficients
from ewel.cli.main import app
from ewel.coefficients import ValidationReport, Violation
from ewel.harness import write_csv
from ewel.weak_error import SWEEP_COLUMNS

runner = CliRunner()

SWEEP_TOML = """
name = "cli_sweep"
kind = "weak_error_sweep"
seed = 5
m_paths = 1000

[model]
name = "{model}"

[grid]
steps = [2, 4, 8]
refinement_factor = 8

[[test_functions]]
kind = "holder"
form = "cos"

[acceptance]
{acceptance}
"""


@pytest.fixture
def sweep_config(tmp_path):
    def write(model="constant", acceptance="max_abs_z = 3.0"):
        path = tmp_path / f"{model}.toml"
        path.write_text(SWEEP_TOML.format(model=model, acceptance=acceptance))
        return path

    return write


def sweep_rows(errors):
    return [
        {"model": "m", "h": h, "epsilon": None, "test_function": "cos", "error": e, "stderr": 0.001}
        for h, e in errors
    ]


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------


class TestRunCommand:
    def test_run_writes_artifacts(self, sweep_config, tmp_path):
        out = tmp_path / "out"
        result = runner.invoke(app, ["run", str(sweep_config()), "--out", str(out)])
        assert result.exit_code == 0, result.stdout
        assert "Run complete" in result.stdout
        assert "sweep.csv" in result.stdout
        assert (out / "manifest.json").exists()

    def test_unknown_config(self):
        result = runner.invoke(app, ["run", "no_such_experiment"])
        assert result.exit_code == 2
        assert "Config not found" in result.stdout
        assert "constant_sanity" in result.stdout

    def test_acceptance_miss_exits_one(self, sweep_config, tmp_path):
        path = sweep_config(model="tanh_drift", acceptance="min_slope = 5.0")
        result = runner.invoke(app, ["run", str(path), "--out", str(tmp_path / "miss")])
        assert result.exit_code == 1
        assert "min_slope" in result.stdout

    def test_invalid_config_exits_two(self, tmp_path):
        path = tmp_path / "broken.toml"
        path.write_text('name = "broken"\nkind = "weak_error_sweep"\n')
        result = runner.invoke(app, ["run", str(path)])
        assert result.exit_code == 2
        assert "ConfigurationError" in result.stdout

    def test_seed_override(self, sweep_config, tmp_path, monkeypatch):
        monkeypatch.setenv("EWEL_SEED", "12")
        out = tmp_path / "seeded"
        result = runner.invoke(app, ["run", str(sweep_config()), "--out", str(out)])
        assert result.exit_code == 0
        jobs = orjson.loads((out / "manifest.json").read_bytes())["jobs"]
        assert {j["seed"] for j in jobs} == {12}

    def test_verbose_logs_job_arguments(self, sweep_config, tmp_path, monkeypatch):
        import ewel.harness

        seen = {}
        real = ewel.harness.run_experiment

        def spy(config, out_dir=None, jobs=1, job_logger=None):
            seen["job_logger"] = job_logger
            return real(config, out_dir=out_dir, jobs=jobs, job_logger=job_logger)

        monkeypatch.setattr(ewel.harness, "run_experiment", spy)
        result = runner.invoke(app, ["run", str(sweep_config()), "--out", str(tmp_path / "v"), "--verbose"])
        assert result.exit_code == 0, result.stdout
        assert seen["job_logger"].include_kwargs
        assert seen["job_logger"].redact_kwargs == {"config"}

    def test_quiet_run_omits_job_arguments(self, sweep_config, tmp_path, monkeypatch):
        import ewel.harness

        seen = {}
        real = ewel.harness.run_experiment

        def spy(config, out_dir=None, jobs=1, job_logger=None):
            seen["job_logger"] = job_logger
            return real(config, out_dir=out_dir, jobs=jobs, job_logger=job_logger)

        monkeypatch.setattr(ewel.harness, "run_experiment", spy)
        result = runner.invoke(app, ["run", str(sweep_config()), "--out", str(tmp_path / "q")])
        assert result.exit_code == 0, result.stdout
        assert not seen["job_logger"].include_kwargs


# ---------------------------------------------------------------------------
# list-models
# ---------------------------------------------------------------------------


class TestListModelsCommand:
    def test_lists_every_model(self):
        result = runner.invoke(app, ["list-models"])
        assert result.exit_code == 0
        assert "Built-in models:" in result.stdout
        for name in ("constant", "ou", "weierstrass_sigma", "sign_drift", "sphere_drift"):
            assert name in result.stdout
        assert f"{len(ewel.coefficients.list_models())} model(s) total" in result.stdout


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------


class TestValidateCommand:
    def test_bundled_config(self):
        result = runner.invoke(app, ["validate", "constant_sanity"])
        assert result.exit_code == 0, result.stdout
        assert "Assumptions hold" in result.stdout
        assert "K1 declared" in result.stdout

    def test_violation_exits_one(self, monkeypatch):
        real = ewel.coefficients.validate_assumptions

        def understated(field, grid):
            report = real(field, grid)
            violation = Violation(kind="drift_bound", t=0.0, x=[0.0], value=2.0, bound=1.0)
            return msgspec.structs.replace(report, passed=False, violations=[violation])

        monkeypatch.setattr(ewel.coefficients, "validate_assumptions", understated)
        result = runner.invoke(app, ["validate", "constant_sanity"])
        assert result.exit_code == 1
        assert "drift_bound" in result.stdout

    def test_bad_config_exits_two(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text('name = "bad"\nkind = "weak_error_sweep"\nseed = 1\n[model]\nname = "nonexistent"\n')
        result = runner.invoke(app, ["validate", str(path)])
        assert result.exit_code == 2
        assert "unknown model" in result.stdout

    def test_report_type_is_exported(self):
        assert "violations" in ValidationReport.__struct_fields__


# ---------------------------------------------------------------------------
# plot
# ---------------------------------------------------------------------------


class TestPlotCommand:
    def test_plot_one_series(self, tmp_path):
        csv_path = write_csv(
            tmp_path / "sweep.csv", sweep_rows([(0.5, 0.2), (0.25, 0.1), (0.125, 0.05)]), SWEEP_COLUMNS
        )
        target = tmp_path / "cos.svg"
        result = runner.invoke(app, ["plot", str(csv_path), "--out", str(target), "--gamma", "0.5"])
        assert result.exit_code == 0, result.stdout
        assert target.exists()
        assert "slope 1.000" in result.stdout

    def test_unknown_series(self, tmp_path):
        csv_path = write_csv(tmp_path / "sweep.csv", sweep_rows([(0.5, 0.2), (0.25, 0.1)]), SWEEP_COLUMNS)
        result = runner.invoke(app, ["plot", str(csv_path), "--series", "sin"])
        assert result.exit_code == 2
        assert "m:cos" in result.stdout

    def test_no_finite_errors(self, tmp_path):
        csv_path = write_csv(
            tmp_path / "sweep.csv", sweep_rows([(0.5, float("nan")), (0.25, float("nan"))]), SWEEP_COLUMNS
        )
        result = runner.invoke(app, ["plot", str(csv_path)])
        assert result.exit_code == 3

    def test_not_a_sweep_table(self, tmp_path):
        csv_path = write_csv(tmp_path / "other.csv", [{"a": 1.0}], ["a"])
        result = runner.invoke(app, ["plot", str(csv_path)])
        assert result.exit_code == 2
        assert "not a sweep table" in result.stdout


# ---------------------------------------------------------------------------
# version
# ---------------------------------------------------------------------------


class TestVersionCommand:
    def test_version(self):
        result = runner.invoke(app, ["version"])
        assert result.exit_code == 0
        assert "ewel v" in result.stdout
