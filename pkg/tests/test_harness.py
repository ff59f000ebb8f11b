"""
Tests for experiment configs, the job pool, artifacts and end-to-end experiment runs.
"""

import logging
from importlib import resources

import msgspec
import orjson
import pytest

from ewel.exceptions import ConfigurationError, NumericalFault
from ewel.harness import (
    EXIT_ACCEPTANCE,
    EXIT_FAULT,
    EXIT_OK,
    AcceptanceConfig,
    ExperimentConfig,
    GridConfig,
    Job,
    JobLogger,
    JobPool,
    ModelConfig,
    ParametrixConfig,
    RunManifest,
    TestFunctionConfig,
    check_config,
    config_hash,
    decode_config,
    emit_plot,
    load_config,
    ordered,
    read_sweep_csv,
    run_experiment,
    write_csv,
)
from ewel.harness import _runner
from ewel.weak_error import SWEEP_COLUMNS, RatePoint

MINIMAL = """
name = "mini"
kind = "weak_error_sweep"
seed = 11
m_paths = 2000

[model]
name = "constant"
params = { drift = 0.3, sigma = 1.0 }

[grid]
steps = [2, 4, 8, 16]
refinement_factor = 16

[[test_functions]]
kind = "holder"
form = "cos"

[acceptance]
max_abs_z = 3.0
"""


def weak_config(**overrides) -> ExperimentConfig:
    return msgspec.structs.replace(decode_config(MINIMAL), **overrides)


def square(x):
    return x * x


def square_with_config(config, x):
    return x * x


def fragile(x):
    if x < 0:
        raise NumericalFault("negative input", context={"x": x})
    return x


def broken(x):
    raise RuntimeError("bug")


# ---------------------------------------------------------------------------
# Configs
# ---------------------------------------------------------------------------


class TestConfig:
    def test_minimal_config_decodes(self):
        config = decode_config(MINIMAL)
        assert config.grid.h_list == [0.5, 0.25, 0.125, 0.0625]
        assert config.x0 == [0.0]
        assert config.test_functions[0].form == "cos"

    def test_missing_seed_names_the_field(self):
        with pytest.raises(ConfigurationError, match="seed"):
            decode_config(MINIMAL.replace("seed = 11\n", ""))

    def test_unknown_field_is_rejected(self):
        with pytest.raises(ConfigurationError, match="unknown field"):
            decode_config(MINIMAL + '\nflavour = "vanilla"\n')

    def test_malformed_toml(self):
        with pytest.raises(ConfigurationError, match="malformed TOML"):
            decode_config("name = ")

    def test_seed_override_from_environment(self, tmp_path):
        path = tmp_path / "mini.toml"
        path.write_text(MINIMAL)
        assert load_config(path, env={}).seed == 11
        assert load_config(path, env={"EWEL_SEED": "99"}).seed == 99
        with pytest.raises(ConfigurationError, match="not an integer"):
            load_config(path, env={"EWEL_SEED": "abc"})

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError, match="cannot read config"):
            load_config(tmp_path / "absent.toml")

    def test_config_hash(self):
        a = decode_config(MINIMAL)
        assert config_hash(a) == config_hash(decode_config(MINIMAL))
        assert config_hash(a) != config_hash(msgspec.structs.replace(a, seed=12))
        assert len(config_hash(a)) == 64

    def test_x0_must_match_dimension(self):
        with pytest.raises(ConfigurationError, match="x0"):
            check_config(weak_config(x0=[0.0, 0.0]))

    def test_weak_error_sweep_needs_test_functions(self):
        with pytest.raises(ConfigurationError, match="test function"):
            check_config(weak_config(test_functions=[]))

    def test_declared_regime_must_match(self):
        with pytest.raises(ConfigurationError, match="config declares"):
            check_config(weak_config(model=ModelConfig(name="constant", regime="piecewise_smooth")))

    def test_unknown_test_function_form(self):
        with pytest.raises(ConfigurationError, match="Hölder form"):
            check_config(weak_config(test_functions=[TestFunctionConfig(kind="holder", form="sine")]))

    def test_decomposition_needs_a_radius(self):
        text = """
name = "d"
kind = "density_sweep"
seed = 1
[model]
name = "tanh_drift"
[grid]
steps = [4]
[density]
mode = "decomposition"
y_points = [[0.5]]
[mollifier]
quadrature_nodes = 24
"""
        with pytest.raises(ConfigurationError, match="mollifier.epsilon"):
            check_config(decode_config(text))

    def test_lq_exponent_must_exceed_dimension(self):
        text = """
name = "s"
kind = "mollifier_scan"
seed = 1
[model]
name = "sign_drift"
[mollifier]
epsilons = [0.1]
q = 1.0
"""
        with pytest.raises(ConfigurationError, match="mollifier.q"):
            check_config(decode_config(text))

    def test_euler_leg_only_for_discrete_gap(self):
        config = ExperimentConfig(
            name="p",
            kind="parametrix_check",
            seed=1,
            model=ModelConfig(name="tanh_drift"),
            parametrix=ParametrixConfig(y_points=[[0.5]], steps=[4], euler_leg=True),
        )
        with pytest.raises(ConfigurationError, match="euler_leg"):
            check_config(config)

    def test_grid_modes_need_steps(self):
        config = ExperimentConfig(
            name="p",
            kind="parametrix_check",
            seed=1,
            model=ModelConfig(name="tanh_drift"),
            parametrix=ParametrixConfig(y_points=[[0.5]], mode="euler"),
        )
        with pytest.raises(ConfigurationError, match="parametrix.steps"):
            check_config(config)

    def test_every_bundled_config_is_valid(self):
        root = resources.files("ewel") / "configs"
        names = sorted(p.name for p in root.iterdir() if p.name.endswith(".toml"))
        assert len(names) >= 8
        for name in names:
            config = load_config(str(root / name), env={})
            check_config(config)
            assert config.name == name[: -len(".toml")]


# ---------------------------------------------------------------------------
# Job pool
# ---------------------------------------------------------------------------


class TestJobPool:
    def test_inline_and_parallel_agree(self):
        jobs = [Job("square", (i,), square, {"x": i}) for i in range(6)]
        inline = JobPool(1).run(jobs)
        pooled = JobPool(2).run(jobs)
        assert [r.value for r in ordered(inline)] == [0, 1, 4, 9, 16, 25]
        assert [r.value for r in ordered(pooled)] == [r.value for r in ordered(inline)]

    def test_numerical_fault_fails_only_its_job(self):
        results = JobPool(1).run([Job("f", (x,), fragile, {"x": x}) for x in (-1, 2)])
        assert results[(-1,)].status == "failed"
        assert results[(-1,)].error["error"] == "NumericalFault"
        assert results[(-1,)].error["context"] == {"x": -1}
        assert results[(2,)].ok and results[(2,)].value == 2

    def test_other_errors_propagate(self):
        with pytest.raises(RuntimeError):
            JobPool(1).run([Job("b", (0,), broken, {"x": 0})])

    def test_job_logger(self, caplog):
        job_logger = JobLogger(include_kwargs=True, redact_kwargs=["config"])
        with caplog.at_level(logging.INFO, logger="ewel.jobs"):
            JobPool(1, job_logger).run([Job("square", (0.5,), square_with_config, {"config": object(), "x": 0.5})])
        text = caplog.text
        assert "--> square 0.5" in text
        assert "'config': '<redacted>'" in text
        assert "'x': 0.5" in text
        assert "<-- square 0.5 ok" in text


# ---------------------------------------------------------------------------
# Artifacts
# ---------------------------------------------------------------------------


class TestArtifacts:
    def test_csv_floats_round_trip(self, tmp_path):
        path = write_csv(tmp_path / "t.csv", [{"a": 0.1, "b": None}, {"a": 1e-20, "b": "x"}], ["a", "b"])
        assert path.read_text() == "a,b\n0.1,\n1e-20,x\n"

    def test_read_sweep_csv(self, tmp_path):
        rows = [
            {"model": "m", "h": 0.5, "epsilon": None, "test_function": "cos", "error": -0.02, "stderr": 0.001},
            {"model": "m", "h": 0.25, "epsilon": None, "test_function": "cos", "error": 0.01, "stderr": 0.001},
            {"model": "m", "h": 0.25, "epsilon": None, "test_function": "x", "error": float("nan"), "stderr": 0.0},
        ]
        path = write_csv(tmp_path / "sweep.csv", rows, SWEEP_COLUMNS)
        table = read_sweep_csv(path)
        assert list(table) == ["m:cos"]
        assert table["m:cos"][0] == RatePoint(h=0.5, error=0.02, stderr=0.001)

    def test_read_sweep_csv_needs_columns(self, tmp_path):
        path = write_csv(tmp_path / "other.csv", [{"a": 1}], ["a"])
        with pytest.raises(ConfigurationError, match="not a sweep table"):
            read_sweep_csv(path)

    def test_plot_is_byte_stable(self, tmp_path):
        points = [(0.5, 0.2, 0.01), (0.25, 0.1, 0.01), (0.125, 0.05, 0.01)]
        a = emit_plot(points, tmp_path / "a.svg", gamma=0.5, title="t")
        b = emit_plot(points, tmp_path / "b.svg", gamma=0.5, title="t")
        assert a.read_bytes() == b.read_bytes()
        assert a.read_bytes().lstrip().startswith(b"<?xml")

    def test_plot_faults(self, tmp_path):
        with pytest.raises(NumericalFault, match="degenerate"):
            emit_plot([(0.5, 0.2), (0.5, 0.1)], tmp_path / "p.svg")
        with pytest.raises(NumericalFault, match="at least two"):
            emit_plot([(0.5, 0.2), (0.25, 0.0)], tmp_path / "p.svg")

    def test_manifest_records_outputs_once(self, tmp_path):
        manifest = RunManifest(name="n", kind="k", config_hash="c", tool_version="v", started="s")
        manifest.record_output(tmp_path / "b.csv", tmp_path)
        manifest.record_output(tmp_path / "a.csv", tmp_path)
        manifest.record_output(tmp_path / "b.csv", tmp_path)
        manifest.write(tmp_path)
        saved = orjson.loads((tmp_path / "manifest.json").read_bytes())
        assert saved["outputs"] == ["a.csv", "b.csv", "manifest.json"]


# ---------------------------------------------------------------------------
# Experiment runs
# ---------------------------------------------------------------------------


class TestRunExperiment:
    def test_constant_sweep_passes(self, tmp_path):
        result = run_experiment(weak_config(), tmp_path / "run")
        assert result.exit_code == EXIT_OK
        out = result.out_dir
        for name in ("sweep.csv", "acceptance.json", "manifest.json"):
            assert (out / name).exists()
        manifest = orjson.loads((out / "manifest.json").read_bytes())
        assert manifest["exit_code"] == 0
        assert manifest["config_hash"] == config_hash(weak_config())
        assert [j["key"] for j in manifest["jobs"]] == [[0.0625], [0.125], [0.25], [0.5]]
        assert all(j["seed"] == 11 and j["status"] == "ok" for j in manifest["jobs"])
        assert set(manifest["outputs"]) >= {"sweep.csv", "acceptance.json", "manifest.json"}
        assert [c.name for c in result.checks] == ["max_abs_z"]

    def test_outputs_are_byte_identical_across_reruns_and_workers(self, tmp_path):
        config = weak_config(model=ModelConfig(name="tanh_drift"))
        first = run_experiment(config, tmp_path / "a", jobs=1)
        again = run_experiment(config, tmp_path / "b", jobs=1)
        pooled = run_experiment(config, tmp_path / "c", jobs=2)
        sweep = (first.out_dir / "sweep.csv").read_bytes()
        assert (again.out_dir / "sweep.csv").read_bytes() == sweep
        assert (pooled.out_dir / "sweep.csv").read_bytes() == sweep

    def test_acceptance_miss(self, tmp_path):
        config = weak_config(
            model=ModelConfig(name="tanh_drift"),
            m_paths=500,
            acceptance=AcceptanceConfig(min_slope=5.0),
        )
        result = run_experiment(config, tmp_path / "miss")
        assert result.exit_code == EXIT_ACCEPTANCE
        verdict = orjson.loads((result.out_dir / "acceptance.json").read_bytes())
        assert verdict["passed"] is False

    def test_numerical_fault_in_a_job(self, tmp_path, monkeypatch):
        def exploding(config, h):
            raise NumericalFault("non-finite state", context={"h": h})

        monkeypatch.setattr(_runner, "_weak_error_job", exploding)
        result = run_experiment(weak_config(), tmp_path / "fault")
        assert result.exit_code == EXIT_FAULT
        assert all(j.status == "failed" for j in result.manifest.jobs)

    def test_invalid_config_writes_nothing(self, tmp_path):
        with pytest.raises(ConfigurationError):
            run_experiment(weak_config(x0=[0.0, 1.0]), tmp_path / "never")
        assert not (tmp_path / "never").exists()

    def test_lq_deviation_scan(self, tmp_path):
        path = resources.files("ewel") / "configs" / "lq_deviation.toml"
        result = run_experiment(str(path), tmp_path / "lq")
        assert result.exit_code == EXIT_OK, result.checks
        header = (result.out_dir / "scan.csv").read_text().splitlines()[0]
        assert header == "epsilon,quantity,value"

    def test_gaussian_parametrix_check(self, tmp_path):
        config = ExperimentConfig(
            name="brownian_series",
            kind="parametrix_check",
            seed=1,
            model=ModelConfig(name="constant", params={"drift": 0.0, "sigma": 1.0}),
            parametrix=ParametrixConfig(t=0.5, x=[0.0], y_points=[[-1.0], [0.0], [0.5]], r_max=1, oracle="gaussian"),
            acceptance=AcceptanceConfig(rel_tol=1e-10, max_higher_term=1e-12),
        )
        result = run_experiment(config, tmp_path / "series")
        assert result.exit_code == EXIT_OK, result.checks
        summary = orjson.loads((result.out_dir / "parametrix_summary.json").read_bytes())
        assert summary["max_rel_error"] <= 1e-10
        assert summary["aronson"]["C"] == pytest.approx(1.0, rel=1e-6)
        for name in ("density.csv", "terms.csv"):
            assert (result.out_dir / name).exists()

    def test_parametrix_reference_points_become_notes(self, tmp_path):
        config = ExperimentConfig(
            name="brownian_reference",
            kind="parametrix_check",
            seed=1,
            model=ModelConfig(name="constant", params={"drift": 0.0, "sigma": 1.0}),
            parametrix=ParametrixConfig(
                t=0.5, x=[0.0], y_points=[[0.0]], reference_points=[[1.5], [2.0]], r_max=1, oracle="gaussian"
            ),
            acceptance=AcceptanceConfig(rel_tol=1e-10),
        )
        result = run_experiment(config, tmp_path / "reference")
        assert result.exit_code == EXIT_OK, result.checks
        notes = [n for n in result.manifest.notes if n.startswith("reference point")]
        assert len(notes) == 2
        assert "density(y=1.5)" in notes[0] and "not checked" in notes[0]
        summary = orjson.loads((result.out_dir / "parametrix_summary.json").read_bytes())
        assert len(summary["reference_rel_error"]) == 2
        assert max(summary["reference_rel_error"]) <= 1e-10

    def test_discrete_gap_with_euler_leg(self, tmp_path):
        config = ExperimentConfig(
            name="brownian_gap",
            kind="discrete_gap",
            seed=4,
            m_paths=20_000,
            model=ModelConfig(name="constant", params={"drift": 0.0, "sigma": 1.0}),
            parametrix=ParametrixConfig(t=0.5, x=[0.0], y_points=[[0.3]], r_max=2, steps=[2, 4], euler_leg=True),
            acceptance=AcceptanceConfig(max_euler_z=5.0),
        )
        result = run_experiment(config, tmp_path / "gap")
        assert result.exit_code == EXIT_OK, result.checks
        assert [c.name for c in result.checks] == ["max_euler_z"]
        lines = (result.out_dir / "euler.csv").read_text().splitlines()
        assert lines[0] == "h,y0,euler_series,kde,stderr,bias_bound,z,continuous_gap"
        assert len(lines) == 3
        for line in lines[1:]:
            assert float(line.split(",")[-1]) < 1e-10
        kinds = {(j.kind, j.key[0]) for j in result.manifest.jobs}
        assert kinds >= {("series", "euler"), ("kde", "kde"), ("series", "discrete")}

    def test_decomposition_density_sweep(self, tmp_path):
        text = """
name = "decomposition_small"
kind = "density_sweep"
seed = 3
m_paths = 2000

[model]
name = "tanh_drift"

[grid]
steps = [2, 4]
refinement_factor = 8

[density]
mode = "decomposition"
y_points = [[0.5]]
bandwidth = 0.2

[mollifier]
epsilon = 0.1
quadrature_nodes = 8
"""
        result = run_experiment(decode_config(text), tmp_path / "decomposition")
        assert result.exit_code == EXIT_OK, result.checks
        sweep = (result.out_dir / "sweep.csv").read_text()
        for part in ("p-p_eps", "p_eps-p_eps_h", "p_eps_h-p_h", "p-p_h"):
            assert f"density(y=0.5):{part}" in sweep
        assert (result.out_dir / "epsilon_schedule.csv").exists()
        assert len([j for j in result.manifest.jobs if j.kind == "density"]) == 2

    @pytest.mark.slow
    def test_discrete_gap_bundle(self, tmp_path):
        path = resources.files("ewel") / "configs" / "discrete_gap.toml"
        result = run_experiment(str(path), tmp_path / "gap")
        assert result.exit_code == EXIT_OK, result.checks
        rows = (result.out_dir / "gap.csv").read_text().splitlines()[1:]
        gaps = [float(r.split(",")[-1]) for r in rows]
        assert len(gaps) == 4
        # halving h halves the gap
        assert all(1.6 <= a / b <= 2.4 for a, b in zip(gaps, gaps[1:]))
        assert {c.name for c in result.checks} == {"require_monotone_gap", "max_euler_z"}

    @pytest.mark.slow
    def test_parametrix_ou_bundle(self, tmp_path):
        path = resources.files("ewel") / "configs" / "parametrix_ou.toml"
        result = run_experiment(str(path), tmp_path / "ou")
        assert result.exit_code == EXIT_OK, result.checks
        notes = [n for n in result.manifest.notes if n.startswith("reference point")]
        assert len(notes) == 2

    @pytest.mark.slow
    def test_constant_sanity_bundle(self, tmp_path):
        path = resources.files("ewel") / "configs" / "constant_sanity.toml"
        assert run_experiment(str(path), tmp_path / "sanity").exit_code == EXIT_OK


def test_grid_config_h_list():
    assert GridConfig(steps=[4, 8], horizon=2.0).h_list == [0.5, 0.25]
