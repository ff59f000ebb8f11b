"""Config-driven experiments: decode, fan out into jobs, merge, fit, plot and check."""

from ._config import (
    SEED_ENV,
    AcceptanceConfig,
    DensityConfig,
    ExperimentConfig,
    GridConfig,
    ModelConfig,
    MollifierConfig,
    ParametrixConfig,
    SampleGridConfig,
    TestFunctionConfig,
    canonical_bytes,
    check_config,
    config_hash,
    decode_config,
    load_config,
)
from ._jobs import Job, JobLogger, JobPool, JobResult, ordered
from ._manifest import JobRecord, RunManifest, tool_version, utc_now
from ._plot import emit_plot
from ._runner import EXIT_ACCEPTANCE, EXIT_FAULT, EXIT_OK, Artifacts, Check, RunResult, run_experiment
from ._tables import read_sweep_csv, write_csv, write_json

__all__ = [
    "SEED_ENV",
    "AcceptanceConfig",
    "DensityConfig",
    "ExperimentConfig",
    "GridConfig",
    "ModelConfig",
    "MollifierConfig",
    "ParametrixConfig",
    "SampleGridConfig",
    "TestFunctionConfig",
    "canonical_bytes",
    "check_config",
    "config_hash",
    "decode_config",
    "load_config",
    "Job",
    "JobLogger",
    "JobPool",
    "JobResult",
    "ordered",
    "JobRecord",
    "RunManifest",
    "tool_version",
    "utc_now",
    "emit_plot",
    "EXIT_ACCEPTANCE",
    "EXIT_FAULT",
    "EXIT_OK",
    "Artifacts",
    "Check",
    "RunResult",
    "run_experiment",
    "read_sweep_csv",
    "write_csv",
    "write_json",
]
