"""
ewel run - execute an experiment config and write its artifacts.
"""

from pathlib import Path
from typing import Optional

import typer

from ...exceptions import EwelError
from ..utils import fail, resolve_config


def run_config(config: str, out: Optional[Path], jobs: int, verbose: bool = False) -> None:
    from ...harness import JobLogger, load_config, run_experiment

    path = resolve_config(config)
    # every job carries the full experiment config
    job_logger = JobLogger(include_kwargs=verbose, redact_kwargs=("config",))
    try:
        result = run_experiment(load_config(path), out_dir=out, jobs=jobs, job_logger=job_logger)
    except EwelError as exc:
        fail(exc)

    manifest = result.manifest
    typer.echo(f"\n{typer.style(manifest.name, bold=True)} ({manifest.kind}) → {result.out_dir}")
    for name in manifest.outputs:
        typer.echo(f"  📄 {name}")
    failed = [j for j in manifest.jobs if j.status != "ok"]
    for job in failed:
        detail = (job.error or {}).get("detail", "")
        typer.secho(f"  ❌ job {job.kind} {job.key} failed: {detail}", fg=typer.colors.RED)
    for check in result.checks:
        mark, color = ("✅", typer.colors.GREEN) if check.passed else ("❌", typer.colors.RED)
        observed = "" if check.observed is None else f" (observed {check.observed:.4g})"
        typer.secho(f"  {mark} {check.name}: {check.detail}{observed}", fg=color)
    for note in manifest.notes:
        typer.secho(f"  ℹ  {note}", fg=typer.colors.YELLOW)

    if result.exit_code:
        raise typer.Exit(result.exit_code)
    typer.secho("\n✅ Run complete.", fg=typer.colors.GREEN)
