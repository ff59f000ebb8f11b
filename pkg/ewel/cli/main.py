"""
ewel CLI - Main entry point

Commands:
- ewel run <config>        Run an experiment (file path or bundled config name)
- ewel list-models         List the built-in coefficient models
- ewel validate <config>   Check a config and measure its model's assumptions
- ewel plot <csv>          Plot a sweep table on log-log axes
- ewel version             Show version

Exit codes: 0 ok, 1 acceptance miss or assumption violation, 2 configuration error,
3 numerical fault.
"""

from pathlib import Path
from typing import Optional

import typer

from .utils import configure_logging

app = typer.Typer(
    name="ewel",
    help="📉 ewel - Euler weak-error laboratory",
    add_completion=False,
    no_args_is_help=True,
)


@app.command()
def run(
    config: str = typer.Argument(..., help="Experiment TOML file or bundled config name"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Output directory (overrides the config)"),
    jobs: int = typer.Option(1, "--jobs", "-j", min=1, help="Worker processes; results do not depend on it"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Log at DEBUG level, with per-job arguments"),
):
    """
    ▶  Run an experiment and write CSV, JSON, SVG and the run manifest.

    EWEL_SEED overrides the config seed.

    Example:
        ewel run constant_sanity
        ewel run my_sweep.toml --out runs/sweep --jobs 4
    """
    configure_logging(verbose)
    from .commands.run import run_config
    run_config(config, out, jobs, verbose)


@app.command("list-models")
def list_models():
    """
    📋 List the built-in coefficient models with their default parameters.
    """
    from .commands.models import list_models as _list
    _list()


@app.command()
def validate(
    config: str = typer.Argument(..., help="Experiment TOML file or bundled config name"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Log at DEBUG level"),
):
    """
    🔍 Decode a config, build its model and measure the coefficient assumptions.

    Example:
        ewel validate holder_rate_gamma_half
    """
    configure_logging(verbose)
    from .commands.validate import validate_config
    validate_config(config)


@app.command()
def plot(
    csv_path: Path = typer.Argument(..., exists=True, dir_okay=False, help="Sweep CSV written by `ewel run`"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="SVG file (one series) or output directory"),
    series: Optional[str] = typer.Option(None, "--series", "-s", help="Plot only this test function"),
    gamma: Optional[float] = typer.Option(None, "--gamma", help="Draw the slope gamma/2 guide"),
):
    """
    📈 Plot error against h with the fitted slope and reference slopes.

    Example:
        ewel plot runs/holder_rate_gamma_half/sweep.csv --gamma 0.5
    """
    from .commands.plot import plot_sweep
    plot_sweep(csv_path, out, series, gamma)


@app.command()
def version():
    """Show ewel version."""
    from ..harness import tool_version
    typer.echo(f"ewel v{tool_version()}")


def main():
    """Entry point for the CLI."""
    app()


if __name__ == "__main__":
    main()
