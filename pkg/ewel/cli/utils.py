"""Shared helpers for CLI commands."""

import logging
from importlib import resources
from pathlib import Path

import typer

from ..exceptions import EwelError


def configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )


def bundled_configs() -> list:
    root = resources.files("ewel") / "configs"
    return sorted(p.name[: -len(".toml")] for p in root.iterdir() if p.name.endswith(".toml"))


def resolve_config(name_or_path: str) -> Path:
    """A config file path, or the name of a bundled config such as ``constant_sanity``."""
    path = Path(name_or_path)
    if path.exists():
        return path
    bundled = resources.files("ewel") / "configs" / f"{name_or_path}.toml"
    if bundled.is_file():
        return Path(str(bundled))
    typer.secho(
        f"❌ Config not found: {name_or_path}\n"
        f"   Bundled configs: {', '.join(bundled_configs())}",
        fg=typer.colors.RED,
    )
    raise typer.Exit(2)


def fail(exc: EwelError) -> None:
    """Report a library error and exit with its code."""
    typer.secho(f"❌ {type(exc).__name__}: {exc.detail}", fg=typer.colors.RED)
    for key, value in sorted(exc.context.items()):
        typer.secho(f"   {key}: {value}", fg=typer.colors.RED)
    raise typer.Exit(exc.exit_code)
