"""
ewel list-models - show the built-in coefficient models and their parameters.
"""

import typer


def list_models() -> None:
    from ...coefficients import list_models as _entries

    entries = _entries()
    name_w = max(len(e.name) for e in entries) + 2

    typer.echo(f"\n{typer.style('Built-in models:', bold=True)}")
    typer.echo("  " + "─" * (name_w + 50))
    for entry in entries:
        name = typer.style(f"{entry.name:<{name_w}}", fg=typer.colors.CYAN, bold=True)
        typer.echo(f"  {name}{entry.description}")
        if entry.defaults:
            params = ", ".join(f"{k}={v!r}" for k, v in sorted(entry.defaults.items()))
            typer.secho(f"  {'':<{name_w}}{params}", fg=typer.colors.BRIGHT_BLACK)

    typer.echo(f"\n  {len(entries)} model(s) total.\n")
