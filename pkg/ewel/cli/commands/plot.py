"""
ewel plot - render a sweep CSV as log-log error-vs-h plots.
"""

import re
from pathlib import Path
from typing import Optional

import typer

from ...exceptions import EwelError, NumericalFault
from ..utils import fail


def _slug(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9.=_-]+", "_", label).strip("_")


def plot_sweep(csv_path: Path, out: Optional[Path], series: Optional[str], gamma: Optional[float]) -> None:
    from ...harness import emit_plot, read_sweep_csv
    from ...weak_error import MIN_FIT_POINTS, fit_rate

    try:
        table = read_sweep_csv(csv_path)
    except EwelError as exc:
        fail(exc)
    if series is not None:
        matches = {k: v for k, v in table.items() if k == series or k.split(":", 1)[1] == series}
        if not matches:
            typer.secho(
                f"❌ Series '{series}' not in {csv_path}\n   Available: {', '.join(sorted(table))}",
                fg=typer.colors.RED,
            )
            raise typer.Exit(2)
        table = matches
    if not table:
        typer.secho(f"❌ {csv_path} holds no finite errors", fg=typer.colors.RED)
        raise typer.Exit(3)

    single = len(table) == 1
    for label, points in sorted(table.items()):
        if out is not None and single:
            target = out
        else:
            target = (out or csv_path.parent) / f"{csv_path.stem}.{_slug(label)}.svg"
            target.parent.mkdir(parents=True, exist_ok=True)
        fit = None
        if len(points) >= MIN_FIT_POINTS:
            try:
                fit = fit_rate(points)
            except NumericalFault:
                fit = None
        try:
            emit_plot(points, target, fit=fit, gamma=gamma, title=label)
        except EwelError as exc:
            fail(exc)
        slope = "" if fit is None else f" (slope {fit.slope:.3f})"
        typer.echo(f"  📈 {label} → {target}{slope}")
