"""
ewel validate - decode a config, build its model and measure the assumptions.
"""

import typer

from ...exceptions import EwelError
from ..utils import fail, resolve_config


def validate_config(config: str) -> None:
    from ...coefficients import SampleGrid, validate_assumptions
    from ...harness import check_config, load_config

    path = resolve_config(config)
    try:
        cfg = load_config(path)
        field = check_config(cfg)
        horizon = cfg.grid.horizon if cfg.grid is not None else 1.0
        report = validate_assumptions(field, SampleGrid(horizon=horizon))
    except EwelError as exc:
        fail(exc)

    typer.echo(f"\n{typer.style(cfg.name, bold=True)}: model {report.model} ({report.regime}, d={report.dim})")
    typer.echo(f"  K1 declared {report.k1_declared:.4g}, measured {report.k1_measured:.4g}")
    typer.echo(f"  K2 declared {report.k2_declared:.4g}, measured {report.k2_measured:.4g}")
    typer.echo(
        f"  ellipticity in [{report.ellipticity_min:.4g}, {report.ellipticity_max:.4g}], "
        f"Λ = {report.lambda_declared:.4g}"
    )
    if report.holder_exponent is not None:
        typer.echo(f"  Hölder exponent measured {report.holder_exponent:.3f}, quotient {report.holder_quotient:.4g}")

    if report.passed:
        typer.secho("\n✅ Assumptions hold on the sample grid.", fg=typer.colors.GREEN)
        return
    for v in report.violations:
        typer.secho(
            f"  ❌ {v.kind} at t={v.t:g}, x={v.x}: {v.value:.4g} > {v.bound:.4g}", fg=typer.colors.RED
        )
    raise typer.Exit(1)
