# Log-log error-vs-h plots rendered to SVG without a display.

import logging
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import matplotlib

matplotlib.use("Agg")

import numpy as np
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

from ..exceptions import NumericalFault
from ..weak_error import RateFit, RatePoint

logger = logging.getLogger(__name__)

# fixed salt and no Date metadata keep repeated renders byte-identical
_RC = {"svg.hashsalt": "ewel", "svg.fonttype": "path"}


def _points(table: Sequence[Union[RatePoint, Tuple[float, ...]]]) -> np.ndarray:
    rows = []
    for p in table:
        if isinstance(p, RatePoint):
            rows.append((p.h, p.error, p.stderr))
        else:
            h, err, *rest = p
            rows.append((h, err, rest[0] if rest else 0.0))
    arr = np.asarray(rows, dtype=float).reshape(-1, 3)
    return arr[np.isfinite(arr[:, 1]) & (arr[:, 1] > 0.0) & (arr[:, 0] > 0.0)]


def emit_plot(
    table: Sequence[Union[RatePoint, Tuple[float, ...]]],
    path: Union[str, Path],
    fit: Optional[RateFit] = None,
    gamma: Optional[float] = None,
    title: str = "",
) -> Path:
    """Error against h on log-log axes, with the fitted line and slope guides gamma/2 and 1."""
    pts = _points(table)
    if pts.shape[0] < 2:
        raise NumericalFault(f"a plot needs at least two positive errors, got {pts.shape[0]}")
    h, err, se = pts.T
    if np.ptp(np.log(h)) == 0.0:
        raise NumericalFault("degenerate h range: every point has the same step size", context={"h": float(h[0])})
    path = Path(path)
    with matplotlib.rc_context(_RC):
        fig = Figure(figsize=(6.0, 4.5))
        FigureCanvasSVG(fig)
        ax = fig.add_subplot(1, 1, 1)
        order = np.argsort(h)
        ax.errorbar(h[order], err[order], yerr=se[order], fmt="o-", color="tab:blue", lw=1.2, capsize=3, label="measured")
        grid = np.geomspace(h.min(), h.max(), 32)
        anchor_h, anchor_e = h[order][-1], err[order][-1]
        guides = [(1.0, "tab:gray", "slope 1")]
        if gamma is not None:
            guides.insert(0, (0.5 * gamma, "tab:green", f"slope {0.5 * gamma:g}"))
        for slope, color, label in guides:
            ax.loglog(grid, anchor_e * (grid / anchor_h) ** slope, ls=":", color=color, lw=1.0, label=label)
        if fit is not None:
            ax.loglog(grid, fit.predict(grid), ls="--", color="tab:red", lw=1.4, label=f"fit slope {fit.slope:.3f}")
            ax.text(
                0.03, 0.95, f"fitted slope {fit.slope:.3f} ± {fit.slope_stderr:.3f}",
                transform=ax.transAxes, va="top", fontsize=9,
            )
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("h")
        ax.set_ylabel("error")
        if title:
            ax.set_title(title, fontsize=10)
        ax.legend(fontsize=8, loc="lower right")
        fig.savefig(path, format="svg", metadata={"Date": None})
    logger.info("wrote plot %s (%d points)", path, pts.shape[0])
    return path
