# Weighted log-log regression of errors against step sizes.

import logging
import math
from typing import Iterable, List, Sequence, Union

import msgspec
import numpy as np

from ..exceptions import NumericalFault
from ..models import Struct

logger = logging.getLogger(__name__)

MIN_FIT_POINTS = 4


class RatePoint(Struct):
    h: float
    error: float
    stderr: float = 0.0


class RateFit(Struct):
    """ln(error) = intercept + slope ln(h); ``slope`` is the empirical order."""

    slope: float
    intercept: float
    r_squared: float = msgspec.field(name="r2")
    slope_stderr: float = 0.0
    residual: float = 0.0
    weighted: bool = False
    points: List[RatePoint] = []
    excluded: List[RatePoint] = []
    notes: List[str] = []

    def predict(self, h: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        return np.exp(self.intercept) * np.asarray(h, dtype=float) ** self.slope


def _as_point(p: Union[RatePoint, Sequence[float]]) -> RatePoint:
    if isinstance(p, RatePoint):
        return p
    h, error, *rest = p
    return RatePoint(h=float(h), error=float(error), stderr=float(rest[0]) if rest else 0.0)


def fit_rate(points: Iterable[Union[RatePoint, Sequence[float]]]) -> RateFit:
    """Least squares of ln(error) on ln(h), weighted by (error / stderr)^2 when every stderr is positive.

    Non-positive or non-finite errors are excluded with a note; fewer than four usable
    points is a fault.
    """
    usable: List[RatePoint] = []
    excluded: List[RatePoint] = []
    notes: List[str] = []
    for point in map(_as_point, points):
        if not (math.isfinite(point.error) and point.error > 0.0 and point.h > 0.0):
            excluded.append(point)
            notes.append(f"excluded h={point.h!r}: error {point.error!r} is not positive")
            continue
        usable.append(point)
    if len(usable) < MIN_FIT_POINTS:
        raise NumericalFault(
            f"rate fit needs at least {MIN_FIT_POINTS} positive errors, got {len(usable)}",
            context={"excluded": len(excluded)},
        )
    usable.sort(key=lambda p: p.h)
    x = np.log([p.h for p in usable])
    y = np.log([p.error for p in usable])
    stderr = np.array([p.stderr for p in usable])
    weighted = bool(np.all(stderr > 0.0))
    if weighted:
        sigma_log = stderr / np.exp(y)
        w = 1.0 / sigma_log**2
    else:
        w = np.ones_like(x)
        if np.any(stderr > 0.0):
            notes.append("unweighted fit: some points carry no standard error")
    slope, intercept = np.polyfit(x, y, 1, w=np.sqrt(w))
    resid = y - (intercept + slope * x)
    n = x.size
    dof = n - 2
    s2 = float(np.sum(w * resid**2) / dof)
    x_mean = float(np.sum(w * x) / np.sum(w))
    sxx = float(np.sum(w * (x - x_mean) ** 2))
    y_mean = float(np.sum(w * y) / np.sum(w))
    syy = float(np.sum(w * (y - y_mean) ** 2))
    r_squared = 1.0 - float(np.sum(w * resid**2)) / syy if syy > 0.0 else 1.0
    fit = RateFit(
        slope=float(slope),
        intercept=float(intercept),
        r_squared=r_squared,
        slope_stderr=math.sqrt(s2 / sxx) if sxx > 0.0 else 0.0,
        residual=float(np.sqrt(np.max(resid**2))),
        weighted=weighted,
        points=usable,
        excluded=excluded,
        notes=notes,
    )
    logger.debug("rate fit over %d points: slope %.4f +- %.4f", n, fit.slope, fit.slope_stderr)
    return fit
