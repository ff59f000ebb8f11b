# Two-sided projection blend of a piecewise-smooth drift across its discontinuity set.

import logging
from typing import Optional

import numpy as np

from ..coefficients import CoefficientField, Regime, SampleGrid
from ..exceptions import ConfigurationError
from ._field import MollifiedField, MollifyMethod
from ._holder import _check_radius

logger = logging.getLogger(__name__)

_E_QUARTER = float(np.exp(0.25))


def blend_weight(dist_over_eps: np.ndarray) -> np.ndarray:
    """e^{1/4} exp(-1/(4 - u^2)) for u in [0, 2), zero from u = 2 on."""
    u = np.asarray(dist_over_eps, dtype=float)
    out = np.zeros_like(u)
    ok = u < 2.0
    out[ok] = _E_QUARTER * np.exp(-1.0 / (4.0 - u[ok] ** 2))
    return out


class BlendedDrift:
    """b_eps = b outside V_eps; inside, b at the projections on both boundary level sets, bump-weighted.

    For a manifold S with signed distance d_S the two boundaries are {d_S = -eps} and
    {d_S = +eps}; their distances from x are |d_S + eps| and |eps - d_S|.
    """

    def __init__(self, base: CoefficientField, eps: float) -> None:
        self.base = base
        self.eps = eps
        manifolds = base.discontinuities.manifolds
        self.negative_side = [m.level_set(-eps) for m in manifolds]
        self.positive_side = [m.level_set(eps) for m in manifolds]

    def __call__(self, t: float, x: np.ndarray) -> np.ndarray:
        out = np.array(self.base.drift(t, x), dtype=float)
        idx, ds = self.base.discontinuities.nearest(x)
        inside = np.abs(ds) < self.eps
        if not inside.any():
            return out
        for i in np.unique(idx[inside]):
            mask = inside & (idx == i)
            pts, d = x[mask], ds[mask]
            w1 = blend_weight(np.abs(d + self.eps) / self.eps)
            w2 = blend_weight(np.abs(self.eps - d) / self.eps)
            b1 = self.base.drift(t, self.negative_side[i].project(pts))
            b2 = self.base.drift(t, self.positive_side[i].project(pts))
            out[mask] = w1[:, None] * b1 + w2[:, None] * b2
        return out


def mollify_piecewise(
    field: CoefficientField,
    eps: float,
    grid: Optional[SampleGrid] = None,
) -> MollifiedField:
    """Blend the drift of a piecewise-smooth field on V_eps; sigma is kept as is."""
    if field.regime is not Regime.PIECEWISE_SMOOTH or field.discontinuities is None:
        raise ConfigurationError(f"model {field.name!r} carries no discontinuity set to blend across")
    eps = _check_radius(eps)
    disc = field.discontinuities
    for i, m in enumerate(disc.manifolds):
        if eps >= m.reach():
            raise ConfigurationError(
                f"eps={eps:g} exceeds the reach {m.reach():g} of manifold {i}",
                context={"manifold": m.describe()},
            )
    grid = grid or SampleGrid()
    disc.check_disjoint(grid.lattice(field.dim), margin=2.0 * eps)
    logger.debug("blended %s across %d manifold(s) with eps=%g", field.name, len(disc), eps)
    return MollifiedField(
        field,
        eps,
        MollifyMethod.PIECEWISE_BLEND,
        BlendedDrift(field, eps),
        field.sigma_eval,
        quadrature_nodes=0,
    )
