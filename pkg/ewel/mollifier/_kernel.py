# Normalized compact-support bump kernel and its tensor Gauss-Legendre rule.

import math
from functools import lru_cache
from typing import Tuple

import numpy as np
from scipy import integrate

from ..exceptions import ConfigurationError

MIN_NODES = 8


def _sphere_area(dim: int) -> float:
    """Surface measure of the unit sphere in R^dim (2 for dim = 1)."""
    return 2.0 * math.pi ** (dim / 2.0) / math.gamma(dim / 2.0)


def bump(r2: np.ndarray) -> np.ndarray:
    """Unnormalized profile exp(-1/(1 - |z|^2)) from squared radii, zero for |z| >= 1."""
    r2 = np.asarray(r2, dtype=float)
    out = np.zeros_like(r2)
    inside = r2 < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
    return out


@lru_cache(maxsize=None)
def radial_moment(dim: int, power: float) -> float:
    """Integral of |z|^power exp(-1/(1-|z|^2)) over the unit ball of R^dim."""
    value, _ = integrate.quad(
        lambda r: r ** (dim - 1 + power) * math.exp(-1.0 / (1.0 - r * r)) if r < 1.0 else 0.0,
        0.0,
        1.0,
        epsabs=1e-15,
        epsrel=1e-13,
        limit=200,
    )
    return _sphere_area(dim) * value


class MollifierKernel:
    """rho(z) = c_norm exp(-1/(1-|z|^2)) on the unit ball of R^dim.

    ``points``/``weights`` form a tensor Gauss-Legendre rule on [-1, 1]^dim with the
    kernel folded into the weights, rescaled so that the discrete mass is exactly one.
    """

    __slots__ = ("dim", "nodes", "c_norm", "points", "weights")

    support_radius = 1.0

    def __init__(self, dim: int = 1, nodes: int = 24) -> None:
        if nodes < MIN_NODES:
            raise ConfigurationError(
                f"quadrature needs at least {MIN_NODES} nodes per axis, got {nodes}",
                context={"field": "mollifier.quadrature_nodes"},
            )
        self.dim = int(dim)
        self.nodes = int(nodes)
        self.c_norm = 1.0 / radial_moment(self.dim, 0.0)
        self.points, self.weights = self._tensor_rule()

    def _tensor_rule(self) -> Tuple[np.ndarray, np.ndarray]:
        z, w = np.polynomial.legendre.leggauss(self.nodes)
        grids = np.meshgrid(*([z] * self.dim), indexing="ij")
        wgrids = np.meshgrid(*([w] * self.dim), indexing="ij")
        pts = np.stack([g.reshape(-1) for g in grids], axis=1)
        wts = np.prod(np.stack([g.reshape(-1) for g in wgrids], axis=1), axis=1)
        wts = wts * self.profile(pts)
        keep = wts > 0.0
        pts, wts = pts[keep], wts[keep]
        return pts, wts / wts.sum()

    def profile(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        r2 = z * z if self.dim == 1 and z.ndim <= 1 else np.sum(z * z, axis=-1)
        return self.c_norm * bump(r2)

    def moment(self, gamma: float) -> float:
        """Integral of |z|^gamma rho(z)."""
        return radial_moment(self.dim, float(gamma)) * self.c_norm

    def second_moment(self) -> float:
        """Per-coordinate second moment, the integral of z_1^2 rho(z)."""
        return self.moment(2.0) / self.dim

    def mass(self) -> float:
        return radial_moment(self.dim, 0.0) * self.c_norm
