# Closed-form level-set manifolds: signed distance, projection and normals.
# Convention: d_S > 0 inside the bounded region (sphere), on the normal side (hyperplane),
# and z > p for a 1D point manifold {p}.

from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import ConfigurationError


def as_points(x: Any, dim: int) -> np.ndarray:
    """Coerce ``x`` to an ``(n, dim)`` float array.

    A 1-D array is read as ``n`` scalar points when ``dim == 1`` and as a single point
    otherwise.
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        if dim != 1:
            raise ConfigurationError(f"scalar point given for a {dim}-dimensional field")
        return arr.reshape(1, 1)
    if arr.ndim == 1:
        if dim == 1:
            return arr.reshape(-1, 1)
        if arr.shape[0] != dim:
            raise ConfigurationError(f"point of length {arr.shape[0]} given for dim={dim}")
        return arr.reshape(1, dim)
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise ConfigurationError(f"points of shape {arr.shape} do not match dim={dim}")
    return arr


class Manifold:
    """A level set {d_S = 0} with closed-form signed distance."""

    kind: str = "manifold"
    dim: int = 1

    def signed_distance(self, x: np.ndarray) -> np.ndarray:  # pragma: no cover - interface
        raise NotImplementedError

    def project(self, x: np.ndarray) -> np.ndarray:  # pragma: no cover - interface
        raise NotImplementedError

    def normal(self, x: np.ndarray) -> np.ndarray:  # pragma: no cover - interface
        raise NotImplementedError

    def level_set(self, value: float) -> "Manifold":  # pragma: no cover - interface
        raise NotImplementedError

    def bounding_box(self) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        return None

    def reach(self) -> float:
        return float("inf")

    def describe(self) -> Dict[str, Any]:  # pragma: no cover - interface
        raise NotImplementedError


class PointManifold(Manifold):
    """Single point {p} on the real line; d_S(z) = z - p."""

    __slots__ = ("point",)
    kind = "point"
    dim = 1

    def __init__(self, point: float = 0.0) -> None:
        self.point = float(point)

    def signed_distance(self, x: np.ndarray) -> np.ndarray:
        return as_points(x, 1)[:, 0] - self.point

    def project(self, x: np.ndarray) -> np.ndarray:
        pts = as_points(x, 1)
        return np.full_like(pts, self.point)

    def normal(self, x: np.ndarray) -> np.ndarray:
        return np.ones_like(as_points(x, 1))

    def level_set(self, value: float) -> "PointManifold":
        return PointManifold(self.point + value)

    def bounding_box(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.array([self.point]), np.array([self.point])

    def describe(self) -> Dict[str, Any]:
        return {"kind": self.kind, "point": self.point}


class HyperplaneManifold(Manifold):
    """Hyperplane {<n, x> = offset} with unit normal n; positive on the normal side."""

    __slots__ = ("normal_vector", "offset", "dim")
    kind = "hyperplane"

    def __init__(self, normal: Sequence[float], offset: float = 0.0) -> None:
        vec = np.asarray(normal, dtype=float).reshape(-1)
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            raise ConfigurationError("hyperplane normal must be non-zero")
        self.normal_vector = vec / norm
        self.offset = float(offset) / norm
        self.dim = vec.shape[0]

    def signed_distance(self, x: np.ndarray) -> np.ndarray:
        return as_points(x, self.dim) @ self.normal_vector - self.offset

    def project(self, x: np.ndarray) -> np.ndarray:
        pts = as_points(x, self.dim)
        return pts - np.outer(self.signed_distance(pts), self.normal_vector)

    def normal(self, x: np.ndarray) -> np.ndarray:
        pts = as_points(x, self.dim)
        return np.broadcast_to(self.normal_vector, pts.shape).copy()

    def level_set(self, value: float) -> "HyperplaneManifold":
        return HyperplaneManifold(self.normal_vector, self.offset + value)

    def describe(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "normal": self.normal_vector.tolist(),
            "offset": self.offset,
        }


class SphereManifold(Manifold):
    """Sphere of given center and radius; d_S = radius - |x - center| (positive inside)."""

    __slots__ = ("center", "radius", "dim")
    kind = "sphere"

    def __init__(self, center: Sequence[float], radius: float) -> None:
        self.center = np.asarray(center, dtype=float).reshape(-1)
        self.radius = float(radius)
        if self.radius <= 0.0:
            raise ConfigurationError(f"sphere radius must be positive, got {radius}")
        self.dim = self.center.shape[0]

    def _offsets(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        rel = as_points(x, self.dim) - self.center
        return rel, np.linalg.norm(rel, axis=1)

    def signed_distance(self, x: np.ndarray) -> np.ndarray:
        _, r = self._offsets(x)
        return self.radius - r

    def _directions(self, rel: np.ndarray, r: np.ndarray) -> np.ndarray:
        # the center projects along the first axis
        unit = np.zeros_like(rel)
        unit[:, 0] = 1.0
        safe = r > 0.0
        unit[safe] = rel[safe] / r[safe, None]
        return unit

    def project(self, x: np.ndarray) -> np.ndarray:
        rel, r = self._offsets(x)
        return self.center + self.radius * self._directions(rel, r)

    def normal(self, x: np.ndarray) -> np.ndarray:
        rel, r = self._offsets(x)
        return -self._directions(rel, r)

    def level_set(self, value: float) -> "SphereManifold":
        return SphereManifold(self.center, self.radius - value)

    def bounding_box(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.center - self.radius, self.center + self.radius

    def reach(self) -> float:
        return self.radius

    def describe(self) -> Dict[str, Any]:
        return {"kind": self.kind, "center": self.center.tolist(), "radius": self.radius}


_MANIFOLD_KINDS = {
    "point": lambda table: PointManifold(table.get("point", 0.0)),
    "hyperplane": lambda table: HyperplaneManifold(table["normal"], table.get("offset", 0.0)),
    "sphere": lambda table: SphereManifold(table["center"], table["radius"]),
}


def make_manifold(table: Dict[str, Any]) -> Manifold:
    """Build a manifold from ``{"kind": ..., ...}``; unknown kinds are a configuration error."""
    kind = table.get("kind")
    builder = _MANIFOLD_KINDS.get(kind)
    if builder is None:
        raise ConfigurationError(
            f"unsupported manifold shape {kind!r}; expected one of {sorted(_MANIFOLD_KINDS)}"
        )
    try:
        return builder(table)
    except KeyError as exc:
        raise ConfigurationError(f"manifold {kind!r} is missing field {exc.args[0]!r}") from exc


def _check_supported(manifold: Any) -> Manifold:
    if not isinstance(manifold, (PointManifold, HyperplaneManifold, SphereManifold)):
        raise ConfigurationError(f"unsupported manifold shape {type(manifold).__name__}")
    return manifold


def signed_distance(x: Any, manifold: Manifold) -> np.ndarray:
    """Signed distance of ``x`` to ``manifold`` (scalar in, scalar out)."""
    m = _check_supported(manifold)
    value = m.signed_distance(as_points(x, m.dim))
    return float(value[0]) if np.ndim(x) == 0 or (np.ndim(x) == 1 and m.dim > 1) else value


def project(x: Any, manifold: Manifold) -> np.ndarray:
    """Orthogonal projection of ``x`` onto the zero level set of ``manifold``."""
    m = _check_supported(manifold)
    return m.project(as_points(x, m.dim))


class DiscontinuitySet:
    """Pairwise-disjoint manifolds carrying the jumps of a piecewise-smooth drift."""

    __slots__ = ("manifolds", "dim")

    def __init__(self, manifolds: Sequence[Manifold]) -> None:
        if not manifolds:
            raise ConfigurationError("a discontinuity set needs at least one manifold")
        self.manifolds: List[Manifold] = [_check_supported(m) for m in manifolds]
        dims = {m.dim for m in self.manifolds}
        if len(dims) != 1:
            raise ConfigurationError(f"manifolds of mixed dimensions {sorted(dims)}")
        self.dim = dims.pop()

    def __len__(self) -> int:
        return len(self.manifolds)

    def signed_distances(self, x: np.ndarray) -> np.ndarray:
        pts = as_points(x, self.dim)
        return np.stack([m.signed_distance(pts) for m in self.manifolds], axis=1)

    def nearest(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Index of the closest manifold and the signed distance to it."""
        ds = self.signed_distances(x)
        idx = np.argmin(np.abs(ds), axis=1)
        return idx, ds[np.arange(ds.shape[0]), idx]

    def distance(self, x: np.ndarray) -> np.ndarray:
        return np.min(np.abs(self.signed_distances(x)), axis=1)

    def min_cross_distance(self, sample_points: np.ndarray) -> Tuple[float, Tuple[int, int]]:
        """Smallest |d_S_j| over projections onto manifold i (i != j), and that pair."""
        pts = as_points(sample_points, self.dim)
        best, pair = float("inf"), (-1, -1)
        for i, mi in enumerate(self.manifolds):
            on_i = mi.project(pts)
            for j, mj in enumerate(self.manifolds):
                if i == j:
                    continue
                value = float(np.min(np.abs(mj.signed_distance(on_i))))
                if value < best:
                    best, pair = value, (min(i, j), max(i, j))
        return best, pair

    def check_disjoint(self, sample_points: np.ndarray, margin: float = 0.0) -> None:
        """Raise when two manifolds come within ``margin`` of each other on the samples."""
        if len(self.manifolds) < 2:
            return
        value, (i, j) = self.min_cross_distance(sample_points)
        if value <= margin:
            raise ConfigurationError(
                f"manifolds {i} and {j} are {value:.3g} apart, need more than {margin:.3g}",
                context={
                    "pair": [i, j],
                    "distance": value,
                    "manifolds": [self.manifolds[i].describe(), self.manifolds[j].describe()],
                },
            )

    def bounding_box(self) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        boxes = [m.bounding_box() for m in self.manifolds]
        if any(b is None for b in boxes):
            return None
        lo = np.min(np.stack([b[0] for b in boxes]), axis=0)
        hi = np.max(np.stack([b[1] for b in boxes]), axis=0)
        return lo, hi

    def describe(self) -> List[Dict[str, Any]]:
        return [m.describe() for m in self.manifolds]
