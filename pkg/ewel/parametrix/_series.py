# Parametrix series p = sum_r p~ (x) H^(r), continuous or on the Euler grid.

import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, ndimage
from scipy.special import gammaln

from ..coefficients import CoefficientField, as_points
from ..exceptions import ArgumentError, ConfigurationError, NumericalFault
from ..models import DensityEstimate, Struct
from ._kernel import chain_kernel_values, kernel_values
from ._memo import get_table_cache_config, table_key
from ._proxy import chain_covariance, covariance_between, gaussian_terms
from ._quadrature import QuadratureConfig, graded_time_rule, tensor_unit_rule

logger = logging.getLogger(__name__)

CONTINUOUS = "continuous"
DISCRETE = "discrete"
EULER = "euler"
MODES = (CONTINUOUS, DISCRETE, EULER)
MAX_ORDER = 6
_CHUNK = 1 << 19

Integrand = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Envelope:
    """Scales used to place space nodes: reference diffusion, ellipticity, drift bound."""

    a_ref: float
    lam: float = 1.0
    k1: float = 0.0
    truncation_sd: float = 6.0

    @classmethod
    def for_field(cls, field: CoefficientField, s: float, x: np.ndarray, truncation_sd: float) -> "Envelope":
        a = field.diffusion(s, x[None, :])[0]
        return cls(float(np.trace(a)) / field.dim, field.lam, field.k1, truncation_sd)

    def window(self, s: float, t: float, u: np.ndarray, x: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Centre (L, U, d) and half-width (U,) of the product of the two Gaussian envelopes."""
        v1 = self.a_ref * (u - s)
        v2 = self.a_ref * (t - u)
        total = v1 + v2
        centre = (x[None, None, :] * v2[None, :, None] + y[:, None, :] * v1[None, :, None]) / total[None, :, None]
        v = v1 * v2 / total
        half = self.truncation_sd * np.sqrt(self.lam * v) + self.k1 * (u - s) * v2 / total
        return centre, half


def space_time_integral(
    prev: Integrand,
    kernel: Callable[[np.ndarray, float, np.ndarray, np.ndarray], np.ndarray],
    s: float,
    t: float,
    x: np.ndarray,
    y: np.ndarray,
    env: Envelope,
    quad: QuadratureConfig,
    gamma: float = 1.0,
    h: Optional[float] = None,
    dirac: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> np.ndarray:
    """int_s^t du int prev(u, z) kernel(u, t, z, y) dz for each row of ``y``.

    With ``h`` the time integral is the left Riemann sum h sum_{k} over the grid; the
    k = 0 node, where ``prev`` is a Dirac mass at x, contributes h * dirac(y).
    """
    d = x.size
    if h is None:
        u, wu = graded_time_rule(s, t, quad.time_nodes, gamma)
    else:
        n = int(round((t - s) / h))
        u = s + h * np.arange(1, n)
        wu = np.full(u.size, h)
    nodes, weights = tensor_unit_rule(quad.space_nodes, d)
    out = np.zeros(y.shape[0])
    if u.size:
        step = max(1, _CHUNK // (u.size * nodes.shape[0]))
        for start in range(0, y.shape[0], step):
            yc = y[start : start + step]
            centre, half = env.window(s, t, u, x, yc)
            z = centre[:, :, None, :] + half[None, :, None, None] * nodes[None, None, :, :]
            wz = weights[None, :] * (half**d)[:, None]
            vals = prev(u, z) * kernel(u, t, z, yc)
            if not np.all(np.isfinite(vals)):
                bad = np.argwhere(~np.isfinite(vals))[0]
                raise NumericalFault(
                    "non-finite integrand in space-time convolution",
                    context={"s": s, "t": t, "u": float(u[bad[1]]), "z": z[tuple(bad)].tolist()},
                )
            out[start : start + step] = np.einsum("luz,uz,u->l", vals, wz, wu)
    if dirac is not None and h is not None:
        out += h * dirac(y)
    return out


def convolve_step(
    f: Callable[[float, np.ndarray, np.ndarray, np.ndarray], np.ndarray],
    g: Callable[[np.ndarray, float, np.ndarray, np.ndarray], np.ndarray],
    s: float,
    t: float,
    x: Any,
    y: Any,
    quadrature: Optional[QuadratureConfig] = None,
    envelope: Optional[Envelope] = None,
    h: Optional[float] = None,
    f_initial: str = "dirac",
    gamma: float = 1.0,
):
    """(f (x) g)(s, t, x, y) = int_s^t du int f(s, u, x, z) g(u, t, z, y) dz.

    ``f(s, u, x, z)`` takes times u (U,) and points z (L, U, Z, d); ``g(u, t, z, y)``
    additionally the targets y (L, d). With ``h`` the discrete convolution is used and
    f(s, s, x, .) is a Dirac mass at x (``f_initial="dirac"``) or zero (``"zero"``).
    """
    if f_initial not in ("dirac", "zero"):
        raise ArgumentError(f"f_initial must be 'dirac' or 'zero', got {f_initial!r}")
    if not s < t:
        raise ArgumentError(f"convolution needs s < t, got s={s}, t={t}")
    quad = quadrature or QuadratureConfig()
    yp = np.atleast_2d(np.asarray(y, dtype=float))
    xp = np.asarray(x, dtype=float).reshape(-1)
    if yp.shape[1] != xp.size:
        yp = yp.reshape(-1, xp.size)
    env = envelope or Envelope(a_ref=1.0, truncation_sd=quad.truncation_sd)
    dirac = None
    if h is not None:
        _check_grid(s, t, h)
        if f_initial == "dirac":
            def dirac(targets: np.ndarray) -> np.ndarray:
                z = np.broadcast_to(xp, (targets.shape[0], 1, 1, xp.size))
                return g(np.array([s]), t, z, targets).reshape(-1)

    value = space_time_integral(
        lambda u, z: f(s, u, xp, z), g, s, t, xp, yp, env, quad, gamma, h=h, dirac=dirac
    )
    return float(value[0]) if value.size == 1 else value


def _check_grid(s: float, t: float, h: float) -> int:
    steps = (t - s) / h
    n = int(round(steps))
    if n < 1 or abs(steps - n) > 1e-9 * max(1.0, steps):
        raise ArgumentError(f"s={s} and t={t} are not on a grid of step h={h}")
    return n


class ProxyIntegrand:
    """p~(s, u, x, z): Gaussian in z - x with covariance int_s^u a(v, z) dv."""

    def __init__(self, field: CoefficientField, s: float, x: np.ndarray, cov_nodes: int) -> None:
        self.field = field
        self.s = s
        self.x = x
        self.cov_nodes = cov_nodes

    def __call__(self, u: np.ndarray, z: np.ndarray) -> np.ndarray:
        cov = covariance_between(self.field, self.s, u, z, self.cov_nodes)
        dens, _ = gaussian_terms(z - self.x, cov)
        return dens


class ChainProxyIntegrand(ProxyIntegrand):
    """p~^h(s, u, x, z): Gaussian in z - x with covariance h sum_{s <= t_l < u} a(t_l, z)."""

    def __init__(self, field: CoefficientField, s: float, x: np.ndarray, h: float) -> None:
        super().__init__(field, s, x, 0)
        self.h = h

    def __call__(self, u: np.ndarray, z: np.ndarray) -> np.ndarray:
        cov = chain_covariance(self.field, self.s, u, z, self.h)
        dens, _ = gaussian_terms(z - self.x, cov, where="chain proxy")
        return dens


class LevelTable:
    """Term T_r(s, u, x, z) stored on (time row, scaled space node) and interpolated by cubic splines.

    Space nodes are xi = (z - x) / sqrt(a_ref (u - s)) on [-Xi, Xi]^d; values are stored
    multiplied by (a_ref (u - s))^{d/2}. Continuous rows sit at u = s + (t - s) w^2 with w
    uniform in [0, 1]; discrete rows at the grid times, where no time interpolation happens.
    """

    def __init__(
        self,
        values: np.ndarray,
        s: float,
        t: float,
        x: np.ndarray,
        xi_max: float,
        a_ref: float,
        h: Optional[float],
    ) -> None:
        self.values = values
        self.s, self.t, self.x = s, t, x
        self.xi_max = xi_max
        self.a_ref = a_ref
        self.h = h
        self.n_rows = values.shape[0]
        self.n_xi = values.shape[1]
        self.coeffs = ndimage.spline_filter(values, order=3, mode="nearest")

    def __call__(self, u: np.ndarray, z: np.ndarray) -> np.ndarray:
        d = self.x.size
        scale = self.a_ref * (u - self.s)
        xi = (z - self.x) / np.sqrt(scale)[None, :, None, None]
        if self.h is None:
            rows = np.sqrt((u - self.s) / (self.t - self.s)) * (self.n_rows - 1)
        else:
            rows = np.round((u - self.s) / self.h)
        coords = [np.broadcast_to(rows[None, :, None], z.shape[:-1])]
        coords += [(xi[..., k] + self.xi_max) / (2.0 * self.xi_max) * (self.n_xi - 1) for k in range(d)]
        vals = ndimage.map_coordinates(self.coeffs, np.stack(coords), order=3, mode="nearest", prefilter=False)
        vals = np.where(np.all(np.abs(xi) <= self.xi_max, axis=-1), vals, 0.0)
        return vals / (scale ** (d / 2.0))[None, :, None]


class SeriesEngine:
    """Builds and caches the level tables for one (field, s, t, x, mode) and evaluates terms.

    ``continuous`` sums p~ (x) H^(r); ``discrete`` keeps the kernel H but convolves on the
    Euler grid; ``euler`` uses the chain proxy p~^h and chain kernel H^h on that grid, which
    is the Euler transition density itself once r_max reaches the number of steps.
    """

    def __init__(
        self,
        field: CoefficientField,
        s: float,
        t: float,
        x: Any,
        quad: Optional[QuadratureConfig] = None,
        mode: str = CONTINUOUS,
        h: Optional[float] = None,
    ) -> None:
        if field.dim > 2:
            raise ConfigurationError(f"series evaluation supports d <= 2, got d={field.dim}")
        if mode not in MODES:
            raise ArgumentError(f"mode must be one of {', '.join(MODES)}, got {mode!r}")
        if not s < t:
            raise ArgumentError(f"series needs s < t, got s={s}, t={t}")
        self.field = field
        self.s, self.t = float(s), float(t)
        self.x = as_points(x, field.dim)[0]
        self.quad = (quad or QuadratureConfig()).for_dim(field.dim)
        self.mode = mode
        self.h = None
        if mode != CONTINUOUS:
            if h is None:
                raise ArgumentError(f"{mode} mode needs a step h")
            self.n_steps = _check_grid(self.s, self.t, h)
            self.h = float(h)
        if field.dim == 2:
            sig = field.sigma(self.s, self.x[None, :])[0]
            if abs(sig[0, 1]) > 0.0 or abs(sig[1, 0]) > 0.0:
                raise ConfigurationError("two-dimensional series needs a diagonal sigma")
        self.env = Envelope.for_field(field, self.s, self.x, self.quad.truncation_sd)
        spread = max(1.0, math.sqrt(field.k2**2 / self.env.a_ref))
        self.xi_max = 7.0 * spread + field.k1 * math.sqrt((self.t - self.s) / self.env.a_ref)
        self.tables: List[LevelTable] = []

    def _kernel(self, u: np.ndarray, t: float, z: np.ndarray, y: np.ndarray) -> np.ndarray:
        if self.mode == EULER:
            return chain_kernel_values(self.field, u, t, z, y, self.h)
        return kernel_values(self.field, u, t, z, y, self.quad.covariance_nodes)

    def _dirac(self, t: float) -> Callable[[np.ndarray], np.ndarray]:
        def term(targets: np.ndarray) -> np.ndarray:
            z = np.broadcast_to(self.x, (targets.shape[0], 1, 1, self.x.size))
            return self._kernel(np.array([self.s]), t, z, targets).reshape(-1)

        return term

    def _prev(self, level: int) -> Integrand:
        if level == 0 and self.mode == EULER:
            return ChainProxyIntegrand(self.field, self.s, self.x, self.h)
        if level == 0:
            return ProxyIntegrand(self.field, self.s, self.x, self.quad.covariance_nodes)
        return self.table(level)

    def _integrate(self, level: int, t: float, y: np.ndarray) -> np.ndarray:
        """T_{level+1}(s, t, x, y) from the level-``level`` integrand."""
        dirac = self._dirac(t) if (self.mode != CONTINUOUS and level == 0) else None
        return space_time_integral(
            self._prev(level),
            self._kernel,
            self.s,
            t,
            self.x,
            y,
            self.env,
            self.quad,
            self.field.gamma,
            h=self.h,
            dirac=dirac,
        )

    def row_times(self) -> np.ndarray:
        if self.mode != CONTINUOUS:
            return self.s + self.h * np.arange(self.n_steps + 1)
        w = np.linspace(0.0, 1.0, self.quad.table_time_nodes + 1)
        return self.s + (self.t - self.s) * w**2

    def xi_nodes(self) -> np.ndarray:
        return np.linspace(-self.xi_max, self.xi_max, self.quad.table_space_nodes)

    def table(self, level: int) -> LevelTable:
        while len(self.tables) < level:
            self.tables.append(self._build(len(self.tables) + 1))
        return self.tables[level - 1]

    def _build(self, level: int) -> LevelTable:
        d = self.field.dim
        xi = self.xi_nodes()
        mesh = np.meshgrid(*([xi] * d), indexing="ij")
        lattice = np.stack([m.reshape(-1) for m in mesh], axis=1)
        times = self.row_times()
        values = np.zeros((times.size,) + (xi.size,) * d)
        for k in range(1, times.size):
            scale = self.env.a_ref * (times[k] - self.s)
            targets = self.x + lattice * math.sqrt(scale)
            row = self._integrate(level - 1, float(times[k]), targets)
            values[k] = (row * scale ** (d / 2.0)).reshape((xi.size,) * d)
        logger.debug("built level-%d table for %s (%d rows)", level, self.field.name, times.size)
        return LevelTable(values, self.s, self.t, self.x, self.xi_max, self.env.a_ref, self.h)

    def terms(self, y: Any, r_max: int) -> np.ndarray:
        """Terms T_0..T_{r_max} at the points ``y``, shape (r_max + 1, n)."""
        if not 0 <= r_max <= MAX_ORDER:
            raise ArgumentError(f"r_max must lie in [0, {MAX_ORDER}], got {r_max}")
        yp = as_points(y, self.field.dim)
        out = np.empty((r_max + 1, yp.shape[0]))
        out[0] = self._proxy_at(yp)
        for r in range(1, r_max + 1):
            out[r] = self._integrate(r - 1, self.t, yp)
        return out

    def _proxy_at(self, yp: np.ndarray) -> np.ndarray:
        if self.mode == EULER:
            cov = chain_covariance(self.field, self.s, self.t, yp[:, None, :], self.h)[:, 0]
            dens, _ = gaussian_terms(yp - self.x, cov, where="chain proxy")
            return dens
        cov = covariance_between(self.field, self.s, self.t, yp[:, None, :], self.quad.covariance_nodes)[:, 0]
        dens, _ = gaussian_terms(yp - self.x, cov)
        return dens


def engine_for(
    field: CoefficientField,
    s: float,
    t: float,
    x: Any,
    quad: Optional[QuadratureConfig] = None,
    mode: str = CONTINUOUS,
    h: Optional[float] = None,
) -> SeriesEngine:
    """A SeriesEngine, reused from the table cache when the same inputs were seen before."""
    quad = quad or QuadratureConfig()
    config = get_table_cache_config()
    key = table_key(
        [field.name, field.params, field.dim, float(s), float(t), np.asarray(x, dtype=float), mode, h, quad.key()]
    )
    if config.enabled:
        engine = config.cache.get(key)
        if engine is not None:
            return engine
    engine = SeriesEngine(field, s, t, x, quad, mode, h)
    if config.enabled:
        config.cache.set(key, engine)
    return engine


def term_bound(r: int, dt: float, gamma: float, c1: float, T: float) -> float:
    """((1 v T^{(1-gamma)/2}) c1)^{r+1} Gamma(gamma/2)^r / Gamma(1 + r gamma/2) dt^{r gamma/2}."""
    if r < 0 or dt <= 0.0:
        raise ArgumentError(f"term_bound needs r >= 0 and dt > 0, got r={r}, dt={dt}")
    lead = max(1.0, T ** ((1.0 - gamma) / 2.0)) * c1
    log_value = (
        r * gammaln(gamma / 2.0) - gammaln(1.0 + r * gamma / 2.0) + (r * gamma / 2.0) * math.log(dt)
    )
    return lead ** (r + 1) * math.exp(log_value)


def fit_c1(term0: float, term1: float, dt: float, gamma: float, T: float) -> float:
    """c1 making term_bound(1) / term_bound(0) equal |term1 / term0|."""
    if term0 == 0.0:
        return 0.0
    unit = term_bound(1, dt, gamma, 1.0, T) / term_bound(0, dt, gamma, 1.0, T)
    return abs(term1 / term0) / unit


def tail_estimate(terms: Sequence[float], dt: float, gamma: float, T: float, extra: int = 30) -> Tuple[float, float]:
    """Bound on the omitted terms from c1 fitted on the first two; returns (tail, c1)."""
    if len(terms) < 2 or terms[0] == 0.0:
        return 0.0, 0.0
    c1 = fit_c1(terms[0], terms[1], dt, gamma, T)
    if c1 == 0.0:
        return 0.0, 0.0
    base = term_bound(0, dt, gamma, c1, T)
    r_max = len(terms) - 1
    tail = sum(term_bound(r, dt, gamma, c1, T) for r in range(r_max + 1, r_max + 1 + extra))
    return abs(terms[0]) * tail / base, c1


class SeriesAccumulator(Struct):
    s: float
    t: float
    x: List[float]
    y: List[float]
    mode: str
    h: Optional[float]
    r_max: int
    terms: List[float]
    value: float
    tail_estimate: float
    c1: float

    @property
    def magnitudes(self) -> List[float]:
        return [abs(v) for v in self.terms]


def density_series(
    s: float,
    t: float,
    x: Any,
    y: Any,
    field: CoefficientField,
    r_max: int = 4,
    mode: str = CONTINUOUS,
    h: Optional[float] = None,
    quad: Optional[QuadratureConfig] = None,
) -> SeriesAccumulator:
    """Partial sum of the series at a single point y, with per-term values and a tail bound."""
    engine = engine_for(field, s, t, x, quad, mode, h)
    yp = as_points(y, field.dim)[:1]
    terms = engine.terms(yp, r_max)[:, 0]
    tail, c1 = tail_estimate(terms, t - s, field.gamma, t)
    return SeriesAccumulator(
        s=float(s),
        t=float(t),
        x=engine.x.tolist(),
        y=yp[0].tolist(),
        mode=mode,
        h=h,
        r_max=r_max,
        terms=[float(v) for v in terms],
        value=float(terms.sum()),
        tail_estimate=float(tail),
        c1=float(c1),
    )


_METHODS = {CONTINUOUS: "parametrix", DISCRETE: "discrete_series", EULER: "euler_series"}


def density_values(
    s: float,
    t: float,
    x: Any,
    ys: Any,
    field: CoefficientField,
    r_max: int = 4,
    mode: str = CONTINUOUS,
    h: Optional[float] = None,
    quad: Optional[QuadratureConfig] = None,
) -> DensityEstimate:
    """Series values on a set of terminal points as a DensityEstimate."""
    engine = engine_for(field, s, t, x, quad, mode, h)
    yp = as_points(ys, field.dim)
    terms = engine.terms(yp, r_max)
    tails = [tail_estimate(terms[:, k], t - s, field.gamma, t)[0] for k in range(yp.shape[0])]
    return DensityEstimate(
        method=_METHODS[mode],
        s=float(s),
        t=float(t),
        x=engine.x.tolist(),
        points=yp.tolist(),
        values=terms.sum(axis=0).tolist(),
        tail_estimate=[float(v) for v in tails],
        r_max=r_max,
    )


def series_window(engine: SeriesEngine, n_points: int) -> Tuple[np.ndarray, List[np.ndarray]]:
    """Evaluation lattice covering the truncation window around x."""
    half = engine.xi_max * math.sqrt(engine.env.a_ref * (engine.t - engine.s))
    axes = [np.linspace(c - half, c + half, n_points) for c in engine.x]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1), axes


def series_mass(
    s: float,
    t: float,
    x: Any,
    field: CoefficientField,
    r_max: int = 4,
    mode: str = CONTINUOUS,
    h: Optional[float] = None,
    quad: Optional[QuadratureConfig] = None,
    n_points: Optional[int] = None,
) -> float:
    """Trapezoid mass of the truncated series over the truncation window."""
    engine = engine_for(field, s, t, x, quad, mode, h)
    n_points = n_points or (201 if field.dim == 1 else 41)
    pts, axes = series_window(engine, n_points)
    values = engine.terms(pts, r_max).sum(axis=0).reshape((n_points,) * field.dim)
    for ax in reversed(axes):
        values = integrate.trapezoid(values, ax, axis=-1)
    return float(values)


def aronson_envelope(values: Any, dt: float, dy: Any, c_grid: Optional[Sequence[float]] = None) -> Tuple[float, float]:
    """Smallest C over c in (0, 1] with values <= C c^{d/2} (2 pi dt)^{-d/2} exp(-c |dy|^2 / (2 dt))."""
    values = np.asarray(values, dtype=float).reshape(-1)
    dy = np.asarray(dy, dtype=float)
    dy = dy.reshape(values.size, -1)
    d = dy.shape[1]
    r2 = np.sum(dy * dy, axis=1)
    grid = np.asarray(c_grid if c_grid is not None else np.linspace(0.02, 1.0, 50))
    best = (math.inf, 1.0)
    for c in grid:
        env = c ** (d / 2.0) / (2.0 * math.pi * dt) ** (d / 2.0) * np.exp(-c * r2 / (2.0 * dt))
        C = float(np.max(values / env))
        if C < best[0]:
            best = (C, float(c))
    return best


class DecayCheck(Struct):
    r: int
    observed: float
    bound: float
    passed: bool


def term_decay_check(magnitudes: Sequence[float], dt: float, gamma: float, T: float) -> List[DecayCheck]:
    """Compare |T_r| for r >= 2 with the bound scaled by c1 fitted on |T_0| and |T_1|.

    Magnitudes are typically sup-norms over an evaluation band: pointwise terms change sign
    in y, so ratios of consecutive pointwise values are not informative.
    """
    mags = [abs(float(m)) for m in magnitudes]
    if len(mags) < 3 or mags[0] == 0.0:
        return []
    c1 = fit_c1(mags[0], mags[1], dt, gamma, T)
    base = term_bound(0, dt, gamma, c1, T) if c1 > 0.0 else 0.0
    checks = []
    for r in range(2, len(mags)):
        bound = mags[0] * term_bound(r, dt, gamma, c1, T) / base if base > 0.0 else 0.0
        checks.append(DecayCheck(r=r, observed=mags[r], bound=bound, passed=mags[r] <= bound * (1 + 1e-9) + 1e-15))
    return checks
