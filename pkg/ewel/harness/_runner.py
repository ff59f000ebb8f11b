# Experiment orchestration: config -> independent jobs -> merged tables, fits, plots and checks.
# Only this thread writes files; workers hand back values.

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

import msgspec
import numpy as np
from scipy import stats

from ..coefficients import CoefficientField, Regime, SampleGrid, as_points
from ..euler import GridSchedule, SimulationConfig, simulate_batch
from ..exceptions import NumericalFault
from ..models import DensityEstimate, Struct
from ..mollifier import DEFAULT_NODES, mollifier_scan, mollify
from ..parametrix import (
    CONTINUOUS,
    DISCRETE,
    EULER,
    QuadratureConfig,
    aronson_envelope,
    density_values,
    engine_for,
    ou_density,
    series_mass,
    term_decay_check,
)
from ..weak_error import (
    DensityMode,
    RateFit,
    RatePoint,
    SweepRow,
    SWEEP_COLUMNS,
    density_error_cell,
    density_label,
    check_declared_distances,
    fit_rate,
    flag_series,
    kde_density,
    schedule_rows,
    weak_error_cell,
)
from ._config import ExperimentConfig, check_config, config_hash, load_config
from ._jobs import Job, JobLogger, JobPool, JobResult, ordered
from ._manifest import JobRecord, RunManifest, tool_version, utc_now
from ._plot import emit_plot
from ._tables import write_csv, write_json

logger = logging.getLogger(__name__)

# workers run their simulations inline; parallelism lives at the job level
INLINE = SimulationConfig(jobs=1)

EXIT_OK = 0
EXIT_ACCEPTANCE = 1
EXIT_FAULT = 3


class Check(Struct):
    name: str
    passed: bool
    observed: Optional[float] = None
    detail: str = ""


@dataclass
class RunResult:
    exit_code: int
    out_dir: Path
    manifest: RunManifest
    checks: List[Check]


class Artifacts:
    """Writes run outputs and lists each one in the manifest."""

    def __init__(self, out_dir: Path, manifest: RunManifest):
        self.out_dir = out_dir
        self.manifest = manifest

    def _record(self, path: Path) -> Path:
        self.manifest.record_output(path, self.out_dir)
        return path

    def csv(self, name: str, rows: Sequence[Dict[str, Any]], columns: Sequence[str]) -> Path:
        return self._record(write_csv(self.out_dir / name, rows, columns))

    def json(self, name: str, obj: Any) -> Path:
        return self._record(write_json(self.out_dir / name, obj))

    def plot(self, name: str, points: Sequence[RatePoint], fit: Optional[RateFit], gamma: Optional[float], title: str) -> Optional[Path]:
        try:
            return self._record(emit_plot(points, self.out_dir / name, fit=fit, gamma=gamma, title=title))
        except NumericalFault as exc:
            self.manifest.notes.append(f"{name} not written: {exc}")
            return None


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------


def _series_points(rows: Sequence[SweepRow]) -> Dict[str, List[RatePoint]]:
    series: Dict[str, List[RatePoint]] = {}
    for row in rows:
        if math.isfinite(row.error):
            series.setdefault(row.test_function, []).append(RatePoint(h=row.h, error=abs(row.error), stderr=row.stderr))
    return series


def _fit(points: Sequence[RatePoint], label: str, notes: List[str]) -> Optional[RateFit]:
    try:
        return fit_rate(points)
    except NumericalFault as exc:
        notes.append(f"no rate fit for {label}: {exc}")
        return None


def _fit_all(rows: Sequence[SweepRow], notes: List[str]) -> Dict[str, RateFit]:
    fits = {}
    for label, points in _series_points(rows).items():
        if len(points) >= 2:
            fit = _fit(points, label, notes)
            if fit is not None:
                fits[label] = fit
    return fits


def _check_z(rows: Sequence[SweepRow], z: float, atol: float) -> Check:
    worst = 0.0
    passed = True
    for row in rows:
        if not math.isfinite(row.error):
            continue
        excess = abs(row.error) - atol
        if excess > z * row.stderr:
            passed = False
        if excess > 0.0:
            worst = max(worst, excess / row.stderr if row.stderr > 0.0 else math.inf)
    return Check(name="max_abs_z", passed=passed, observed=worst, detail=f"|error| <= {z:g} stderr + {atol:g}")


def _check_slope(fit: Optional[RateFit], min_slope: float, label: str) -> Check:
    if fit is None:
        return Check(name="min_slope", passed=False, detail=f"no rate fit for {label}")
    return Check(name="min_slope", passed=fit.slope >= min_slope, observed=fit.slope, detail=f"{label}: slope >= {min_slope:g}")


def _check_decreasing(points: Sequence[RatePoint], label: str) -> Check:
    pts = sorted(points, key=lambda p: -p.h)
    worst = -math.inf
    for a, b in zip(pts, pts[1:]):
        noise = 2.0 * math.hypot(a.stderr, b.stderr)
        worst = max(worst, b.error - a.error - noise)
    return Check(
        name="require_decreasing",
        passed=len(pts) >= 2 and worst <= 0.0,
        observed=worst if math.isfinite(worst) else None,
        detail=f"{label}: no increase beyond two combined standard errors as h shrinks",
    )


def _range_check(name: str, values: Sequence[float], bounds: Sequence[float], quantity: str) -> Check:
    lo, hi = bounds
    passed = bool(values) and all(lo <= v <= hi for v in values)
    observed = values[0] if len(values) == 1 else (max(values, key=lambda v: abs(v - 0.5 * (lo + hi))) if values else None)
    return Check(name=name, passed=passed, observed=observed, detail=f"{quantity} in [{lo:g}, {hi:g}]")


def _job_records(config: ExperimentConfig, results: Dict[Any, JobResult]) -> List[JobRecord]:
    return [
        JobRecord(kind=r.kind, key=list(r.key), seed=config.seed, status=r.status, error=r.error)
        for r in ordered(results)
    ]


def _values(results: Dict[Any, JobResult]) -> List[Any]:
    return [r.value for r in ordered(results) if r.ok]


def _quadrature(config: ExperimentConfig) -> QuadratureConfig:
    p = config.parametrix
    overrides = {}
    if p.time_nodes is not None:
        overrides["time_nodes"] = p.time_nodes
    if p.space_nodes is not None:
        overrides["space_nodes"] = p.space_nodes
    return QuadratureConfig(**overrides)


def _series_field(config: ExperimentConfig) -> CoefficientField:
    field = config.build_model()
    moll = config.mollifier
    if moll is None or not isinstance(moll.epsilon, float):
        return field
    smooth = mollify(field, moll.epsilon, nodes=moll.quadrature_nodes, horizon=moll.horizon)
    if field.dim == 1 and not field.time_dependent and smooth.quadrature_nodes:
        return smooth.tabulated()
    return smooth


# ---------------------------------------------------------------------------
# Job bodies (module level so worker processes can import them)
# ---------------------------------------------------------------------------


def _weak_error_job(config: ExperimentConfig, h: float) -> List[SweepRow]:
    field = config.build_model()
    tests = config.build_test_functions(field.dim)
    grid = config.grid
    return weak_error_cell(
        field, tests, config.x0, grid.horizon, h, config.m_paths, config.seed, grid.refinement_factor, INLINE
    )


def _density_job(config: ExperimentConfig, h: float, epsilon: Optional[float]) -> List[SweepRow]:
    field = config.build_model()
    d = config.density
    nodes = config.mollifier.quadrature_nodes if config.mollifier is not None else DEFAULT_NODES
    return density_error_cell(
        field, config.x0, d.y_points, config.grid.horizon, h, d.mode, config.m_paths, config.seed,
        refinement_factor=config.grid.refinement_factor,
        epsilon=epsilon,
        bandwidth=d.bandwidth,
        bandwidth_scale=d.bandwidth_scale,
        quadrature_nodes=nodes,
        config=INLINE,
    )


def _scan_job(config: ExperimentConfig) -> list:
    field = config.build_model()
    moll = config.mollifier
    g = moll.grid
    grid = SampleGrid(horizon=moll.horizon) if g is None else SampleGrid(
        horizon=moll.horizon, radius=g.radius, resolution=g.resolution, time_resolution=g.time_resolution
    )
    return mollifier_scan(
        field, moll.epsilons, grid, eta=moll.eta, q=moll.q, horizon=moll.horizon,
        orders=moll.orders, nodes=moll.quadrature_nodes,
    )


def _parametrix_job(config: ExperimentConfig) -> Dict[str, Any]:
    field = _series_field(config)
    p = config.parametrix
    quad = _quadrature(config)
    h = (p.t - p.s) / p.steps[0] if p.mode != CONTINUOUS else None
    estimate = density_values(p.s, p.t, p.x, p.y_points, field, p.r_max, p.mode, h, quad)
    terms = engine_for(field, p.s, p.t, p.x, quad, p.mode, h).terms(p.y_points, p.r_max)
    mass = series_mass(p.s, p.t, p.x, field, p.r_max, p.mode, h, quad) if field.dim == 1 else None
    reference = None
    if p.reference_points:
        reference = density_values(p.s, p.t, p.x, p.reference_points, field, p.r_max, p.mode, h, quad)
    return {"estimate": estimate, "terms": terms.tolist(), "mass": mass, "reference": reference}


def _series_job(config: ExperimentConfig, steps: Optional[int], mode: str = DISCRETE) -> List[float]:
    field = _series_field(config)
    p = config.parametrix
    quad = _quadrature(config)
    if steps is None:
        return density_values(p.s, p.t, p.x, p.y_points, field, p.r_max, CONTINUOUS, None, quad).values
    h = (p.t - p.s) / steps
    return density_values(p.s, p.t, p.x, p.y_points, field, p.r_max, mode, h, quad).values


def _euler_kde_job(config: ExperimentConfig, steps: int) -> DensityEstimate:
    field = _series_field(config)
    p = config.parametrix
    grid = GridSchedule(p.t - p.s, steps)
    batch = simulate_batch(field, p.x, grid, config.m_paths, config.seed, store="terminal", config=INLINE)
    return kde_density(batch, p.y_points)


# ---------------------------------------------------------------------------
# Experiment kinds
# ---------------------------------------------------------------------------


def _run_weak_error(config: ExperimentConfig, field: CoefficientField, pool: JobPool, out: Artifacts) -> List[Check]:
    jobs = [
        Job("weak_error", (h,), _weak_error_job, {"config": config, "h": h}, config.seed)
        for h in config.grid.h_list
    ]
    results = pool.run(jobs)
    out.manifest.jobs.extend(_job_records(config, results))
    rows = flag_series([row for cell in _values(results) for row in cell])
    out.csv("sweep.csv", [r.csv_row() for r in rows], SWEEP_COLUMNS)
    primary = config.build_test_functions(field.dim)[0].label
    return _report_series(config, field, rows, primary, out)


def _report_series(
    config: ExperimentConfig, field: CoefficientField, rows: List[SweepRow], primary: str, out: Artifacts
) -> List[Check]:
    acc = config.acceptance
    fits = _fit_all(rows, out.manifest.notes)
    if fits:
        out.json("rate_fits.json", fits)
    fit = fits.get(primary)
    if fit is not None:
        out.json("rate_fit.json", fit)
    points = _series_points(rows).get(primary, [])
    if len(points) >= 2:
        gamma = field.gamma if field.regime is Regime.HOLDER else None
        out.plot("sweep.svg", points, fit, gamma, f"{config.name}: {primary}")
    checks = []
    if acc.max_abs_z is not None:
        checks.append(_check_z(rows, acc.max_abs_z, acc.abs_tol))
    if acc.min_slope is not None:
        checks.append(_check_slope(fit, acc.min_slope, primary))
    if acc.require_decreasing:
        checks.append(_check_decreasing(points, primary))
    if acc.max_bias_fraction is not None:
        series = [r for r in rows if r.test_function == primary and math.isfinite(r.error)]
        smallest = min((abs(r.error) for r in series), default=0.0)
        largest_bias = max((r.bias_bound or 0.0 for r in series), default=math.inf)
        checks.append(
            Check(
                name="max_bias_fraction",
                passed=bool(series) and largest_bias <= acc.max_bias_fraction * smallest,
                observed=largest_bias / smallest if smallest > 0.0 else None,
                detail=f"{primary}: KDE bias bound <= {acc.max_bias_fraction:g} x smallest error",
            )
        )
    return checks


def _run_density(config: ExperimentConfig, field: CoefficientField, pool: JobPool, out: Artifacts) -> List[Check]:
    d = config.density
    ys = as_points(d.y_points, field.dim)
    check_declared_distances(field, ys, d.y_distances)
    mode = DensityMode(d.mode)
    h_list = config.grid.h_list
    epsilons: Dict[float, Optional[float]] = {h: None for h in h_list}
    if mode is DensityMode.DECOMPOSITION:
        schedule = schedule_rows(h_list, config.grid.horizon, field.gamma)
        out.csv("epsilon_schedule.csv", [msgspec.structs.asdict(r) for r in schedule], ("h", "eta", "epsilon"))
        scheduled = {r.h: r.epsilon for r in schedule}
        eps = config.mollifier.epsilon
        epsilons = {h: scheduled[h] if eps == "schedule" else eps for h in h_list}
    jobs = [
        Job("density", (h,), _density_job, {"config": config, "h": h, "epsilon": epsilons[h]}, config.seed)
        for h in h_list
    ]
    results = pool.run(jobs)
    out.manifest.jobs.extend(_job_records(config, results))
    rows = flag_series([row for cell in _values(results) for row in cell])
    out.csv("sweep.csv", [r.csv_row() for r in rows], SWEEP_COLUMNS)
    primary = density_label(ys[0])
    if mode is DensityMode.DECOMPOSITION:
        primary += ":p-p_h"
    checks = _report_series(config, field, rows, primary, out)
    z = config.acceptance.max_component_z
    if z is not None and mode is DensityMode.DECOMPOSITION:
        for label, points in sorted(_series_points(rows).items()):
            if not label.endswith(":p-p_eps"):
                continue
            errors = [p.error for p in points]
            spread = max(errors) - min(errors)
            bound = z * max(p.stderr for p in points)
            checks.append(
                Check(
                    name="max_component_z",
                    passed=spread <= bound,
                    observed=spread,
                    detail=f"{label}: variation across h <= {z:g} x stderr ({bound:.3e})",
                )
            )
    return checks


def _scan_quantity(field: CoefficientField, kind: str) -> str:
    holder = field.regime is Regime.HOLDER
    if kind == "deviation":
        return "delta_sigma" if holder else "delta_b"
    return "deriv1_sigma_ratio" if holder else "deriv1_drift_ratio"


def _run_mollifier_scan(config: ExperimentConfig, field: CoefficientField, pool: JobPool, out: Artifacts) -> List[Check]:
    results = pool.run([Job("mollifier_scan", ("scan",), _scan_job, {"config": config}, config.seed)])
    out.manifest.jobs.extend(_job_records(config, results))
    values = _values(results)
    rows = sorted(values[0] if values else [], key=lambda r: (r.quantity, -r.epsilon))
    out.csv("scan.csv", [msgspec.structs.asdict(r) for r in rows], ("epsilon", "quantity", "value"))
    acc = config.acceptance
    by_quantity: Dict[str, List[Any]] = {}
    for r in rows:
        by_quantity.setdefault(r.quantity, []).append(r)
    checks = []
    if acc.ratio_range is not None:
        # largest radius over smallest radius
        q = _scan_quantity(field, "deviation")
        levels = sorted(by_quantity.get(q, []), key=lambda r: -r.epsilon)
        span = [levels[0].value / levels[-1].value] if len(levels) >= 2 and levels[-1].value > 0.0 else []
        checks.append(_range_check("ratio_range", span, acc.ratio_range, f"{q} ratio over the eps range"))
    if acc.deriv_ratio_range is not None:
        q = _scan_quantity(field, "derivative")
        checks.append(_range_check("deriv_ratio_range", [r.value for r in by_quantity.get(q, [])], acc.deriv_ratio_range, q))
    if acc.lq_ratio_tolerance is not None:
        levels = sorted(by_quantity.get("lq_deviation", []), key=lambda r: -r.epsilon)
        q = config.mollifier.q
        worst, passed = 0.0, len(levels) >= 2
        for a, b in zip(levels, levels[1:]):
            expected = (a.epsilon / b.epsilon) ** (1.0 / q)
            miss = abs((a.value / b.value) / expected - 1.0) if b.value > 0.0 else math.inf
            worst = max(worst, miss)
            passed = passed and miss <= acc.lq_ratio_tolerance
        checks.append(
            Check(
                name="lq_ratio_tolerance",
                passed=passed,
                observed=worst,
                detail=f"L^{q:g} deviation ratio within {acc.lq_ratio_tolerance:g} of (eps ratio)^(1/q)",
            )
        )
    return checks


def _oracle(config: ExperimentConfig, field: CoefficientField, ys: np.ndarray) -> Optional[np.ndarray]:
    p = config.parametrix
    if p.oracle is None:
        return None
    if p.oracle == "ou":
        theta = float(field.params.get("theta", 1.0))
        sigma = float(field.params.get("sigma", 1.0))
        return np.array([float(np.prod(ou_density(p.s, p.t, p.x, y, theta, sigma))) for y in ys])
    x = np.asarray(p.x, dtype=float)
    dt = p.t - p.s
    mean = x + field.drift(p.s, x)[0] * dt
    cov = field.diffusion(p.s, x)[0] * dt
    return np.atleast_1d(stats.multivariate_normal(mean=mean, cov=cov).pdf(ys))


def _reference_errors(
    config: ExperimentConfig, field: CoefficientField, estimate: Optional[DensityEstimate], notes: List[str]
) -> Optional[List[float]]:
    """Relative oracle errors at the points kept out of the acceptance set, one manifest note each."""
    if estimate is None:
        return None
    ys = as_points(estimate.points, field.dim)
    oracle = _oracle(config, field, ys)
    if oracle is None:
        return None
    rel = np.abs(np.asarray(estimate.values) - oracle) / np.abs(oracle)
    for y, e in zip(ys, rel):
        notes.append(
            f"reference point {density_label(y)}: relative error {e:.3g} "
            f"against the {config.parametrix.oracle} density (not checked)"
        )
    return rel.tolist()


def _run_parametrix(config: ExperimentConfig, field: CoefficientField, pool: JobPool, out: Artifacts) -> List[Check]:
    p = config.parametrix
    results = pool.run([Job("parametrix", ("series",), _parametrix_job, {"config": config}, None)])
    out.manifest.jobs.extend(_job_records(config, results))
    values = _values(results)
    if not values:
        return []
    estimate, terms, mass = values[0]["estimate"], np.asarray(values[0]["terms"]), values[0]["mass"]
    ys = as_points(p.y_points, field.dim)
    oracle = _oracle(config, field, ys)
    rows = estimate.csv_rows()
    columns = list(rows[0].keys()) + (["oracle", "rel_error"] if oracle is not None else [])
    rel = None
    if oracle is not None:
        rel = np.abs(np.asarray(estimate.values) - oracle) / np.abs(oracle)
        for row, o, e in zip(rows, oracle, rel):
            row.update({"oracle": float(o), "rel_error": float(e)})
    out.csv("density.csv", rows, columns)
    term_rows = []
    for r in range(terms.shape[0]):
        for y, v in zip(ys, terms[r]):
            row = {f"y{k}": float(c) for k, c in enumerate(y)}
            row.update({"r": r, "term": float(v)})
            term_rows.append(row)
    out.csv("terms.csv", term_rows, [f"y{k}" for k in range(field.dim)] + ["r", "term"])
    dt = p.t - p.s
    magnitudes = np.max(np.abs(terms), axis=1)
    decay = term_decay_check(magnitudes, dt, field.gamma, p.t)
    dy = ys - np.asarray(p.x, dtype=float)
    envelope_c, envelope_rate = aronson_envelope(np.abs(estimate.values), dt, dy)
    reference = _reference_errors(config, field, values[0]["reference"], out.manifest.notes)
    out.json(
        "parametrix_summary.json",
        {
            "model": field.name,
            "magnitudes": magnitudes.tolist(),
            "decay": decay,
            "aronson": {"C": envelope_c, "c": envelope_rate},
            "mass": mass,
            "max_rel_error": None if rel is None else float(rel.max()),
            "reference_rel_error": reference,
        },
    )
    acc = config.acceptance
    checks = []
    if acc.rel_tol is not None:
        if rel is None:
            checks.append(Check(name="rel_tol", passed=False, detail="no oracle configured"))
        else:
            checks.append(
                Check(name="rel_tol", passed=float(rel.max()) <= acc.rel_tol, observed=float(rel.max()),
                      detail=f"relative error against the {p.oracle} density <= {acc.rel_tol:g}")
            )
    if acc.max_higher_term is not None:
        worst = float(magnitudes[1:].max()) if magnitudes.size > 1 else 0.0
        checks.append(
            Check(name="max_higher_term", passed=worst <= acc.max_higher_term, observed=worst,
                  detail=f"|T_r| <= {acc.max_higher_term:g} for r >= 1")
        )
    if acc.require_term_decay:
        checks.append(
            Check(name="require_term_decay", passed=bool(decay) and all(c.passed for c in decay),
                  observed=float(len([c for c in decay if not c.passed])),
                  detail="sup-norm term magnitudes under the fitted geometric-gamma bound")
        )
    return checks


def _run_discrete_gap(config: ExperimentConfig, field: CoefficientField, pool: JobPool, out: Artifacts) -> List[Check]:
    p = config.parametrix
    jobs = [Job("series", ("continuous", 0), _series_job, {"config": config, "steps": None}, None)]
    jobs += [Job("series", ("discrete", n), _series_job, {"config": config, "steps": n}, None) for n in p.steps]
    if p.euler_leg:
        jobs += [
            Job("series", ("euler", n), _series_job, {"config": config, "steps": n, "mode": EULER}, None)
            for n in p.steps
        ]
        jobs += [Job("kde", ("kde", n), _euler_kde_job, {"config": config, "steps": n}, config.seed) for n in p.steps]
    results = pool.run(jobs)
    out.manifest.jobs.extend(_job_records(config, results))
    ys = as_points(p.y_points, field.dim)
    cont = results.get(("continuous", 0))
    if cont is None or not cont.ok:
        return [Check(name="require_monotone_gap", passed=False, detail="continuous series failed")]
    rows, gaps = [], {}
    for n in sorted(p.steps):
        res = results[("discrete", n)]
        if not res.ok:
            continue
        h = (p.t - p.s) / n
        for k, (y, c, v) in enumerate(zip(ys, cont.value, res.value)):
            row = {f"y{i}": float(coord) for i, coord in enumerate(y)}
            row.update({"h": h, "continuous": c, "discrete": v, "gap": abs(c - v)})
            rows.append(row)
            gaps.setdefault(k, []).append(RatePoint(h=h, error=abs(c - v)))
    out.csv("gap.csv", rows, ["h"] + [f"y{i}" for i in range(field.dim)] + ["continuous", "discrete", "gap"])
    label = density_label(ys[0])
    first = gaps.get(0, [])
    fit = _fit(first, label, out.manifest.notes) if len(first) >= 2 else None
    if fit is not None:
        out.json("rate_fit.json", fit)
    if len(first) >= 2:
        out.plot("gap.svg", first, fit, field.gamma if field.regime is Regime.HOLDER else None, f"{config.name}: {label}")
    checks = []
    if config.acceptance.require_monotone_gap:
        for k, points in sorted(gaps.items()):
            seq = [pt.error for pt in points]
            checks.append(
                Check(
                    name="require_monotone_gap",
                    passed=len(seq) >= 2 and all(b < a for a, b in zip(seq, seq[1:])),
                    observed=seq[-1] if seq else None,
                    detail=f"{density_label(ys[k])}: |continuous - discrete| decreases as h shrinks",
                )
            )
    if p.euler_leg:
        checks += _euler_leg(config, field, ys, cont.value, results, out)
    return checks


def _euler_leg(
    config: ExperimentConfig,
    field: CoefficientField,
    ys: np.ndarray,
    continuous: Sequence[float],
    results: Dict[Any, JobResult],
    out: Artifacts,
) -> List[Check]:
    """Euler-chain series p^h against a KDE of Euler paths on the same grid."""
    p = config.parametrix
    rows, worst, complete = [], 0.0, True
    for n in sorted(p.steps):
        series, kde = results[("euler", n)], results[("kde", n)]
        if not (series.ok and kde.ok):
            complete = False
            continue
        h = (p.t - p.s) / n
        est = kde.value
        for k, y in enumerate(ys):
            diff = abs(series.value[k] - est.values[k])
            z = max(diff - est.bias_bound[k], 0.0) / est.stderr[k] if est.stderr[k] > 0.0 else math.inf
            worst = max(worst, z)
            row = {f"y{i}": float(coord) for i, coord in enumerate(y)}
            row.update(
                {
                    "h": h,
                    "euler_series": series.value[k],
                    "kde": est.values[k],
                    "stderr": est.stderr[k],
                    "bias_bound": est.bias_bound[k],
                    "z": z,
                    "continuous_gap": abs(continuous[k] - series.value[k]),
                }
            )
            rows.append(row)
    columns = ["h"] + [f"y{i}" for i in range(field.dim)]
    out.csv("euler.csv", rows, columns + ["euler_series", "kde", "stderr", "bias_bound", "z", "continuous_gap"])
    z_max = config.acceptance.max_euler_z
    if z_max is None:
        return []
    return [
        Check(
            name="max_euler_z",
            passed=complete and bool(rows) and worst <= z_max,
            observed=worst,
            detail=f"|p^h series - KDE| <= {z_max:g} stderr + bias bound",
        )
    ]


_RUNNERS: Dict[str, Callable[[ExperimentConfig, CoefficientField, JobPool, Artifacts], List[Check]]] = {
    "weak_error_sweep": _run_weak_error,
    "density_sweep": _run_density,
    "mollifier_scan": _run_mollifier_scan,
    "parametrix_check": _run_parametrix,
    "discrete_gap": _run_discrete_gap,
}


def run_experiment(
    config: Union[str, Path, ExperimentConfig],
    out_dir: Optional[Union[str, Path]] = None,
    jobs: int = 1,
    job_logger: Optional[JobLogger] = None,
) -> RunResult:
    """Run one experiment and write its artifacts.

    Exit codes: 0 all checks passed, 1 an acceptance threshold was missed, 3 a job
    failed numerically. Invalid configs raise ConfigurationError before anything is written.
    """
    if not isinstance(config, ExperimentConfig):
        config = load_config(config)
    field = check_config(config)
    out_path = Path(out_dir or config.output_dir or Path("runs") / config.name)
    out_path.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(
        name=config.name,
        kind=config.kind,
        config_hash=config_hash(config),
        tool_version=tool_version(),
        started=utc_now(),
    )
    artifacts = Artifacts(out_path, manifest)
    logger.info("running %s (%s) into %s with %d worker(s)", config.name, config.kind, out_path, jobs)
    checks = _RUNNERS[config.kind](config, field, JobPool(jobs, job_logger), artifacts)
    if checks:
        artifacts.json("acceptance.json", {"passed": all(c.passed for c in checks), "checks": checks})
    failed = [j for j in manifest.jobs if j.status != "ok"]
    if failed:
        exit_code = EXIT_FAULT
    elif not all(c.passed for c in checks):
        exit_code = EXIT_ACCEPTANCE
        for c in checks:
            if not c.passed:
                logger.warning("acceptance miss in %s: %s (%s)", config.name, c.name, c.detail)
    else:
        exit_code = EXIT_OK
    manifest.finished = utc_now()
    manifest.exit_code = exit_code
    manifest.write(out_path)
    return RunResult(exit_code=exit_code, out_dir=out_path, manifest=manifest, checks=checks)
