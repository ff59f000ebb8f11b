# Euler scheme on batches of paths, with replayable increments.

import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field as dc_field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ..coefficients import CoefficientField
from ..exceptions import ArgumentError, NumericalFault
from ._grid import GridSchedule
from ._rng import LANE_COARSE, blocks, check_seed, normals

logger = logging.getLogger(__name__)


@dataclass
class SimulationConfig:
    """Tunables of the simulation core."""

    memory_budget_bytes: int = 256 * 1024 * 1024
    max_fine_steps: int = 1 << 24
    jobs: int = 1


DEFAULT_CONFIG = SimulationConfig()


def as_start(x0: Any, dim: int) -> np.ndarray:
    start = np.asarray(x0, dtype=float).reshape(-1)
    if start.size == 1 and dim > 1:
        start = np.full(dim, float(start[0]))
    if start.shape != (dim,):
        raise ArgumentError(f"starting point of shape {start.shape} for dim={dim}")
    return start


def coarse_increments(seed: int, block: int, step: int, size: int, dim: int, h: float) -> np.ndarray:
    return np.sqrt(h) * normals(seed, block, step, LANE_COARSE, (size, dim))


def euler_step(field: CoefficientField, t: float, x: np.ndarray, dt: float, dw: np.ndarray) -> np.ndarray:
    """x + b(t, x) dt + sigma(t, x) dW for a block of states."""
    return x + field.drift(t, x) * dt + np.einsum("nij,nj->ni", field.sigma(t, x), dw)


def check_finite(x: np.ndarray, first_path: int, step: int, **context: Any) -> None:
    bad = ~np.all(np.isfinite(x), axis=1)
    if bad.any():
        path = first_path + int(np.argmax(bad))
        raise NumericalFault(
            f"non-finite state on path {path} at step {step}",
            context=dict(context, path=path, step=step),
        )


@dataclass
class TrajectoryBatch:
    """M Euler paths on ``grid`` started at ``x0``.

    ``states`` (M, N+1, d) and ``increments`` (M, N, d) are kept when they fit the memory
    budget; otherwise only ``terminal`` is stored and increments are regenerated from the
    seed on demand.
    """

    grid: GridSchedule
    m_paths: int
    seed: int
    x0: np.ndarray
    terminal: np.ndarray
    states: Optional[np.ndarray] = None
    increments: Optional[np.ndarray] = None
    model: str = ""
    extra: Dict[str, Any] = dc_field(default_factory=dict)

    @property
    def dim(self) -> int:
        return int(self.x0.size)

    @property
    def stored(self) -> bool:
        return self.states is not None

    def block_increments(self, block: int, start: int, size: int) -> np.ndarray:
        """Coarse increments (size, N, d) of one path block, stored or regenerated."""
        if self.increments is not None:
            return self.increments[start : start + size]
        h, d = self.grid.h, self.dim
        return np.stack(
            [coarse_increments(self.seed, block, i, size, d, h) for i in range(self.grid.steps)], axis=1
        )

    def all_increments(self) -> np.ndarray:
        if self.increments is not None:
            return self.increments
        return np.concatenate([self.block_increments(b, s, n) for b, s, n in blocks(self.m_paths)], axis=0)


def _simulate_block(
    field: CoefficientField,
    x0: np.ndarray,
    grid: GridSchedule,
    seed: int,
    block: int,
    start: int,
    size: int,
    keep: bool,
) -> Tuple[int, np.ndarray, Optional[np.ndarray], Optional[np.ndarray]]:
    d = x0.size
    h = grid.h
    x = np.tile(x0, (size, 1))
    states = incs = None
    if keep:
        states = np.empty((size, grid.steps + 1, d))
        incs = np.empty((size, grid.steps, d))
        states[:, 0] = x
    for i in range(grid.steps):
        dw = coarse_increments(seed, block, i, size, d, h)
        x = euler_step(field, grid.time(i), x, h, dw)
        check_finite(x, start, i + 1, model=field.name)
        if keep:
            states[:, i + 1] = x
            incs[:, i] = dw
    return block, x, states, incs


def batch_bytes(m_paths: int, steps: int, dim: int) -> int:
    return 8 * m_paths * (2 * steps + 1) * dim


def simulate_batch(
    field: CoefficientField,
    x0: Any,
    grid: GridSchedule,
    m: int,
    seed: int,
    store: str = "auto",
    config: Optional[SimulationConfig] = None,
) -> TrajectoryBatch:
    """Run the Euler scheme for ``m`` paths.

    The result depends only on (seed, field, x0, grid, m): paths are split into fixed
    blocks with their own counter streams, so any worker count gives the same bits.
    """
    config = config or DEFAULT_CONFIG
    if int(m) != m or m < 1:
        raise ArgumentError(f"path count must be >= 1, got {m}")
    if store not in ("auto", "full", "terminal"):
        raise ArgumentError(f"store must be 'auto', 'full' or 'terminal', got {store!r}")
    m = int(m)
    seed = check_seed(seed)
    start = as_start(x0, field.dim)
    size = batch_bytes(m, grid.steps, field.dim)
    keep = store == "full" or (store == "auto" and size <= config.memory_budget_bytes)
    if store == "auto" and not keep:
        logger.debug("batch of %d bytes exceeds budget; keeping terminal states only", size)

    tasks = [(field, start, grid, seed, b, s, n, keep) for b, s, n in blocks(m)]
    results: Dict[int, Any] = {}
    if config.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as executor:
            futures = [executor.submit(_simulate_block, *task) for task in tasks]
            for future in as_completed(futures):
                block, *rest = future.result()
                results[block] = rest
    else:
        for task in tasks:
            block, *rest = _simulate_block(*task)
            results[block] = rest

    ordered = [results[b] for b in sorted(results)]
    terminal = np.concatenate([r[0] for r in ordered], axis=0)
    states = np.concatenate([r[1] for r in ordered], axis=0) if keep else None
    incs = np.concatenate([r[2] for r in ordered], axis=0) if keep else None
    logger.debug("simulated %d paths of %s on %d steps", m, field.name, grid.steps)
    return TrajectoryBatch(
        grid=grid,
        m_paths=m,
        seed=seed,
        x0=start,
        terminal=terminal,
        states=states,
        increments=incs,
        model=field.name,
    )


def replay_states(batch: TrajectoryBatch, field: CoefficientField, upto: int) -> np.ndarray:
    """States at step ``upto`` recomputed from the seed (identical to a stored run)."""
    if batch.states is not None:
        return batch.states[:, upto]
    out = []
    h, d = batch.grid.h, batch.dim
    for b, s, n in blocks(batch.m_paths):
        x = np.tile(batch.x0, (n, 1))
        for i in range(upto):
            x = euler_step(field, batch.grid.time(i), x, h, coarse_increments(batch.seed, b, i, n, d, h))
        out.append(x)
    return np.concatenate(out, axis=0)


def batch_summary_rows(batch: TrajectoryBatch) -> List[Dict[str, Any]]:
    """One CSV row: seed, M, N and per-coordinate terminal mean and variance."""
    row: Dict[str, Any] = {
        "model": batch.model,
        "seed": batch.seed,
        "m_paths": batch.m_paths,
        "steps": batch.grid.steps,
    }
    mean = batch.terminal.mean(axis=0)
    var = batch.terminal.var(axis=0, ddof=1) if batch.m_paths > 1 else np.zeros(batch.dim)
    for k in range(batch.dim):
        row[f"mean_{k}"] = float(mean[k])
        row[f"var_{k}"] = float(var[k])
    return [row]
