# Brownian refinement of coarse increments and coupled multi-leg Euler runs on one noise path.

import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..coefficients import CoefficientField
from ..exceptions import ArgumentError, ConfigurationError, MemoryBudgetError
from ..models import Struct
from ._batch import (
    DEFAULT_CONFIG,
    SimulationConfig,
    TrajectoryBatch,
    as_start,
    check_finite,
    coarse_increments,
    euler_step,
)
from ._grid import GridSchedule
from ._rng import LANE_REFINE, blocks, check_seed, normals

logger = logging.getLogger(__name__)


def split_increment(dw: np.ndarray, factor: int, h: float, seed: int, block: int, step: int, level: int) -> np.ndarray:
    """Split (n, d) increments over a step of length h into (n, factor, d) bridge pieces.

    Pieces are Z_j - (sum Z - dW) / factor with Z_j ~ N(0, h / factor): they sum to dW
    and have the law of the Brownian increments given the endpoint.
    """
    n, d = dw.shape
    z = np.sqrt(h / factor) * normals(seed, block, step, LANE_REFINE, (n, factor, d), level=level)
    return z - ((z.sum(axis=1) - dw) / factor)[:, None, :]


def _check_refinement(steps: int, factor: int, config: SimulationConfig) -> None:
    if int(factor) != factor or factor < 1:
        raise ConfigurationError(f"refinement factor must be a positive integer, got {factor}")
    if steps * factor > config.max_fine_steps:
        raise ConfigurationError(
            f"fine grid of {steps * factor} steps exceeds {config.max_fine_steps}",
            context={"steps": steps, "factor": factor},
        )


def refine_increments(
    increments: np.ndarray,
    h: float,
    seed: int,
    factor: int,
    level: int = 1,
    config: Optional[SimulationConfig] = None,
) -> np.ndarray:
    """Refine (M, N, d) increments on steps of length h into (M, N * factor, d)."""
    config = config or DEFAULT_CONFIG
    m, n, d = increments.shape
    if factor < 2:
        raise ArgumentError(f"refinement factor must be >= 2, got {factor}")
    _check_refinement(n, factor, config)
    requested = 8 * m * n * factor * d
    if requested > config.memory_budget_bytes:
        raise MemoryBudgetError(requested, config.memory_budget_bytes)
    out = np.empty((m, n * factor, d))
    for b, start, size in blocks(m):
        rows = slice(start, start + size)
        for i in range(n):
            out[rows, i * factor : (i + 1) * factor] = split_increment(
                increments[rows, i], factor, h, seed, b, i, level
            )
    return out


def refine_common_noise(
    batch: TrajectoryBatch, refinement_factor: int, config: Optional[SimulationConfig] = None
) -> np.ndarray:
    """Fine-grid increments whose per-coarse-step sums reproduce ``batch``'s increments."""
    config = config or DEFAULT_CONFIG
    if refinement_factor < 2:
        raise ArgumentError(f"refinement factor must be >= 2, got {refinement_factor}")
    _check_refinement(batch.grid.steps, refinement_factor, config)
    requested = 8 * batch.m_paths * batch.grid.steps * refinement_factor * batch.dim
    if requested > config.memory_budget_bytes:
        raise MemoryBudgetError(requested, config.memory_budget_bytes)
    return refine_increments(batch.all_increments(), batch.grid.h, batch.seed, refinement_factor, config=config)


Leg = Tuple[CoefficientField, int]


def _coupled_block(
    legs: Sequence[Leg],
    x0: np.ndarray,
    grid: GridSchedule,
    refinement: int,
    seed: int,
    block: int,
    start: int,
    size: int,
) -> Tuple[int, np.ndarray]:
    d = x0.size
    h = grid.h
    states = [np.tile(x0, (size, 1)) for _ in legs]
    for i in range(grid.steps):
        dw = coarse_increments(seed, block, i, size, d, h)
        fine = split_increment(dw, refinement, h, seed, block, i, 1) if refinement > 1 else None
        t_i = grid.time(i)
        for k, (field, substeps) in enumerate(legs):
            x = states[k]
            if substeps == 1:
                x = euler_step(field, t_i, x, h, dw)
            else:
                group = refinement // substeps
                dt = grid.horizon / (grid.steps * substeps)
                pieces = fine.reshape(size, substeps, group, d).sum(axis=2) if group > 1 else fine
                for j in range(substeps):
                    x = euler_step(field, (i * substeps + j) * dt, x, dt, pieces[:, j])
            check_finite(x, start, i + 1, leg=k, model=field.name)
            states[k] = x
    return block, np.stack(states)


def coupled_terminal_states(
    legs: Sequence[Leg],
    x0: Any,
    grid: GridSchedule,
    m: int,
    seed: int,
    refinement: int = 1,
    config: Optional[SimulationConfig] = None,
) -> np.ndarray:
    """Terminal states (legs, M, d) of Euler legs sharing one Brownian path.

    Each leg is ``(field, substeps)`` and runs with step h / substeps on sums of the
    refined increments; a leg with one sub-step uses the coarse increments and matches
    :func:`simulate_batch` bit for bit, and a leg with ``refinement`` sub-steps matches an
    Euler run on :func:`refine_common_noise` output.
    """
    config = config or DEFAULT_CONFIG
    if not legs:
        raise ArgumentError("at least one leg is required")
    _check_refinement(grid.steps, refinement, config)
    for field, substeps in legs:
        if substeps < 1 or refinement % substeps:
            raise ArgumentError(f"sub-step count {substeps} does not divide the refinement {refinement}")
    dims = {field.dim for field, _ in legs}
    if len(dims) != 1:
        raise ArgumentError(f"legs of mixed dimensions {sorted(dims)}")
    seed = check_seed(seed)
    m = int(m)
    start = as_start(x0, dims.pop())
    legs = [(field, int(substeps)) for field, substeps in legs]
    tasks = [(legs, start, grid, refinement, seed, b, s, n) for b, s, n in blocks(m)]
    results: Dict[int, np.ndarray] = {}
    if config.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as executor:
            futures = [executor.submit(_coupled_block, *task) for task in tasks]
            for future in as_completed(futures):
                block, value = future.result()
                results[block] = value
    else:
        for task in tasks:
            block, value = _coupled_block(*task)
            results[block] = value
    logger.debug(
        "coupled %d leg(s) over %d paths, %d steps x %d", len(legs), m, grid.steps, refinement
    )
    return np.concatenate([results[b] for b in sorted(results)], axis=1)


def run_on_increments(
    field: CoefficientField, x0: Any, grid: GridSchedule, increments: np.ndarray
) -> np.ndarray:
    """Terminal states of the Euler scheme driven by given (M, N, d) increments on ``grid``."""
    m, n, d = increments.shape
    if n != grid.steps:
        raise ArgumentError(f"{n} increments per path for a grid of {grid.steps} steps")
    x = np.tile(as_start(x0, field.dim), (m, 1))
    for i in range(n):
        x = euler_step(field, grid.time(i), x, grid.h, increments[:, i])
        check_finite(x, 0, i + 1, model=field.name)
    return x


class StrongError(Struct):
    value: float
    stderr: float
    m_paths: int


def strong_error(coarse: np.ndarray, fine: np.ndarray) -> StrongError:
    """Mean |X_T^coarse - X_T^fine| over coupled paths, with its standard error."""
    coarse = np.asarray(coarse, dtype=float)
    fine = np.asarray(fine, dtype=float)
    if coarse.shape != fine.shape:
        raise ArgumentError(f"terminal shapes differ: {coarse.shape} vs {fine.shape}")
    gap = np.linalg.norm(coarse.reshape(coarse.shape[0], -1) - fine.reshape(fine.shape[0], -1), axis=1)
    m = gap.size
    stderr = float(gap.std(ddof=1) / np.sqrt(m)) if m > 1 else 0.0
    return StrongError(value=float(gap.mean()), stderr=stderr, m_paths=m)
