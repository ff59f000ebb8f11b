# Continuous Euler scheme between grid nodes, with the Brownian value drawn from the bridge.

import numpy as np

from ..coefficients import CoefficientField
from ..exceptions import ArgumentError
from ._batch import TrajectoryBatch, replay_states
from ._rng import LANE_BRIDGE, blocks, normals


def _time_word(s: float) -> int:
    return int(np.float64(s).view(np.uint64))


def continuous_interpolate(batch: TrajectoryBatch, s: float, field: CoefficientField) -> np.ndarray:
    """X_s = X_{t_i} + b(t_i, X_{t_i})(s - t_i) + sigma(t_i, X_{t_i})(W_s - W_{t_i}) for t_i <= s < t_{i+1}.

    Given the step increment dW, W_s - W_{t_i} = (u/h) dW + sqrt(u (h - u) / h) xi with
    u = s - t_i and xi standard normal, drawn from a stream addressed by (step, s).
    """
    grid = batch.grid
    s = float(s)
    if not 0.0 <= s <= grid.horizon:
        raise ArgumentError(f"time {s} outside [0, {grid.horizon}]", context={"s": s})
    i = grid.floor_index(s)
    if i == grid.steps:
        return batch.terminal.copy()
    base = replay_states(batch, field, i)
    t_i = grid.time(i)
    if s == t_i:
        return base.copy()

    h, u = grid.h, s - t_i
    out = np.empty_like(base)
    for b, start, size in blocks(batch.m_paths):
        rows = slice(start, start + size)
        dw = batch.block_increments(b, start, size)[:, i]
        xi = normals(batch.seed, b, i, LANE_BRIDGE, (size, batch.dim), level=_time_word(s))
        w = (u / h) * dw + np.sqrt(u * (h - u) / h) * xi
        x = base[rows]
        out[rows] = x + field.drift(t_i, x) * u + np.einsum("nij,nj->ni", field.sigma(t_i, x), w)
    return out
