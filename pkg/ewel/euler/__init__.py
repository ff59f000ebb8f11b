"""Euler scheme simulation, Brownian refinement and continuous interpolation."""

from ._batch import (
    SimulationConfig,
    TrajectoryBatch,
    batch_bytes,
    batch_summary_rows,
    euler_step,
    replay_states,
    simulate_batch,
)
from ._grid import GridSchedule
from ._interpolate import continuous_interpolate
from ._io import dump_batch, load_batch
from ._refine import (
    Leg,
    StrongError,
    coupled_terminal_states,
    refine_common_noise,
    refine_increments,
    run_on_increments,
    split_increment,
    strong_error,
)
from ._rng import LANE_BRIDGE, LANE_COARSE, LANE_REFINE, PATH_BLOCK, normals

__all__ = [
    "SimulationConfig",
    "TrajectoryBatch",
    "batch_bytes",
    "batch_summary_rows",
    "euler_step",
    "replay_states",
    "simulate_batch",
    "GridSchedule",
    "continuous_interpolate",
    "dump_batch",
    "load_batch",
    "Leg",
    "StrongError",
    "coupled_terminal_states",
    "refine_common_noise",
    "refine_increments",
    "run_on_increments",
    "split_increment",
    "strong_error",
    "LANE_BRIDGE",
    "LANE_COARSE",
    "LANE_REFINE",
    "PATH_BLOCK",
    "normals",
]
