# Raw batch dump: little-endian header (magic, version, M, N, d, seed) then f64 states.

import struct
from pathlib import Path
from typing import Union

import numpy as np

from ..exceptions import ArgumentError, ConfigurationError
from ._batch import TrajectoryBatch
from ._grid import GridSchedule

MAGIC = b"EWEL"
VERSION = 1
HEADER = struct.Struct("<4sIQQIQ")


def dump_batch(batch: TrajectoryBatch, path: Union[str, Path]) -> Path:
    if batch.states is None:
        raise ArgumentError(
            "batch keeps terminal states only; simulate with store='full' to dump it",
            context={"m_paths": batch.m_paths, "steps": batch.grid.steps},
        )
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(HEADER.pack(MAGIC, VERSION, batch.m_paths, batch.grid.steps, batch.dim, batch.seed))
        fh.write(np.ascontiguousarray(batch.states, dtype="<f8").tobytes())
    return path


def load_batch(path: Union[str, Path], horizon: float) -> TrajectoryBatch:
    """Read a dump back; increments are regenerated from the seed when needed."""
    raw = Path(path).read_bytes()
    if len(raw) < HEADER.size:
        raise ConfigurationError(f"{path}: truncated batch header")
    magic, version, m, n, d, seed = HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ConfigurationError(f"{path}: not an ewel batch (magic {magic!r})")
    if version != VERSION:
        raise ConfigurationError(f"{path}: unsupported batch version {version}")
    expected = m * (n + 1) * d * 8
    body = raw[HEADER.size :]
    if len(body) != expected:
        raise ConfigurationError(f"{path}: expected {expected} bytes of states, found {len(body)}")
    states = np.frombuffer(body, dtype="<f8").astype(float).reshape(m, n + 1, d)
    return TrajectoryBatch(
        grid=GridSchedule(horizon, n),
        m_paths=m,
        seed=seed,
        x0=states[0, 0].copy(),
        terminal=states[:, -1].copy(),
        states=states,
    )
