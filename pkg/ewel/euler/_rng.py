# Counter-based normal streams keyed by (seed, path block) and addressed by (step, level, lane).

import numpy as np

from ..exceptions import ConfigurationError

PATH_BLOCK = 4096

LANE_COARSE = 0
LANE_REFINE = 1
LANE_BRIDGE = 7

_U64 = (1 << 64) - 1


def check_seed(seed: int) -> int:
    if int(seed) != seed or not 0 <= int(seed) <= _U64:
        raise ConfigurationError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return int(seed)


def block_key(seed: int, block: int) -> np.ndarray:
    return np.random.SeedSequence([check_seed(seed), int(block)]).generate_state(2, dtype=np.uint64)


def normals(seed: int, block: int, step: int, lane: int, shape, level: int = 0) -> np.ndarray:
    """Standard normals for one (block, step, level, lane) cell; independent of any other cell.

    The first counter word is left to Philox for the draws within the cell.
    """
    counter = np.array([0, step, level, lane], dtype=np.uint64)
    bitgen = np.random.Philox(counter=counter, key=block_key(seed, block))
    return np.random.Generator(bitgen).standard_normal(shape)


def blocks(m_paths: int):
    """(block index, first path, block size) covering ``m_paths`` paths."""
    for b, start in enumerate(range(0, m_paths, PATH_BLOCK)):
        yield b, start, min(PATH_BLOCK, m_paths - start)
