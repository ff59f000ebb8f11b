# Uniform time grid t_i = i h on [0, T].

import math
from dataclasses import dataclass

import numpy as np

from ..exceptions import ArgumentError, ConfigurationError


@dataclass(frozen=True)
class GridSchedule:
    """N steps of size h = T / N; the last node is T exactly."""

    horizon: float
    steps: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.horizon) and self.horizon > 0.0):
            raise ConfigurationError(f"horizon must be positive and finite, got {self.horizon}")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ConfigurationError(f"step count must be an integer >= 1, got {self.steps}")
        object.__setattr__(self, "steps", int(self.steps))

    @property
    def h(self) -> float:
        return self.horizon / self.steps

    def time(self, i: int) -> float:
        return self.horizon if i == self.steps else i * self.h

    def times(self) -> np.ndarray:
        out = np.arange(self.steps + 1) * self.h
        out[-1] = self.horizon
        return out

    def floor_index(self, s: float) -> int:
        """Index i with t_i <= s < t_{i+1} (N at s = T)."""
        if not 0.0 <= s <= self.horizon:
            raise ArgumentError(f"time {s} outside [0, {self.horizon}]")
        if s == self.horizon:
            return self.steps
        i = min(int(s / self.h), self.steps - 1)
        # guard against rounding of s / h at grid nodes
        if self.time(i) > s:
            i -= 1
        elif self.time(i + 1) <= s:
            i += 1
        return i

    def refine(self, factor: int) -> "GridSchedule":
        return GridSchedule(self.horizon, self.steps * int(factor))
