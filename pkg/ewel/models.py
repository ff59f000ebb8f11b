"""msgspec Struct + orjson-powered JSON encoding for result records."""

import math
from typing import Any, Dict, Optional

import msgspec
import numpy as np
import orjson
from msgspec import Struct

__all__ = ["Struct", "DensityEstimate", "encode_json", "to_builtins"]


def _orjson_default(obj: Any) -> Any:
    """Default function for orjson to serialize types it doesn't support natively."""
    if isinstance(obj, Struct):
        return msgspec.to_builtins(obj)
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"Object of type {type(obj)} is not JSON serializable")


# Sorted keys and fixed indentation keep result files byte-stable across runs.
_ORJSON_OPTS = orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY


def to_builtins(obj: Any) -> Any:
    """Convert Structs (recursively) into plain dicts/lists, mapping non-finite floats to None."""
    return _finite(msgspec.to_builtins(obj))


def _finite(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _finite(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_finite(v) for v in value]
    return value


def encode_json(obj: Any, option: Optional[int] = None) -> bytes:
    if isinstance(obj, Struct):
        obj = to_builtins(obj)
    return orjson.dumps(obj, default=_orjson_default, option=option or _ORJSON_OPTS)


class DensityEstimate(Struct):
    """Transition-density values at ``points`` from (s, x), tagged by how they were computed."""

    method: str
    s: float
    t: float
    x: list
    points: list
    values: list
    tail_estimate: Optional[list] = None
    r_max: Optional[int] = None
    bandwidth: Optional[list] = None
    bias_bound: Optional[list] = None
    stderr: Optional[list] = None

    def csv_rows(self) -> list:
        rows = []
        tails = self.tail_estimate or [None] * len(self.values)
        for point, value, tail in zip(self.points, self.values, tails):
            row: Dict[str, Any] = {"s": self.s, "t": self.t}
            row.update({f"x{k}": v for k, v in enumerate(self.x)})
            row.update({f"y{k}": v for k, v in enumerate(point)})
            row.update({"r_max": self.r_max, "value": value, "tail_estimate": tail, "method": self.method})
            rows.append(row)
        return rows
