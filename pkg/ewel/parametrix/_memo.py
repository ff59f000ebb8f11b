"""
In-memory store for the level tables of the parametrix series.

Tables depend on (field, s, t, x, mode, quadrature); queries at several terminal points
y reuse them. Keys are sha256 digests of a stable representation of those inputs.
"""

import hashlib
import logging
from collections import OrderedDict
from dataclasses import dataclass
from typing import Any, Iterable, Optional

import numpy as np

logger = logging.getLogger(__name__)


class TableCache:
    """Bounded least-recently-used map from keys to built tables."""

    def __init__(self, max_entries: int = 32) -> None:
        self.max_entries = max_entries
        self._store: "OrderedDict[str, Any]" = OrderedDict()
        self.hits = 0
        self.misses = 0

    def get(self, key: str) -> Any:
        value = self._store.get(key)
        if value is None:
            self.misses += 1
            return None
        self.hits += 1
        self._store.move_to_end(key)
        return value

    def set(self, key: str, value: Any) -> None:
        self._store[key] = value
        self._store.move_to_end(key)
        while len(self._store) > self.max_entries:
            evicted, _ = self._store.popitem(last=False)
            logger.debug("table cache evicted %s", evicted[:12])

    def clear(self) -> None:
        self._store.clear()
        self.hits = self.misses = 0

    def __len__(self) -> int:
        return len(self._store)


@dataclass
class TableCacheConfig:
    cache: TableCache
    enabled: bool = True


_cache_config: Optional[TableCacheConfig] = None


def get_table_cache_config() -> TableCacheConfig:
    global _cache_config
    if _cache_config is None:
        _cache_config = TableCacheConfig(cache=TableCache())
    return _cache_config


def set_table_cache_config(config: TableCacheConfig) -> None:
    global _cache_config
    _cache_config = config


def _stable_repr(value: Any) -> str:
    if isinstance(value, np.ndarray):
        return "nd:" + ",".join(repr(float(v)) for v in value.reshape(-1))
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, dict):
        return "{" + ",".join(f"{k}={_stable_repr(v)}" for k, v in sorted(value.items())) + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(_stable_repr(v) for v in value) + "]"
    return repr(value)


def table_key(parts: Iterable[Any]) -> str:
    raw = "|".join(_stable_repr(p) for p in parts)
    return hashlib.sha256(raw.encode("utf-8")).hexdigest()
