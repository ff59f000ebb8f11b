# CSV/JSON artifact writers; floats go out in shortest round-trip form so reruns are byte-identical.

import csv
import math
from collections import defaultdict
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Union

from ..exceptions import ConfigurationError
from ..models import encode_json
from ..weak_error import SWEEP_COLUMNS, RatePoint


def _cell(value: Any) -> Any:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return value


def write_csv(path: Path, rows: Iterable[Dict[str, Any]], columns: Sequence[str]) -> Path:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(columns), lineterminator="\n", extrasaction="raise")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _cell(row.get(k)) for k in columns})
    return path


def write_json(path: Path, obj: Any) -> Path:
    path.write_bytes(encode_json(obj) + b"\n")
    return path


def read_sweep_csv(path: Union[str, Path]) -> Dict[str, List[RatePoint]]:
    """Series of a sweep table keyed by ``model:test_function``; rows without a finite error are skipped."""
    path = Path(path)
    series: Dict[str, List[RatePoint]] = defaultdict(list)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            missing = [c for c in ("model", "h", "test_function", "error", "stderr") if c not in (reader.fieldnames or [])]
            if missing:
                raise ConfigurationError(
                    f"{path} is not a sweep table: missing column(s) {missing}; expected {list(SWEEP_COLUMNS)}"
                )
            for row in reader:
                try:
                    h, err = float(row["h"]), abs(float(row["error"]))
                    se = float(row["stderr"]) if row["stderr"] else 0.0
                except ValueError:
                    continue
                if math.isfinite(err):
                    series[f"{row['model']}:{row['test_function']}"].append(RatePoint(h=h, error=err, stderr=se))
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc.strerror}") from exc
    return dict(series)
