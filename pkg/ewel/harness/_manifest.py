# Run manifest: what ran, with which seeds, and every file the run wrote.

from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

from ..models import Struct, encode_json


def tool_version() -> str:
    try:
        from importlib.metadata import version as _v

        return _v("ewel")
    except Exception:
        return "dev"


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class JobRecord(Struct):
    kind: str
    key: List[Any]
    seed: Optional[int]
    status: str
    error: Optional[Dict[str, Any]] = None


class RunManifest(Struct):
    """Timestamps make the manifest itself the one non-reproducible artifact of a run."""

    name: str
    kind: str
    config_hash: str
    tool_version: str
    started: str
    finished: Optional[str] = None
    exit_code: Optional[int] = None
    jobs: List[JobRecord] = []
    outputs: List[str] = []
    notes: List[str] = []

    def record_output(self, path: Path, out_dir: Path) -> None:
        name = path.relative_to(out_dir).as_posix()
        if name not in self.outputs:
            self.outputs.append(name)
            self.outputs.sort()

    def write(self, out_dir: Path) -> Path:
        path = out_dir / "manifest.json"
        self.record_output(path, out_dir)
        path.write_bytes(encode_json(self))
        return path
