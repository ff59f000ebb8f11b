import logging
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from ..exceptions import NumericalFault

JobKey = Tuple[Any, ...]


@dataclass
class Job:
    """One independent cell of an experiment: ``fn(**kwargs)`` keyed for a deterministic merge."""

    kind: str
    key: JobKey
    fn: Callable[..., Any]
    kwargs: Dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None

    @property
    def label(self) -> str:
        return ",".join(f"{k:g}" if isinstance(k, float) else str(k) for k in self.key)


@dataclass
class JobResult:
    kind: str
    key: JobKey
    status: str
    value: Any = None
    error: Optional[Dict[str, Any]] = None
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return self.status == "ok"


class JobLogger:
    """
    Logs job dispatch and completion.

    Options:
    - logger: logging.Logger instance (defaults to "ewel.jobs")
    - level: log level (defaults to logging.INFO)
    - include_kwargs: if True, log the job arguments on dispatch
    - redact_kwargs: argument names whose values are replaced by "<redacted>"
    """

    def __init__(
        self,
        logger: Optional[logging.Logger] = None,
        level: int = logging.INFO,
        include_kwargs: bool = False,
        redact_kwargs: Optional[Sequence[str]] = None,
    ):
        self.logger = logger or logging.getLogger("ewel.jobs")
        self.level = level
        self.include_kwargs = include_kwargs
        self.redact_kwargs = set(redact_kwargs or [])

    def dispatched(self, job: Job) -> float:
        self.logger.log(self.level, f"--> {job.kind} {job.label}")
        if self.include_kwargs:
            shown = {
                k: ("<redacted>" if k in self.redact_kwargs else v) for k, v in sorted(job.kwargs.items())
            }
            self.logger.log(self.level, f"    kwargs: {shown}")
        return time.perf_counter()

    def finished(self, job: Job, status: str, started: float) -> float:
        duration = time.perf_counter() - started
        self.logger.log(self.level, f"<-- {job.kind} {job.label} {status} ({duration:.4f}s)")
        return duration


def _call(fn: Callable[..., Any], kwargs: Dict[str, Any]) -> Any:
    return fn(**kwargs)


class JobPool:
    """Runs jobs inline (``workers == 1``) or on a process pool; results come back by key.

    A NumericalFault marks its job failed and the other jobs proceed; any other error
    propagates.
    """

    def __init__(self, workers: int = 1, job_logger: Optional[JobLogger] = None):
        self.workers = max(1, int(workers))
        self.job_logger = job_logger or JobLogger()

    def _failed(self, job: Job, exc: NumericalFault, duration: float) -> JobResult:
        self.job_logger.logger.warning("job %s %s failed: %s", job.kind, job.label, exc, exc_info=exc)
        return JobResult(job.kind, job.key, "failed", error=exc.to_dict(), seconds=duration)

    def run(self, jobs: Sequence[Job]) -> Dict[JobKey, JobResult]:
        results: Dict[JobKey, JobResult] = {}
        if self.workers == 1 or len(jobs) <= 1:
            for job in jobs:
                started = self.job_logger.dispatched(job)
                try:
                    value = _call(job.fn, job.kwargs)
                except NumericalFault as exc:
                    results[job.key] = self._failed(job, exc, self.job_logger.finished(job, "failed", started))
                    continue
                duration = self.job_logger.finished(job, "ok", started)
                results[job.key] = JobResult(job.kind, job.key, "ok", value=value, seconds=duration)
            return results
        with ProcessPoolExecutor(max_workers=self.workers) as executor:
            pending = {}
            for job in jobs:
                started = self.job_logger.dispatched(job)
                pending[executor.submit(_call, job.fn, job.kwargs)] = (job, started)
            for future in as_completed(pending):
                job, started = pending[future]
                try:
                    value = future.result()
                except NumericalFault as exc:
                    results[job.key] = self._failed(job, exc, self.job_logger.finished(job, "failed", started))
                    continue
                duration = self.job_logger.finished(job, "ok", started)
                results[job.key] = JobResult(job.kind, job.key, "ok", value=value, seconds=duration)
        return results


def ordered(results: Dict[JobKey, JobResult]) -> List[JobResult]:
    return [results[k] for k in sorted(results)]
