"""Tiny in-process job table for long-running planning solves.

Planning runs take minutes on real instances, too long for one HTTP
round trip, so the service accepts the job and the client polls.  State
lives in process memory; restarting the server forgets finished jobs,
which is fine for a single-operator tool.
"""
from __future__ import annotations

import threading
import traceback
import uuid
from dataclasses import dataclass, field


@dataclass
class Job:
    id: str
    state: str = "queued"          # queued | running | done | failed
    error: str | None = None
    result: object = None


@dataclass
class JobStore:
    _jobs: dict[str, Job] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def submit(self, work) -> str:
        """Run `work` on a daemon thread; returns the job id immediately."""
        job = Job(id=uuid.uuid4().hex)
        with self._lock:
            self._jobs[job.id] = job

        def runner():
            with self._lock:
                job.state = "running"
            try:
                outcome = work()
            except Exception as exc:  # noqa: BLE001 - job boundary
                with self._lock:
                    job.state = "failed"
                    job.error = f"{type(exc).__name__}: {exc}"
                    job.result = traceback.format_exc()
            else:
                with self._lock:
                    job.state = "done"
                    job.result = outcome

        threading.Thread(target=runner, daemon=True).start()
        return job.id

    def get(self, job_id: str) -> Job | None:
        with self._lock:
            return self._jobs.get(job_id)

    def wait(self, job_id: str, timeout: float | None = None) -> Job | None:
        """Poll until the job leaves queued/running; test helper mostly."""
        import time
        deadline = None if timeout is None else time.monotonic() + timeout
        while True:
            job = self.get(job_id)
            if job is None or job.state in ("done", "failed"):
                return job
            if deadline is not None and time.monotonic() > deadline:
                return job
            time.sleep(0.02)
