"""Single-worker job queue: every mutation runs serialized, in order."""

from __future__ import annotations

import itertools
import logging
import queue
import threading
import time
import uuid
from dataclasses import dataclass, field

from scenepaint.pipeline.events import ProgressEvent

logger = logging.getLogger(__name__)


@dataclass
class JobRecord:
    job_id: str
    kind: str
    order: int
    stage: str = "queued"
    object_id: str | None = None
    view_index: int | None = None
    percent: float = 0.0
    updated_at: float = field(default_factory=time.time)
    error: str | None = None

    def update_from(self, event: ProgressEvent) -> None:
        if event.stage == "audit":
            return
        self.stage = event.stage
        self.object_id = event.object_id
        self.view_index = event.view_index
        # Percent is monotone per job by contract.
        self.percent = max(self.percent, float(event.percent))
        self.updated_at = time.time()


class EventBus:
    """Fan-out of serialized progress events to any number of subscribers.

    A bounded replay buffer lets late subscribers (SSE reconnects) catch up
    from a given sequence number.
    """

    REPLAY_LIMIT = 4096

    def __init__(self):
        self._lock = threading.Lock()
        self._subscribers: list[queue.Queue] = []
        self._sequence = itertools.count(1)
        self._replay: list[dict] = []

    def publish(self, payload: dict) -> dict:
        with self._lock:
            payload = dict(payload, sequence=next(self._sequence))
            self._replay.append(payload)
            if len(self._replay) > self.REPLAY_LIMIT:
                del self._replay[: len(self._replay) - self.REPLAY_LIMIT]
            for q in list(self._subscribers):
                q.put(payload)
        return payload

    def subscribe(self, since: int = None) -> queue.Queue:
        """Live queue; with ``since`` it is pre-filled with buffered events
        whose sequence exceeds it."""
        q: queue.Queue = queue.Queue()
        with self._lock:
            if since is not None:
                for payload in self._replay:
                    if payload["sequence"] > since:
                        q.put(payload)
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q: queue.Queue) -> None:
        with self._lock:
            if q in self._subscribers:
                self._subscribers.remove(q)


class JobQueue:
    """One worker thread; jobs run in submit order (the mutation order)."""

    def __init__(self, bus: EventBus):
        self.bus = bus
        self._tasks: queue.Queue = queue.Queue()
        self._records: dict[str, JobRecord] = {}
        self._lock = threading.Lock()
        self._order = itertools.count(1)
        self._worker = threading.Thread(target=self._run, daemon=True)
        self._worker.start()

    def submit(self, kind: str, fn) -> JobRecord:
        """Queue fn(emit) for execution; returns its record immediately."""
        with self._lock:
            record = JobRecord(job_id=uuid.uuid4().hex[:12], kind=kind, order=next(self._order))
            self._records[record.job_id] = record
        self._tasks.put((record, fn))
        return record

    def run_now(self, kind: str, fn, timeout: float = 300.0):
        """Queue fn and wait for it; returns its result or raises its error."""
        done = threading.Event()
        box: dict = {}

        def wrapped(emit):
            try:
                box["result"] = fn(emit)
            except BaseException as exc:  # propagate to the waiting caller
                box["error"] = exc
                raise
            finally:
                done.set()

        record = self.submit(kind, wrapped)
        if not done.wait(timeout):
            raise TimeoutError(f"job {record.job_id} did not finish in {timeout}s")
        if "error" in box:
            raise box["error"]
        return record, box["result"]

    def get(self, job_id: str) -> JobRecord | None:
        with self._lock:
            return self._records.get(job_id)

    def _run(self) -> None:
        while True:
            record, fn = self._tasks.get()

            def emit(event: ProgressEvent, _record=record) -> None:
                _record.update_from(event)
                if event.stage != "audit":
                    self.bus.publish(
                        {
                            "type": "progress",
                            "job_id": _record.job_id,
                            "kind": _record.kind,
                            "stage": event.stage,
                            "object_id": event.object_id,
                            "view_index": event.view_index,
                            "percent": _record.percent,
                            "message": event.message,
                        }
                    )

            record.stage = "running"
            record.updated_at = time.time()
            try:
                fn(emit)
                record.stage = "done"
                record.percent = 100.0
            except BaseException as exc:
                logger.exception("job %s failed", record.job_id)
                record.stage = "failed"
                record.error = str(exc)
                self.bus.publish(
                    {"type": "job-failed", "job_id": record.job_id, "error": str(exc)}
                )
            finally:
                record.updated_at = time.time()
                if record.stage == "done":
                    self.bus.publish(
                        {"type": "job-done", "job_id": record.job_id, "kind": record.kind}
                    )
