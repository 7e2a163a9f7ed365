"""Progress events emitted by the pipeline and consumed by the service/tests."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable


@dataclass(frozen=True)
class ProgressEvent:
    stage: str
    percent: float
    object_id: str | None = None
    view_index: int | None = None
    message: str = ""
    scores: tuple[float, ...] | None = None
    # Debug payloads (numpy masks etc.) attached only when the job runs with
    # debug_events; never serialized.
    extra: dict = field(default_factory=dict)


Emitter = Callable[[ProgressEvent], None]


def null_emitter(event: ProgressEvent) -> None:
    return None
