"""Whole-scene texturing with resumable checkpoints."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Protocol

from scenepaint.core.scene import ROOM_OWNER, Scene
from scenepaint.hashing import derive_seed
from scenepaint.painter.contract import Painter
from scenepaint.painter.scorers import Scorer
from scenepaint.pipeline.coarse import coarse_stage
from scenepaint.pipeline.config import JobConfig
from scenepaint.pipeline.events import Emitter, ProgressEvent, null_emitter
from scenepaint.pipeline.objects import TexturingContext, texture_object
from scenepaint.pipeline.state import CoarseResult, TexturedScene, build_registry
from scenepaint.planning import plan_views
from scenepaint.projection.rasters import ColoredPointCloud

logger = logging.getLogger(__name__)

_COARSE_PERCENT = 10.0


@dataclass
class JobState:
    """Everything needed to resume a texturing job mid-flight."""

    config: JobConfig
    coarse: CoarseResult
    registry: tuple[str, ...]
    log: list[dict]
    clouds: dict[str, ColoredPointCloud]
    current_object: str | None = None
    next_view: int = 0
    partial_cloud: ColoredPointCloud = field(default_factory=ColoredPointCloud.empty)

    def snapshot(self) -> "JobState":
        return replace(self, log=list(self.log), clouds=dict(self.clouds))


class Checkpointer(Protocol):
    def save(self, state: JobState) -> None: ...

    def load(self) -> JobState | None: ...


class MemoryCheckpointer:
    """In-process checkpointer, mostly for tests."""

    def __init__(self):
        self.state: JobState | None = None
        self.saves = 0

    def save(self, state: JobState) -> None:
        self.state = state.snapshot()
        self.saves += 1

    def load(self) -> JobState | None:
        return self.state


def texture_scene(
    scene: Scene,
    backend: Painter,
    scorer: Scorer,
    config: JobConfig,
    emit: Emitter = null_emitter,
    checkpointer: Checkpointer | None = None,
    resume: bool = False,
) -> TexturedScene:
    """Coarse stage, then per-object iterative texturing in id order.

    With ``resume=True`` the job continues from the checkpointer's last saved
    state; the result is bit-identical to an uninterrupted run with the same
    seed. A backend failure leaves the last accepted view checkpointed.
    """
    state: JobState | None = None
    if resume and checkpointer is not None:
        state = checkpointer.load()
        if state is not None:
            state = state.snapshot()
            logger.info(
                "resuming job: %d owners done, current=%s view=%d",
                len(state.clouds), state.current_object, state.next_view,
            )

    if state is None:
        coarse, log = coarse_stage(scene, backend, scorer, config, emit)
        state = JobState(
            config=config,
            coarse=coarse,
            registry=build_registry(scene),
            log=log,
            clouds={ROOM_OWNER: coarse.room_cloud},
        )
        if checkpointer is not None:
            checkpointer.save(state)

    config = state.config
    ctx = TexturingContext.create(scene, state.coarse, backend, scorer, config, emit)
    object_ids = [name for name in state.registry if name != ROOM_OWNER]

    for rank, object_id in enumerate(object_ids):
        if object_id in state.clouds:
            continue
        obj = scene.object_by_id(object_id)
        plan = plan_views(
            obj,
            scene.room,
            rng_seed=derive_seed(config.seed, object_id, "plan"),
            resolution=config.persp_resolution,
            min_standoff=config.min_standoff,
        )
        if state.current_object == object_id:
            start_view, partial = state.next_view, state.partial_cloud
        else:
            start_view, partial = 0, ColoredPointCloud.empty()

        span = (100.0 - _COARSE_PERCENT) / max(len(object_ids), 1)
        lo = _COARSE_PERCENT + span * rank

        def view_done(next_view: int, cloud: ColoredPointCloud, _oid=object_id) -> None:
            state.current_object = _oid
            state.next_view = next_view
            state.partial_cloud = cloud
            if checkpointer is not None:
                checkpointer.save(state)

        cloud = texture_object(
            ctx,
            obj,
            plan,
            owner_index=state.registry.index(object_id),
            log=state.log,
            start_view=start_view,
            cloud=partial,
            view_done=view_done,
            percent_range=(lo, lo + span),
        )
        state.clouds[object_id] = cloud
        state.current_object = None
        state.next_view = 0
        state.partial_cloud = ColoredPointCloud.empty()
        if checkpointer is not None:
            checkpointer.save(state)

    textured = TexturedScene(
        scene=scene,
        config=config,
        coarse=state.coarse,
        clouds=dict(state.clouds),
        owner_registry=state.registry,
        job_log=tuple(state.log),
        revision=1,
    )
    emit(ProgressEvent("done", 100.0, message=f"{textured.total_points()} points"))
    return textured
