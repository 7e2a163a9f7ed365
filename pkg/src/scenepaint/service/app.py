"""FastAPI application wrapping one project.

All mutations (texture jobs, edits) run on a single job queue, so concurrent
requests serialize; the response's ``order`` field identifies the applied
sequence. Every successful mutation bumps the scene revision carried by GET
responses.
"""

from __future__ import annotations

import base64
import json
import logging
import queue as queue_mod
import threading

import numpy as np
from fastapi import FastAPI, HTTPException, Query, Response
from fastapi.responses import StreamingResponse

from scenepaint import pngio
from scenepaint.core.scene import ObjectInstance, box_mesh
from scenepaint.errors import ScenePaintError, ValidationError
from scenepaint.painter import MockPainter, NullScorer, RemotePainter, load_backend_config
from scenepaint.pipeline import apply_object_edit, texture_scene
from scenepaint.pipeline.edits import EditCommand
from scenepaint.projection.cameras import PerspCamera
from scenepaint.projection.rasters import BitMask
from scenepaint.projection.warp import splat
from scenepaint.service.jobs import EventBus, JobQueue
from scenepaint.service.models import (
    EditRequest,
    EditResponse,
    JobCreated,
    JobModel,
    ObjectDescriptor,
    SceneDescriptor,
    TextureRequest,
)
from scenepaint.storage import (
    FileCheckpointer,
    export_ply_bytes,
    load_mesh_ply_bytes,
    load_textured_scene,
    save_project,
    save_textured_scene,
)
from scenepaint.storage.project import Project
from scenepaint.storage.serializers import room_to_dict

logger = logging.getLogger(__name__)

_PAINT_EDIT_KINDS = {"repaint-region", "repaint-object", "add"}


class ServerState:
    def __init__(self, project: Project, backend, scorer):
        self.project = project
        self.backend = backend
        self.scorer = scorer
        self.bus = EventBus()
        self.queue = JobQueue(self.bus)
        self.lock = threading.Lock()
        self.textured = load_textured_scene(
            project.state_dir / "textured", project.scene
        )
        if self.textured is not None:
            # The persisted result may reflect edits; adopt its scene.
            self.project.scene = self.textured.scene

    @property
    def revision(self) -> int:
        return 0 if self.textured is None else self.textured.revision

    def swap(self, textured) -> None:
        with self.lock:
            self.textured = textured
            self.project.scene = textured.scene
            save_textured_scene(textured, self.project.state_dir / "textured")
            save_project(self.project)
        self.bus.publish({"type": "revision", "revision": textured.revision})


def resolve_backend(project: Project, backend_spec: str | None = None):
    """'mock', an URL, or None (project config / environment)."""
    if backend_spec == "mock":
        return MockPainter()
    if backend_spec:
        config = load_backend_config()
        return RemotePainter(
            type(config)(url=backend_spec, timeout_seconds=config.timeout_seconds,
                         max_retries=config.max_retries, api_key=config.api_key)
        )
    config = load_backend_config()
    if config.url:
        return RemotePainter(config)
    if project.backend.get("url"):
        return RemotePainter(load_backend_config_from_dict(project.backend))
    return MockPainter()


def _affected_owners(before, after) -> list[str]:
    """Owners whose partitions changed; the clouds dict is copy-on-write, so
    identity comparison is exact."""
    owners = set(before.clouds) | set(after.clouds)
    return sorted(
        o for o in owners if before.clouds.get(o) is not after.clouds.get(o)
    )


def load_backend_config_from_dict(data: dict):
    from scenepaint.painter.remote import BackendConfig

    return BackendConfig(
        url=data.get("url", ""),
        timeout_seconds=data.get("timeout_seconds", 300.0),
        max_retries=data.get("max_retries", 2),
        api_key=data.get("api_key"),
    )


def create_app(project: Project, backend=None, scorer=None) -> FastAPI:
    state = ServerState(
        project,
        backend if backend is not None else resolve_backend(project),
        scorer if scorer is not None else NullScorer(),
    )
    app = FastAPI(title="scenepaint", version="0.1.0")
    app.state.engine = state

    @app.get("/v1/scene", response_model=SceneDescriptor)
    def get_scene():
        ts = state.textured
        objects = []
        for obj in state.project.scene.objects:
            lo, hi = obj.aabb()
            points = 0 if ts is None else len(ts.clouds.get(obj.object_id, []))
            objects.append(
                ObjectDescriptor(
                    id=obj.object_id,
                    description=obj.description,
                    aabb_min=lo.tolist(),
                    aabb_max=hi.tolist(),
                    points=points,
                )
            )
        return SceneDescriptor(
            revision=state.revision,
            textured=ts is not None,
            room=room_to_dict(state.project.scene.room),
            style_prompt=state.project.scene.style_prompt,
            negative_prompt=state.project.scene.negative_prompt,
            objects=objects,
            owners=[] if ts is None else list(ts.owner_registry),
            total_points=0 if ts is None else ts.total_points(),
        )

    @app.get("/v1/preview")
    def preview(cam: str = Query(..., description="camera as JSON")):
        ts = _require_textured()
        camera = _parse_camera(cam)
        result = splat(ts.full_cloud(), camera, ts.config.splat_radius)
        png = pngio.encode_rgb(result.image.pixels)
        return Response(
            content=png, media_type="image/png",
            headers={"X-Scene-Revision": str(state.revision)},
        )

    @app.get("/v1/cloud")
    def cloud(owner: str | None = None):
        ts = _require_textured()
        if owner is None:
            target = ts.full_cloud()
        else:
            if owner not in ts.clouds:
                raise HTTPException(404, f"unknown owner '{owner}'")
            target = ts.clouds[owner]
        if len(target) == 0:
            raise HTTPException(404, "owner has no points")
        payload = export_ply_bytes(target)
        return Response(
            content=payload, media_type="application/octet-stream",
            headers={"X-Scene-Revision": str(state.revision)},
        )

    @app.post("/v1/texture", response_model=JobCreated)
    def start_texture(body: TextureRequest):
        checkpointer = FileCheckpointer(state.project.state_dir / "checkpoint")

        def job(emit):
            ts = texture_scene(
                state.project.scene,
                state.backend,
                state.scorer,
                state.project.job_config,
                emit=emit,
                checkpointer=checkpointer,
                resume=body.resume,
            )
            state.swap(ts)

        record = state.queue.submit("texture", job)
        return JobCreated(job_id=record.job_id, order=record.order)

    @app.get("/v1/jobs/{job_id}", response_model=JobModel)
    def job_status(job_id: str):
        record = state.queue.get(job_id)
        if record is None:
            raise HTTPException(404, f"unknown job '{job_id}'")
        return JobModel(
            job_id=record.job_id,
            kind=record.kind,
            stage=record.stage,
            object_id=record.object_id,
            view_index=record.view_index,
            percent=record.percent,
            updated_at=record.updated_at,
            error=record.error,
        )

    @app.post("/v1/edits", response_model=EditResponse)
    def post_edit(body: EditRequest):
        ts = _require_textured()
        try:
            command = _build_command(body)
        except (ScenePaintError, ValueError, KeyError) as exc:
            raise HTTPException(422, str(exc))

        if command.kind in _PAINT_EDIT_KINDS:
            def job(emit):
                before = state.textured
                updated = apply_object_edit(
                    before, command, backend=state.backend,
                    scorer=state.scorer, emit=emit,
                )
                state.swap(updated)
                state.bus.publish(
                    {
                        "type": "edit-applied",
                        "revision": updated.revision,
                        "affected": _affected_owners(before, updated),
                    }
                )

            record = state.queue.submit("edit", job)
            return EditResponse(
                job_id=record.job_id, order=record.order,
                revision=state.revision, applied=False,
            )

        def apply_now(emit):
            before = state.textured
            updated = apply_object_edit(before, command)
            state.swap(updated)
            return before, updated

        try:
            record, (before, updated) = state.queue.run_now("edit", apply_now)
        except ScenePaintError as exc:
            raise HTTPException(422, str(exc))
        return EditResponse(
            job_id=record.job_id, order=record.order,
            revision=updated.revision, applied=True,
            affected=_affected_owners(before, updated),
        )

    @app.get("/v1/events")
    def events(max_events: int | None = None, since: int | None = None):
        """Server-sent progress events; ``since`` replays buffered events
        after that sequence, ``max_events`` closes the stream after N events
        (for polling clients)."""
        subscription = state.bus.subscribe(since=since)

        def stream():
            sent = 0
            try:
                yield "retry: 2000\n\n"
                while max_events is None or sent < max_events:
                    try:
                        payload = subscription.get(timeout=1.0 if max_events else 30.0)
                    except queue_mod.Empty:
                        if max_events is not None:
                            break  # drained the replay; close for polling clients
                        yield ": heartbeat\n\n"
                        continue
                    yield f"id: {payload['sequence']}\ndata: {json.dumps(payload)}\n\n"
                    sent += 1
            finally:
                state.bus.unsubscribe(subscription)

        return StreamingResponse(stream(), media_type="text/event-stream")

    def _require_textured():
        if state.textured is None:
            raise HTTPException(409, "scene is not textured yet; POST /v1/texture first")
        return state.textured

    def _parse_camera(raw: str) -> PerspCamera:
        try:
            data = json.loads(raw)
            return PerspCamera(
                position=np.asarray(data["position"], dtype=float),
                target=np.asarray(data["target"], dtype=float),
                up_hint=np.asarray(data.get("up_hint", [0, 0, 1]), dtype=float),
                focal=float(data.get("focal", 500.0)),
                resolution=int(data.get("resolution", 512)),
            )
        except (ValueError, KeyError, TypeError, ScenePaintError) as exc:
            raise HTTPException(422, f"bad camera: {exc}")

    def _build_command(body: EditRequest) -> EditCommand:
        camera = None
        if body.camera is not None:
            camera = PerspCamera(
                position=np.asarray(body.camera.position, dtype=float),
                target=np.asarray(body.camera.target, dtype=float),
                up_hint=np.asarray(body.camera.up_hint, dtype=float),
                focal=body.camera.focal,
                resolution=body.camera.resolution,
            )
        mask = sketch = None
        if body.mask_png_base64:
            mask = BitMask(pngio.decode_mask(base64.b64decode(body.mask_png_base64)))
        if body.sketch_png_base64:
            sketch = BitMask(pngio.decode_mask(base64.b64decode(body.sketch_png_base64)))
        new_object = None
        if body.new_object is not None:
            spec = body.new_object
            if spec.mesh_ply_base64:
                mesh = load_mesh_ply_bytes(base64.b64decode(spec.mesh_ply_base64), spec.id)
            elif spec.box_extents:
                mesh = box_mesh(tuple(spec.box_extents))
            else:
                raise ValidationError("new_object", "needs box_extents or mesh_ply_base64")
            new_object = ObjectInstance(
                object_id=spec.id,
                mesh=mesh,
                translation=np.asarray(spec.translation, dtype=float),
                scale=spec.scale,
                description=spec.description,
            )
        if body.kind not in _PAINT_EDIT_KINDS and body.kind != "repaint-region":
            # Fail fast on unknown targets so the client gets a clean 422.
            if body.target_id is not None:
                try:
                    state.project.scene.object_by_id(body.target_id)
                except KeyError:
                    raise ValidationError("target_id", f"unknown object '{body.target_id}'")
        return EditCommand(
            kind=body.kind,
            target_id=body.target_id,
            translation=None if body.translation is None else np.asarray(body.translation),
            angle=body.angle,
            scale=body.scale,
            prompt=body.prompt,
            camera=camera,
            mask=mask,
            sketch=sketch,
            new_object=new_object,
            seed=body.seed,
        )

    return app
