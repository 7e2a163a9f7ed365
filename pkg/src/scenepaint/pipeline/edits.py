"""Interactive scene edits: object-level transforms and region repaints.

Every object is a colored point partition, so rearranging, duplicating,
removing and rescaling are pure point/instance operations; repaints run the
painter on the edited view and swap the affected points (subtract the points
that landed inside the mask, union the freshly unprojected ones).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from scenepaint.core.scene import ROOM_OWNER, ObjectInstance, Scene, validate_in_room
from scenepaint.errors import ValidationError
from scenepaint.hashing import derive_seed
from scenepaint.painter.contract import PaintKind, PaintRequest, Painter, request_digest
from scenepaint.painter.scorers import Scorer
from scenepaint.pipeline.coarse import select_inpaint
from scenepaint.pipeline.config import JobConfig
from scenepaint.pipeline.events import Emitter, null_emitter
from scenepaint.pipeline.objects import TexturingContext, texture_object
from scenepaint.pipeline.state import TexturedScene
from scenepaint.planning import plan_views
from scenepaint.projection.cameras import PerspCamera
from scenepaint.projection.rasters import BitMask, ColoredPointCloud, RgbImage
from scenepaint.projection.raycast import TriangleSoup, render_persp_depth
from scenepaint.projection.warp import point_landing_pixels, splat, unproject
from scenepaint.imaging.fill import nearest_color_fill
from scenepaint.errors import NoKnownPixelsError

logger = logging.getLogger(__name__)

EDIT_KINDS = (
    "add", "remove", "duplicate", "translate", "rotate", "rescale",
    "repaint-object", "repaint-region",
)


@dataclass(frozen=True)
class EditCommand:
    """One interactive edit; the payload depends on the kind."""

    kind: str
    target_id: str | None = None
    translation: np.ndarray | None = None
    angle: float | None = None          # rotate: radians about +z, AABB center
    scale: float | None = None          # rescale: factor about the AABB center
    new_object: ObjectInstance | None = None
    prompt: str | None = None
    camera: PerspCamera | None = None   # repaint-region
    mask: BitMask | None = None
    sketch: BitMask | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in EDIT_KINDS:
            raise ValidationError("kind", f"unknown edit kind '{self.kind}'")
        if self.kind != "add" and self.kind != "repaint-region" and not self.target_id:
            raise ValidationError("target_id", f"{self.kind} needs a target")
        if self.kind == "add" and self.new_object is None:
            raise ValidationError("new_object", "add needs an object")
        if self.kind == "rescale" and (self.scale is None or self.scale <= 0):
            raise ValidationError("scale", "rescale factor must be > 0")
        if self.kind == "repaint-region" and (self.camera is None or self.mask is None):
            raise ValidationError("camera", "repaint-region needs a camera and a mask")
        if self.translation is not None:
            object.__setattr__(
                self, "translation", np.asarray(self.translation, dtype=np.float64).reshape(3)
            )


def _rotation_z(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def apply_object_edit(
    ts: TexturedScene,
    cmd: EditCommand,
    backend: Painter | None = None,
    scorer: Scorer | None = None,
    emit: Emitter = null_emitter,
) -> TexturedScene:
    """Apply an object-level edit and return the updated scene.

    Raises PlacementError (scene untouched) when a transform would push the
    object outside the room. ``add`` and ``repaint-object`` need a backend.
    """
    if cmd.kind == "repaint-region":
        if backend is None or scorer is None:
            raise ValidationError("backend", "repaint-region needs a backend and scorer")
        return apply_region_edit(ts, cmd, backend, scorer, emit)

    scene = ts.scene
    if cmd.kind in ("remove", "duplicate", "translate", "rotate", "rescale", "repaint-object"):
        obj = scene.object_by_id(cmd.target_id)

    if cmd.kind == "translate":
        delta = cmd.translation if cmd.translation is not None else np.zeros(3)
        moved = obj.moved(translation=obj.translation + delta)
        validate_in_room(moved, scene.room)
        return _swap_object(ts, obj, moved, ts.clouds[obj.object_id].transformed(np.eye(3), delta))

    if cmd.kind == "rotate":
        angle = cmd.angle or 0.0
        rot = _rotation_z(angle)
        center = obj.aabb_center()
        moved = obj.moved(
            rotation=rot @ obj.rotation,
            translation=rot @ (obj.translation - center) + center,
        )
        validate_in_room(moved, scene.room)
        cloud = ts.clouds[obj.object_id].transformed(rot, np.zeros(3), pivot=center)
        return _swap_object(ts, obj, moved, cloud)

    if cmd.kind == "rescale":
        factor = cmd.scale
        center = obj.aabb_center()
        moved = obj.moved(
            scale=obj.scale * factor,
            translation=factor * (obj.translation - center) + center,
        )
        validate_in_room(moved, scene.room)
        old = ts.clouds[obj.object_id]
        pts = (old.points - center) * factor + center
        cloud = ColoredPointCloud(pts, old.colors, old.view_ids, old.owners)
        return _swap_object(ts, obj, moved, cloud)

    if cmd.kind == "remove":
        objects = [o for o in scene.objects if o.object_id != obj.object_id]
        clouds = {k: v for k, v in ts.clouds.items() if k != obj.object_id}
        return ts.bump(scene=scene.with_objects(objects), clouds=clouds,
                       log_entries=({"step": "edit", "kind": "remove", "owner": obj.object_id},))

    if cmd.kind == "duplicate":
        new_id = _fresh_id(scene, obj.object_id)
        delta = cmd.translation if cmd.translation is not None else np.zeros(3)
        copy = ObjectInstance(
            object_id=new_id,
            mesh=obj.mesh,
            rotation=obj.rotation,
            translation=obj.translation + delta,
            scale=obj.scale,
            description=obj.description,
        )
        validate_in_room(copy, scene.room)
        registry = ts.owner_registry + (new_id,)
        src = ts.clouds[obj.object_id]
        cloud = ColoredPointCloud(
            src.points + delta,
            src.colors,
            src.view_ids,
            np.full(len(src), registry.index(new_id), dtype=np.uint16),
        )
        clouds = dict(ts.clouds)
        clouds[new_id] = cloud
        return ts.bump(
            scene=scene.with_objects(list(scene.objects) + [copy]),
            clouds=clouds,
            registry=registry,
            log_entries=({"step": "edit", "kind": "duplicate", "owner": obj.object_id,
                          "copy": new_id},),
        )

    if cmd.kind == "add":
        if backend is None or scorer is None:
            raise ValidationError("backend", "add needs a backend and scorer")
        new_obj = cmd.new_object
        validate_in_room(new_obj, scene.room)
        if any(o.object_id == new_obj.object_id for o in scene.objects):
            raise ValidationError("new_object", f"id '{new_obj.object_id}' already exists")
        new_scene = scene.with_objects(list(scene.objects) + [new_obj])
        registry = ts.owner_registry + (new_obj.object_id,)
        cloud, entries = _texture_single(ts, new_scene, new_obj, registry, backend, scorer, emit)
        clouds = dict(ts.clouds)
        clouds[new_obj.object_id] = cloud
        return ts.bump(scene=new_scene, clouds=clouds, registry=registry,
                       log_entries=tuple(entries))

    if cmd.kind == "repaint-object":
        if backend is None or scorer is None:
            raise ValidationError("backend", "repaint-object needs a backend and scorer")
        target = obj if cmd.prompt is None else obj.moved(description=cmd.prompt)
        new_scene = scene.with_objects(
            [target if o.object_id == obj.object_id else o for o in scene.objects]
        )
        cloud, entries = _texture_single(
            ts, new_scene, target, ts.owner_registry, backend, scorer, emit
        )
        clouds = dict(ts.clouds)
        clouds[obj.object_id] = cloud
        return ts.bump(scene=new_scene, clouds=clouds, log_entries=tuple(entries))

    raise ValidationError("kind", f"unhandled edit kind '{cmd.kind}'")


def _swap_object(ts: TexturedScene, old: ObjectInstance, new: ObjectInstance,
                 cloud: ColoredPointCloud) -> TexturedScene:
    scene = ts.scene.with_objects(
        [new if o.object_id == old.object_id else o for o in ts.scene.objects]
    )
    clouds = dict(ts.clouds)
    clouds[old.object_id] = cloud
    entry = {"step": "edit", "kind": "transform", "owner": old.object_id}
    return ts.bump(scene=scene, clouds=clouds, log_entries=(entry,))


def _fresh_id(scene: Scene, base: str) -> str:
    existing = {o.object_id for o in scene.objects}
    n = 1
    while f"{base}-copy{n}" in existing:
        n += 1
    return f"{base}-copy{n}"


def _texture_single(ts, scene, obj, registry, backend, scorer, emit):
    """Run the standard per-object texturing for one object of the scene."""
    config = ts.config
    ctx = TexturingContext.create(scene, ts.coarse, backend, scorer, config, emit)
    plan = plan_views(
        obj, scene.room,
        rng_seed=derive_seed(config.seed, obj.object_id, "plan"),
        resolution=config.persp_resolution,
        min_standoff=config.min_standoff,
    )
    log: list[dict] = []
    cloud = texture_object(
        ctx, obj, plan, owner_index=registry.index(obj.object_id), log=log
    )
    return cloud, log


def apply_region_edit(
    ts: TexturedScene,
    cmd: EditCommand,
    backend: Painter,
    scorer: Scorer,
    emit: Emitter = null_emitter,
) -> TexturedScene:
    """Repaint a user-masked region of one view, optionally sketch-guided.

    The scene cloud is updated by removing every point whose splat landed
    inside the mask, then unioning the unprojection of the repainted pixels;
    new points inherit the per-pixel nearest-hit owner.
    """
    if cmd.kind != "repaint-region":
        raise ValidationError("kind", "apply_region_edit needs a repaint-region command")
    cam, mask = cmd.camera, cmd.mask
    if mask.shape != cam.shape:
        raise ValidationError("mask", "mask resolution must match the edit camera")
    if not ts.scene.room.contains(cam.position)[0]:
        raise ValidationError("camera", "edit camera must be inside the room")
    if not mask.values.any():
        return ts  # nothing to do, scene unchanged

    config = ts.config
    soup = TriangleSoup.from_meshes(ts.scene.all_meshes())
    render = render_persp_depth(soup, cam)
    gt = render.depth
    paintable = mask.values & gt.finite_mask()
    if not paintable.any():
        logger.warning("region edit covers no surface; scene unchanged")
        return ts

    full = ts.full_cloud()
    view_image = splat(full, cam, config.splat_radius)
    base = view_image.image
    holes = ~view_image.known.values
    if holes.any() and not holes.all():
        try:
            base = nearest_color_fill(base, BitMask(holes, camera=cam))
        except NoKnownPixelsError:
            pass

    request = PaintRequest(
        kind=PaintKind.SKETCH_INPAINT if cmd.sketch is not None else PaintKind.INPAINT,
        depth=gt,
        prompt=cmd.prompt or ts.scene.style_prompt,
        negative_prompt=ts.scene.negative_prompt,
        base=base,
        mask=mask,
        sketch=cmd.sketch,
        seed=derive_seed(cmd.seed, "region-edit"),
        candidates=config.candidates,
        params=config.backend_params,
    )
    result = backend.paint(request)
    chosen, scores = select_inpaint(
        result.candidates, base, mask, request.prompt, scorer, config
    )
    painted = result.candidates[chosen]

    # Subtract the points whose splat landed inside the mask, per owner.
    removed = 0
    clouds: dict[str, ColoredPointCloud] = {}
    for owner, cloud in ts.clouds.items():
        if len(cloud) == 0:
            clouds[owner] = cloud
            continue
        rows, cols, ok = point_landing_pixels(cloud, cam)
        landed = np.zeros(len(cloud), dtype=bool)
        landed[ok] = mask.values[rows[ok], cols[ok]]
        removed += int(landed.sum())
        clouds[owner] = cloud.select(~landed)

    # Union the repainted pixels, owners inherited from the nearest hit.
    edit_view_id = -(ts.revision + 1)
    added = 0
    for owner_idx in np.unique(render.owner_index[paintable]):
        owner_name = render.owner_names[owner_idx]
        submask = BitMask(paintable & (render.owner_index == owner_idx), camera=cam)
        piece = unproject(
            painted, submask, gt, cam, view_id=edit_view_id, owner=int(ts.owner_index(owner_name))
        )
        added += len(piece)
        existing = clouds.get(owner_name, ColoredPointCloud.empty())
        clouds[owner_name] = ColoredPointCloud(
            np.concatenate([existing.points, piece.points]),
            np.concatenate([existing.colors, piece.colors]),
            np.concatenate([existing.view_ids, piece.view_ids]),
            np.concatenate([existing.owners, piece.owners]),
        )

    entry = {
        "step": "edit",
        "kind": "repaint-region",
        "digest": request_digest(request),
        "chosen": chosen,
        "scores": scores,
        "removed": removed,
        "added": added,
    }
    return ts.bump(clouds=clouds, log_entries=(entry,))
