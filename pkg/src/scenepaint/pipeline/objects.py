"""Iterative warp-and-inpaint texturing of a single object.

The initial view fuses the reprojected reference and empty-room panoramas via
the object mask and refines the result with the backend. Every novel view
splats the points collected so far over the room background, demotes
hidden-surface leaks, fills the remaining unknowns (diffusion for dense
regions, interpolation for sparse pin-holes), and unprojects the newly
painted object pixels back into the cloud. Pixels inside the misalignment
band never produce points.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from scenepaint.core.scene import ObjectInstance, Scene
from scenepaint.hashing import derive_seed
from scenepaint.imaging.edges import misalignment_mask
from scenepaint.imaging.fill import classify_unknown, combine_final, interp_inpaint
from scenepaint.imaging.fill import nearest_color_fill
from scenepaint.errors import NoKnownPixelsError
from scenepaint.painter.contract import PaintKind, PaintRequest, Painter, request_digest
from scenepaint.painter.scorers import Scorer
from scenepaint.pipeline.config import JobConfig
from scenepaint.pipeline.coarse import scoring_band, select_inpaint
from scenepaint.pipeline.events import Emitter, ProgressEvent, null_emitter
from scenepaint.pipeline.selection import select_candidate
from scenepaint.pipeline.state import CoarseResult
from scenepaint.planning import ViewPlan
from scenepaint.projection.cameras import PerspCamera
from scenepaint.projection.rasters import BitMask, ColoredPointCloud, RgbImage
from scenepaint.projection.raycast import TriangleSoup, render_persp_depth
from scenepaint.projection.warp import merge_cloud, reproject_pano, splat, stale_texture_mask, unproject

logger = logging.getLogger(__name__)


@dataclass
class TexturingContext:
    """Shared, read-only inputs for texturing every object of one job."""

    scene: Scene
    soup: TriangleSoup
    coarse: CoarseResult
    backend: Painter
    scorer: Scorer
    config: JobConfig
    emit: Emitter = null_emitter

    @classmethod
    def create(cls, scene, coarse, backend, scorer, config, emit=null_emitter):
        return cls(
            scene=scene,
            soup=TriangleSoup.from_meshes(scene.all_meshes()),
            coarse=coarse,
            backend=backend,
            scorer=scorer,
            config=config,
            emit=emit,
        )


def texture_object(
    ctx: TexturingContext,
    obj: ObjectInstance,
    plan: ViewPlan,
    owner_index: int,
    log: list[dict],
    start_view: int = 0,
    cloud: ColoredPointCloud | None = None,
    view_done=None,
    percent_range: tuple[float, float] = (0.0, 100.0),
) -> ColoredPointCloud:
    """Run the plan (optionally resuming at ``start_view``) and return the cloud.

    ``view_done(next_view_index, cloud)`` is invoked after every accepted view
    so callers can checkpoint. View 0 is the initial view.
    """
    cloud = ColoredPointCloud.empty() if cloud is None else cloud
    prompt = ctx.scene.object_prompt(obj)
    total_views = 1 + len(plan.views)

    def progress(i: int) -> float:
        lo, hi = percent_range
        return lo + (hi - lo) * (i / total_views)

    if start_view == 0:
        new = _initial_view_pass(ctx, obj, plan.initial, prompt, owner_index, log)
        cloud = merge_cloud(cloud, new)
        ctx.emit(
            ProgressEvent(
                "texture", progress(1), object_id=obj.object_id, view_index=0,
                message=f"initial view: {len(new)} points",
            )
        )
        if view_done is not None:
            view_done(1, cloud)
        start_view = 1

    for i in range(start_view, total_views):
        cam = plan.views[i - 1]
        cloud = _novel_view_pass(ctx, obj, cam, i, prompt, owner_index, cloud, log)
        ctx.emit(
            ProgressEvent(
                "texture", progress(i + 1), object_id=obj.object_id, view_index=i,
                message=f"view {i}/{total_views - 1}: {len(cloud)} points",
            )
        )
        if view_done is not None:
            view_done(i + 1, cloud)
    return cloud


def _initial_view_pass(
    ctx: TexturingContext,
    obj: ObjectInstance,
    cam: PerspCamera | None,
    prompt: str,
    owner_index: int,
    log: list[dict],
) -> ColoredPointCloud:
    if cam is None:
        logger.warning("object '%s': no usable initial view, skipping", obj.object_id)
        log.append({"step": "initial", "owner": obj.object_id, "skipped": "no view"})
        return ColoredPointCloud.empty()
    render = render_persp_depth(ctx.soup, cam)
    obj_mask = render.mask(obj.object_id)
    if not obj_mask.values.any():
        logger.warning("object '%s': empty mask in initial view, skipping", obj.object_id)
        log.append({"step": "initial", "owner": obj.object_id, "skipped": "empty mask"})
        return ColoredPointCloud.empty()

    coarse = ctx.coarse
    fg, fg_cov = reproject_pano(coarse.pano_image, coarse.scene_depth, cam)
    bg, bg_cov = reproject_pano(coarse.room_image, coarse.room_depth, cam)
    fused_px = np.where(obj_mask.values[..., None], fg.pixels, bg.pixels)
    fused = RgbImage(fused_px, camera=cam)
    covered = np.where(obj_mask.values, fg_cov.values, bg_cov.values)
    base = _fill_uncovered(fused, covered)

    request = PaintRequest(
        kind=PaintKind.INPAINT,
        depth=render.depth,
        prompt=prompt,
        negative_prompt=ctx.scene.negative_prompt,
        base=base,
        mask=obj_mask,
        seed=derive_seed(ctx.config.seed, obj.object_id, 0, "initial"),
        candidates=ctx.config.candidates,
        params=ctx.config.backend_params,
    )
    result = ctx.backend.paint(request)
    chosen, scores = select_candidate(
        result.candidates, fused, None, prompt, ctx.scorer, "initial"
    )
    image = result.candidates[chosen]

    mis = misalignment_mask(image, render.depth, ctx.config.edge_params)
    unproj = BitMask(
        obj_mask.values & ~mis.values & render.depth.finite_mask(), camera=cam
    )
    new_cloud = unproject(image, unproj, render.depth, cam, view_id=0, owner=owner_index)
    log.append(
        {
            "step": "initial",
            "owner": obj.object_id,
            "view": 0,
            "digest": request_digest(request),
            "chosen": chosen,
            "scores": scores,
            "points": len(new_cloud),
            "misalignment_overlap": int((mis.values & unproj.values).sum()),
        }
    )
    if ctx.config.debug_events:
        ctx.emit(
            ProgressEvent(
                "audit", 0.0, object_id=obj.object_id, view_index=0,
                extra={"misalignment": mis.values, "unprojected": unproj.values},
            )
        )
    return new_cloud


def _novel_view_pass(
    ctx: TexturingContext,
    obj: ObjectInstance,
    cam: PerspCamera,
    view_index: int,
    prompt: str,
    owner_index: int,
    cloud: ColoredPointCloud,
    log: list[dict],
) -> ColoredPointCloud:
    config = ctx.config
    render = render_persp_depth(ctx.soup, cam)
    gt = render.depth
    obj_mask = render.mask(obj.object_id)

    warp_result = splat(
        merge_cloud(ctx.coarse.room_cloud, cloud), cam, config.splat_radius
    )
    stale = stale_texture_mask(warp_result.depth, gt, config.stale_eps)
    known = warp_result.known.values & ~stale.values
    unknown = BitMask(~known, camera=cam)
    warped = warp_result.image

    base = _fill_uncovered(warped, known)
    region = classify_unknown(unknown, config.classify_window, config.classify_threshold)
    sparse, dense = region.sparse, region.dense

    scores: list[float] = []
    chosen = 0
    digest = None
    if dense.values.any():
        request = PaintRequest(
            kind=PaintKind.INPAINT,
            depth=gt,
            prompt=prompt,
            negative_prompt=ctx.scene.negative_prompt,
            base=base,
            mask=dense,
            seed=derive_seed(config.seed, obj.object_id, view_index, "novel"),
            candidates=config.candidates,
            params=config.backend_params,
        )
        result = ctx.backend.paint(request)
        chosen, scores = select_inpaint(
            result.candidates, base, dense, prompt, ctx.scorer, config
        )
        painted = result.candidates[chosen]
        digest = request_digest(request)
    else:
        painted = base

    if sparse.values.any():
        interp = interp_inpaint(warped, unknown, needed=sparse)
    else:
        interp = warped
    final = combine_final(warped, interp, painted, unknown, sparse)

    mis = misalignment_mask(final, gt, config.edge_params)
    unproj = BitMask(
        unknown.values & obj_mask.values & ~mis.values & gt.finite_mask(), camera=cam
    )
    new_cloud = unproject(final, unproj, gt, cam, view_id=view_index, owner=owner_index)
    merged = merge_cloud(cloud, new_cloud)
    log.append(
        {
            "step": "novel",
            "owner": obj.object_id,
            "view": view_index,
            "digest": digest,
            "chosen": chosen,
            "scores": scores,
            "sparse": int(sparse.values.sum()),
            "dense": int(dense.values.sum()),
            "stale": int(stale.values.sum()),
            "points": len(new_cloud),
            "cloud_total": len(merged),
            "misalignment_overlap": int((mis.values & unproj.values).sum()),
        }
    )
    if config.debug_events:
        ctx.emit(
            ProgressEvent(
                "audit", 0.0, object_id=obj.object_id, view_index=view_index,
                extra={
                    "misalignment": mis.values,
                    "unprojected": unproj.values,
                    "accepted": final.pixels,
                    "object_mask": obj_mask.values,
                    "camera": cam,
                },
            )
        )
    return merged


def _fill_uncovered(image: RgbImage, covered: np.ndarray) -> RgbImage:
    holes = ~covered
    if not holes.any():
        return image
    try:
        return nearest_color_fill(image, BitMask(holes, camera=image.camera))
    except NoKnownPixelsError:
        return image
