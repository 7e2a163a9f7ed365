"""Coarse stage: reference panorama, empty-room panorama, floor/ceiling patches."""

from __future__ import annotations

import logging

import numpy as np

from scenepaint.core.mesh import Surface
from scenepaint.core.scene import Scene
from scenepaint.errors import NoKnownPixelsError
from scenepaint.hashing import derive_seed
from scenepaint.imaging.edges import morphology
from scenepaint.imaging.fill import nearest_color_fill
from scenepaint.painter.contract import PaintKind, PaintRequest, Painter, request_digest
from scenepaint.painter.scorers import Scorer
from scenepaint.pipeline.config import JobConfig
from scenepaint.pipeline.events import Emitter, ProgressEvent, null_emitter
from scenepaint.pipeline.selection import select_candidate
from scenepaint.pipeline.state import CoarseResult, PatchRecord
from scenepaint.planning import refinement_views
from scenepaint.projection.cameras import PanoCamera
from scenepaint.projection.rasters import BitMask, ColoredPointCloud, DepthMap, RgbImage
from scenepaint.projection.raycast import TriangleSoup, render_pano_depth, render_persp_depth
from scenepaint.projection.warp import merge_cloud, reproject_pano, unproject, unproject_pano

logger = logging.getLogger(__name__)

# Room-cloud provenance: the panorama is view 0, patches are views 1 and 2.
PANO_VIEW_ID = 0
FLOOR_VIEW_ID = 1
CEILING_VIEW_ID = 2


def occlusion_mask(scene_depth: DepthMap, room_depth: DepthMap, eps: float) -> BitMask:
    """Pano pixels whose depth changes when objects are removed."""
    dp, dr = scene_depth.values, room_depth.values
    both = np.isfinite(dp) & np.isfinite(dr)
    differs = np.zeros(dp.shape, dtype=bool)
    differs[both] = np.abs(dp[both] - dr[both]) > eps
    differs |= np.isfinite(dp) != np.isfinite(dr)
    return BitMask(differs, camera=scene_depth.camera)


def scoring_band(mask: BitMask, radius: int) -> BitMask:
    """Dilated rim outside the inpaint mask, used for style-consistency PSNR."""
    grown = morphology(mask, "dilate", radius)
    return BitMask(grown.values & ~mask.values, camera=mask.camera)


def fill_holes(image: RgbImage, coverage: BitMask) -> RgbImage:
    """Nearest-color fill of uncovered pixels (identity when fully covered)."""
    holes = ~coverage.values
    if not holes.any():
        return image
    try:
        return nearest_color_fill(image, BitMask(holes, camera=image.camera))
    except NoKnownPixelsError:
        return image


def select_inpaint(
    candidates, base: RgbImage, mask: BitMask, prompt: str, scorer: Scorer, config: JobConfig
):
    """Iterative-mode selection on the dilated rim; falls back to SSIM when
    the rim is empty (mask covers the whole frame)."""
    band = scoring_band(mask, config.score_band_radius)
    if band.values.any():
        return select_candidate(
            candidates, base, band, prompt, scorer, "iterative", config.psnr_normalizer
        )
    return select_candidate(candidates, base, None, prompt, scorer, "initial")


def coarse_stage(
    scene: Scene,
    backend: Painter,
    scorer: Scorer,
    config: JobConfig,
    emit: Emitter = null_emitter,
) -> tuple[CoarseResult, list[dict]]:
    """Generate the reference panorama, the empty-room panorama and the
    floor/ceiling refinement patches; assemble the room cloud.

    Returns the coarse products plus job-log entries.
    """
    log: list[dict] = []
    pano_cam = PanoCamera(
        center=scene.room.center(),
        width=config.pano_width,
        height=config.pano_height,
        yaw=config.pano_yaw,
    )
    full_soup = TriangleSoup.from_meshes(scene.all_meshes())
    room_soup = TriangleSoup.from_meshes([("room", scene.interior)])

    emit(ProgressEvent("coarse", 1.0, message="rendering panorama depth"))
    scene_depth = render_pano_depth(full_soup, pano_cam)
    room_depth = render_pano_depth(room_soup, pano_cam)

    prompt = scene.pano_prompt()
    pano_request = PaintRequest(
        kind=PaintKind.GENERATE,
        depth=scene_depth,
        prompt=prompt,
        negative_prompt=scene.negative_prompt,
        seed=derive_seed(config.seed, "room", 0, "pano"),
        candidates=1,
        params=config.backend_params,
    )
    pano_image = backend.paint(pano_request).candidates[0]
    log.append({"step": "pano", "digest": request_digest(pano_request), "chosen": 0})
    emit(ProgressEvent("coarse", 3.0, message="reference panorama generated"))

    occl = occlusion_mask(scene_depth, room_depth, config.occlusion_eps)
    if occl.values.any():
        zeroed = pano_image.pixels.copy()
        zeroed[occl.values] = 0
        empty_request = PaintRequest(
            kind=PaintKind.INPAINT,
            depth=room_depth,
            prompt=prompt,
            negative_prompt=scene.negative_prompt,
            base=RgbImage(zeroed, camera=pano_cam),
            mask=occl,
            seed=derive_seed(config.seed, "room", 0, "empty"),
            candidates=config.candidates,
            params=config.backend_params,
        )
        result = backend.paint(empty_request)
        chosen, scores = select_inpaint(
            result.candidates, pano_image, occl, prompt, scorer, config
        )
        room_image = result.candidates[chosen]
        log.append(
            {
                "step": "empty-room",
                "digest": request_digest(empty_request),
                "chosen": chosen,
                "scores": scores,
            }
        )
        emit(ProgressEvent("coarse", 6.0, message="empty room inpainted", scores=tuple(scores)))
    else:
        room_image = pano_image
        log.append({"step": "empty-room", "skipped": "no occlusion"})

    room_cloud = unproject_pano(
        room_image,
        BitMask(room_depth.finite_mask(), camera=pano_cam),
        room_depth,
        pano_cam,
        view_id=PANO_VIEW_ID,
        owner=0,
    )

    overhead, upward = refinement_views(scene.room, resolution=config.persp_resolution)
    patches = []
    for cam, surface, view_id, tag in (
        (overhead, Surface.FLOOR, FLOOR_VIEW_ID, "floor"),
        (upward, Surface.CEILING, CEILING_VIEW_ID, "ceiling"),
    ):
        reprojected, coverage = reproject_pano(room_image, room_depth, cam)
        render = render_persp_depth(room_soup, cam)
        target = render.label_mask(surface)
        base = fill_holes(reprojected, coverage)
        patch_request = PaintRequest(
            kind=PaintKind.INPAINT,
            depth=render.depth,
            prompt=prompt,
            negative_prompt=scene.negative_prompt,
            base=base,
            mask=target,
            seed=derive_seed(config.seed, "room", view_id, tag),
            candidates=config.candidates,
            params=config.backend_params,
        )
        result = backend.paint(patch_request)
        chosen, scores = select_inpaint(result.candidates, base, target, prompt, scorer, config)
        patch_image = result.candidates[chosen]
        unproj_mask = BitMask(target.values & render.depth.finite_mask(), camera=cam)
        patch_cloud = unproject(
            patch_image, unproj_mask, render.depth, cam, view_id=view_id, owner=0
        )
        room_cloud = merge_cloud(room_cloud, patch_cloud)
        patches.append(PatchRecord(int(surface), cam, patch_image, target))
        log.append(
            {
                "step": f"patch-{tag}",
                "digest": request_digest(patch_request),
                "chosen": chosen,
                "scores": scores,
                "points": len(patch_cloud),
            }
        )
        emit(ProgressEvent("coarse", 8.0, message=f"{tag} patch painted", scores=tuple(scores)))

    coarse = CoarseResult(
        pano_camera=pano_cam,
        scene_depth=scene_depth,
        room_depth=room_depth,
        pano_image=pano_image,
        room_image=room_image,
        occlusion_mask=occl,
        patches=tuple(patches),
        room_cloud=room_cloud,
    )
    emit(ProgressEvent("coarse", 10.0, message="coarse stage complete"))
    return coarse, log
