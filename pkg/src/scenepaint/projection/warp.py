"""Depth-guided transport between panoramas, perspective views, and clouds."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from scenepaint.errors import DepthInconsistencyError, ValidationError
from scenepaint.projection.cameras import PanoCamera, PerspCamera
from scenepaint.projection.rasters import (
    BitMask,
    ColoredPointCloud,
    DepthMap,
    RgbImage,
    check_aligned,
)


def unproject(
    img: RgbImage,
    mask: BitMask,
    depth: DepthMap,
    cam: PerspCamera,
    view_id: int = 0,
    owner: int = 0,
) -> ColoredPointCloud:
    """Lift every true-mask pixel to a world point along its center ray.

    Raises:
        DepthInconsistencyError: a masked pixel has no finite depth.
    """
    check_aligned(img, mask, depth)
    rows, cols = np.nonzero(mask.values)
    d = depth.values[rows, cols]
    bad = ~np.isfinite(d)
    if bad.any():
        raise DepthInconsistencyError(list(zip(rows[bad].tolist(), cols[bad].tolist())))
    dirs = cam.pixel_dirs(cols, rows)
    points = cam.position + d[:, None] * dirs
    return ColoredPointCloud(
        points,
        img.pixels[rows, cols],
        np.full(rows.shape, view_id, dtype=np.int32),
        np.full(rows.shape, owner, dtype=np.uint16),
    )


def unproject_pano(
    img: RgbImage,
    mask: BitMask,
    depth: DepthMap,
    cam: PanoCamera,
    view_id: int = 0,
    owner: int = 0,
) -> ColoredPointCloud:
    """Equirectangular variant of :func:`unproject`."""
    check_aligned(img, mask, depth)
    rows, cols = np.nonzero(mask.values)
    d = depth.values[rows, cols]
    bad = ~np.isfinite(d)
    if bad.any():
        raise DepthInconsistencyError(list(zip(rows[bad].tolist(), cols[bad].tolist())))
    dirs = cam.pixel_dirs(cols, rows)
    points = cam.center + d[:, None] * dirs
    return ColoredPointCloud(
        points,
        img.pixels[rows, cols],
        np.full(rows.shape, view_id, dtype=np.int32),
        np.full(rows.shape, owner, dtype=np.uint16),
    )


@dataclass(frozen=True)
class SplatResult:
    image: RgbImage
    known: BitMask
    depth: DepthMap
    winner: np.ndarray  # (H, W) int64 index of the winning point, -1 where unknown


_DISK_CACHE: dict[int, np.ndarray] = {}


def _disk_offsets(radius: int) -> np.ndarray:
    """(K, 3) rows of (dy, dx, dy*dy + dx*dx) covering the closed disk."""
    if radius not in _DISK_CACHE:
        span = np.arange(-radius, radius + 1)
        dy, dx = np.meshgrid(span, span, indexing="ij")
        keep = dy * dy + dx * dx <= radius * radius
        _DISK_CACHE[radius] = np.stack(
            [dy[keep], dx[keep], (dy * dy + dx * dx)[keep]], axis=1
        )
    return _DISK_CACHE[radius]


def splat(
    pc: ColoredPointCloud,
    cam: PerspCamera,
    splat_radius: int = 0,
) -> SplatResult:
    """Z-buffered disk-splat rasterization of a cloud into a pinhole view.

    Per pixel the nearest point wins; exact depth ties are broken by smaller
    disk distance, then by lowest point index, so results are deterministic.
    """
    h, w = cam.shape
    image = np.zeros((h, w, 3), dtype=np.uint8)
    depth = np.full((h, w), np.inf)
    winner = np.full((h, w), -1, dtype=np.int64)
    if len(pc) == 0:
        return SplatResult(
            RgbImage(image, camera=cam), BitMask(np.zeros((h, w), dtype=bool), camera=cam),
            DepthMap(depth, camera=cam), winner,
        )

    u, v, d, valid = cam.project(pc.points)
    px = np.rint(u).astype(np.int64)
    py = np.rint(v).astype(np.int64)

    offsets = _disk_offsets(int(splat_radius))
    pix_list, depth_list, disk_list, idx_list = [], [], [], []
    base_idx = np.arange(len(pc), dtype=np.int64)
    for dy, dx, dist2 in offsets:
        yy = py + dy
        xx = px + dx
        ok = valid & (yy >= 0) & (yy < h) & (xx >= 0) & (xx < w)
        pix_list.append(yy[ok] * w + xx[ok])
        depth_list.append(d[ok])
        disk_list.append(np.full(int(ok.sum()), dist2, dtype=np.int64))
        idx_list.append(base_idx[ok])
    pix = np.concatenate(pix_list)
    if pix.size == 0:
        return SplatResult(
            RgbImage(image, camera=cam), BitMask(np.zeros((h, w), dtype=bool), camera=cam),
            DepthMap(depth, camera=cam), winner,
        )
    dep = np.concatenate(depth_list)
    disk = np.concatenate(disk_list)
    idx = np.concatenate(idx_list)

    # Sort so the first entry per pixel is the winner under (depth, disk, index).
    order = np.lexsort((idx, disk, dep, pix))
    pix, dep, disk, idx = pix[order], dep[order], disk[order], idx[order]
    keep = np.ones(pix.size, dtype=bool)
    keep[1:] = pix[1:] != pix[:-1]
    pix, dep, idx = pix[keep], dep[keep], idx[keep]

    rows, cols = np.divmod(pix, w)
    image[rows, cols] = pc.colors[idx]
    depth[rows, cols] = dep
    winner[rows, cols] = idx
    known = np.zeros((h, w), dtype=bool)
    known[rows, cols] = True
    return SplatResult(
        RgbImage(image, camera=cam), BitMask(known, camera=cam),
        DepthMap(depth, camera=cam), winner,
    )


def point_landing_pixels(pc: ColoredPointCloud, cam: PerspCamera):
    """Rounded landing pixel per point: (rows, cols, in_frame)."""
    u, v, _, valid = cam.project(pc.points)
    px = np.rint(u).astype(np.int64)
    py = np.rint(v).astype(np.int64)
    h, w = cam.shape
    ok = valid & (px >= 0) & (px < w) & (py >= 0) & (py < h)
    return py, px, ok


def reproject_pano(
    pano: RgbImage,
    pano_depth: DepthMap,
    cam: PerspCamera,
) -> tuple[RgbImage, BitMask]:
    """Lift every pano pixel by its depth and splat it into a pinhole view.

    The panorama camera is read from ``pano_depth.camera``. Coverage marks the
    pixels that received at least one sample.
    """
    check_aligned(pano, pano_depth)
    pano_cam = pano_depth.camera
    if not isinstance(pano_cam, PanoCamera):
        raise ValidationError("pano_depth", "depth map must carry its PanoCamera")
    finite = pano_depth.finite_mask()
    cloud = unproject_pano(pano, BitMask(finite, camera=pano_cam), pano_depth, pano_cam)
    result = splat(cloud, cam, splat_radius=0)
    return result.image, result.known


def stale_texture_mask(splat_depth: DepthMap, gt_depth: DepthMap, eps: float = 0.01) -> BitMask:
    """Pixels whose splatted depth lies behind the true surface by > eps.

    These are hidden-surface colors leaking through a sparse cloud; they are
    demoted to unknown before inpainting.
    """
    check_aligned(splat_depth, gt_depth)
    stale = np.isfinite(splat_depth.values) & (splat_depth.values > gt_depth.values + eps)
    return BitMask(stale, camera=gt_depth.camera)


def merge_cloud(base: ColoredPointCloud, add: ColoredPointCloud) -> ColoredPointCloud:
    """Set union as concatenation; provenance preserved, no deduplication."""
    if len(base) == 0:
        return add
    if len(add) == 0:
        return base
    return ColoredPointCloud(
        np.concatenate([base.points, add.points]),
        np.concatenate([base.colors, add.colors]),
        np.concatenate([base.view_ids, add.view_ids]),
        np.concatenate([base.owners, add.owners]),
    )
