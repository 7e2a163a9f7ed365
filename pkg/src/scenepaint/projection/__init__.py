"""Cameras, depth rendering, reprojection, unprojection, and splatting."""

from scenepaint.projection.cameras import PanoCamera, PerspCamera
from scenepaint.projection.rasters import BitMask, ColoredPointCloud, DepthMap, RgbImage
from scenepaint.projection.raycast import (
    PerspRender,
    TriangleSoup,
    cast_rays,
    render_pano_depth,
    render_persp_depth,
)
from scenepaint.projection.warp import (
    SplatResult,
    merge_cloud,
    point_landing_pixels,
    reproject_pano,
    splat,
    stale_texture_mask,
    unproject,
    unproject_pano,
)

__all__ = [
    "PanoCamera",
    "PerspCamera",
    "BitMask",
    "ColoredPointCloud",
    "DepthMap",
    "RgbImage",
    "PerspRender",
    "TriangleSoup",
    "cast_rays",
    "render_pano_depth",
    "render_persp_depth",
    "SplatResult",
    "merge_cloud",
    "point_landing_pixels",
    "reproject_pano",
    "splat",
    "stale_texture_mask",
    "unproject",
    "unproject_pano",
]
