"""Edge detectors, binary morphology, and the texture/depth misalignment mask.

Generated texture tends to bleed across depth discontinuities. The band where
color edges coincide with depth edges is detected and excluded from
unprojection so the bleed never enters the point cloud.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from scenepaint.errors import ValidationError
from scenepaint.projection.rasters import BitMask, DepthMap, RgbImage, check_aligned

_LUMA = np.array([0.299, 0.587, 0.114])


@dataclass(frozen=True)
class EdgeParams:
    """Tunables of the misalignment detector.

    Canny thresholds are in the units of the Sobel gradient magnitude computed
    on 0..255 luminance. The Laplacian threshold is in meters of 4-neighbor
    second difference.
    """

    canny_low: float = 50.0
    canny_high: float = 150.0
    blur_sigma: float = 1.4
    laplacian_threshold: float = 0.05
    dilate_radius: int = 5
    erode_radius: int = 2

    def __post_init__(self):
        if not self.canny_low < self.canny_high:
            raise ValidationError("canny_low", "must be < canny_high")
        if self.dilate_radius < 0 or self.erode_radius < 0:
            raise ValidationError("dilate_radius", "radii must be >= 0")
        if self.dilate_radius < self.erode_radius:
            raise ValidationError("erode_radius", "must be <= dilate_radius")


def _disk(radius: int) -> np.ndarray:
    span = np.arange(-radius, radius + 1)
    dy, dx = np.meshgrid(span, span, indexing="ij")
    return dy * dy + dx * dx <= radius * radius


def morphology(mask: BitMask, op: str, radius: int) -> BitMask:
    """Disk-structuring-element dilation or erosion.

    Outside the image counts as False for dilation and True for erosion, so
    closing (dilate then erode) stays extensive at the borders.
    """
    if radius < 0:
        raise ValidationError("radius", "must be >= 0")
    if radius == 0:
        return BitMask(mask.values.copy(), camera=mask.camera)
    structure = _disk(radius)
    if op == "dilate":
        out = ndimage.binary_dilation(mask.values, structure=structure, border_value=0)
    elif op == "erode":
        out = ndimage.binary_erosion(mask.values, structure=structure, border_value=1)
    else:
        raise ValidationError("op", "must be 'dilate' or 'erode'")
    return BitMask(out, camera=mask.camera)


def canny_edges(img: RgbImage, params: EdgeParams | None = None) -> BitMask:
    """Standard Canny on luminance: blur, Sobel, NMS, hysteresis."""
    p = params or EdgeParams()
    lum = img.pixels.astype(np.float64) @ _LUMA
    blurred = ndimage.gaussian_filter(lum, sigma=p.blur_sigma)
    gx = ndimage.sobel(blurred, axis=1)
    gy = ndimage.sobel(blurred, axis=0)
    mag = np.hypot(gx, gy)

    # Quantize gradient direction to 4 bins and suppress non-maxima along it.
    angle = np.mod(np.arctan2(gy, gx), np.pi)
    bins = np.floor((angle + np.pi / 8) / (np.pi / 4)).astype(np.int8) % 4
    padded = np.pad(mag, 1, mode="constant")
    offsets = {0: (0, 1), 1: (1, 1), 2: (1, 0), 3: (1, -1)}
    keep = np.zeros(mag.shape, dtype=bool)
    h, w = mag.shape
    for b, (dr, dc) in offsets.items():
        n1 = padded[1 + dr: 1 + dr + h, 1 + dc: 1 + dc + w]
        n2 = padded[1 - dr: 1 - dr + h, 1 - dc: 1 - dc + w]
        sel = bins == b
        keep |= sel & (mag >= n1) & (mag >= n2)
    nms = np.where(keep, mag, 0.0)

    strong = nms >= p.canny_high
    weak = nms >= p.canny_low
    if not strong.any():
        return BitMask(np.zeros(mag.shape, dtype=bool), camera=img.camera)
    labels, _ = ndimage.label(weak, structure=np.ones((3, 3), dtype=bool))
    strong_labels = np.unique(labels[strong])
    edges = np.isin(labels, strong_labels[strong_labels > 0])
    return BitMask(edges, camera=img.camera)


def laplacian_edges(depth: DepthMap, params: EdgeParams | None = None) -> BitMask:
    """Depth discontinuities: |4-neighbor Laplacian| above the threshold.

    Infinite depths are replaced by (max finite + 1 m) so silhouettes against
    empty space register as edges. The 1-px image border is excluded.
    """
    p = params or EdgeParams()
    values = depth.values
    finite = np.isfinite(values)
    if not finite.any():
        return BitMask(np.zeros(values.shape, dtype=bool), camera=depth.camera)
    background = values[finite].max() + 1.0
    d = np.where(finite, values, background)
    lap = np.zeros_like(d)
    lap[1:-1, 1:-1] = (
        d[:-2, 1:-1] + d[2:, 1:-1] + d[1:-1, :-2] + d[1:-1, 2:] - 4.0 * d[1:-1, 1:-1]
    )
    return BitMask(np.abs(lap) > p.laplacian_threshold, camera=depth.camera)


def misalignment_mask(
    img: RgbImage, depth: DepthMap, params: EdgeParams | None = None
) -> BitMask:
    """Band of texture/depth disagreement, excluded from unprojection.

    Color edges are kept only near depth edges, then the union is closed:
    Erode(Dilate((canny & Dilate(lap)) | lap)).
    """
    p = params or EdgeParams()
    check_aligned(img, depth)
    color_edges = canny_edges(img, p)
    depth_edges = laplacian_edges(depth, p)
    near_depth = morphology(depth_edges, "dilate", p.dilate_radius)
    confirmed = BitMask(color_edges.values & near_depth.values, camera=img.camera)
    union = BitMask(confirmed.values | depth_edges.values, camera=img.camera)
    grown = morphology(union, "dilate", p.dilate_radius)
    return morphology(grown, "erode", p.erode_radius)
