"""Classical image operations: edges, morphology, fills, and quality scores."""

from scenepaint.imaging.edges import (
    EdgeParams,
    canny_edges,
    laplacian_edges,
    misalignment_mask,
    morphology,
)
from scenepaint.imaging.fill import (
    RegionClassification,
    classify_unknown,
    combine_final,
    composite,
    interp_inpaint,
    nearest_color_fill,
)
from scenepaint.imaging.metrics import psnr, ssim

__all__ = [
    "EdgeParams",
    "canny_edges",
    "laplacian_edges",
    "misalignment_mask",
    "morphology",
    "RegionClassification",
    "classify_unknown",
    "combine_final",
    "composite",
    "interp_inpaint",
    "nearest_color_fill",
    "psnr",
    "ssim",
]
