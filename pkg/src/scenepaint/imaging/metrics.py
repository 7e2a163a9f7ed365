"""SSIM and region-restricted PSNR used for candidate selection."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from scenepaint.errors import ValidationError
from scenepaint.projection.rasters import BitMask, RgbImage, check_aligned

_LUMA = np.array([0.299, 0.587, 0.114])
_C1 = (0.01 * 255.0) ** 2
_C2 = (0.03 * 255.0) ** 2
_SSIM_SIGMA = 1.5
# 11x11 window: gaussian_filter truncated at 5 px on each side.
_SSIM_TRUNCATE = 5.0 / _SSIM_SIGMA

PSNR_CAP_DB = 99.0


def _window_mean(arr: np.ndarray) -> np.ndarray:
    return ndimage.gaussian_filter(arr, sigma=_SSIM_SIGMA, truncate=_SSIM_TRUNCATE)


def ssim(a: RgbImage, b: RgbImage) -> float:
    """Mean structural similarity on luminance, 11x11 Gaussian window."""
    check_aligned(a, b)
    x = a.pixels.astype(np.float64) @ _LUMA
    y = b.pixels.astype(np.float64) @ _LUMA
    mu_x = _window_mean(x)
    mu_y = _window_mean(y)
    var_x = _window_mean(x * x) - mu_x * mu_x
    var_y = _window_mean(y * y) - mu_y * mu_y
    cov = _window_mean(x * y) - mu_x * mu_y
    score_map = ((2 * mu_x * mu_y + _C1) * (2 * cov + _C2)) / (
        (mu_x * mu_x + mu_y * mu_y + _C1) * (var_x + var_y + _C2)
    )
    return float(score_map.mean())


def psnr(a: RgbImage, b: RgbImage, region: BitMask | None = None) -> float:
    """Peak SNR in dB over the region (whole image if None), capped at 99 dB."""
    check_aligned(*([a, b] if region is None else [a, b, region]))
    if region is not None:
        if not region.values.any():
            raise ValidationError("region", "must be non-empty")
        da = a.pixels[region.values].astype(np.float64)
        db = b.pixels[region.values].astype(np.float64)
    else:
        da = a.pixels.astype(np.float64)
        db = b.pixels.astype(np.float64)
    mse = float(np.mean((da - db) ** 2))
    if mse == 0.0:
        return PSNR_CAP_DB
    return float(min(PSNR_CAP_DB, 20.0 * np.log10(255.0 / np.sqrt(mse))))
