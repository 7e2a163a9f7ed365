"""Hole filling: nearest-color initialization, Telea interpolation, compositing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from scenepaint.errors import MaskContractError, NoKnownPixelsError, ValidationError
from scenepaint.projection.rasters import BitMask, RgbImage, check_aligned

# Telea propagation band radius in pixels.
_TELEA_BAND = 5


def nearest_color_fill(img: RgbImage, unknown: BitMask) -> RgbImage:
    """Give every unknown pixel the color of its nearest known pixel.

    Distance is Euclidean in pixel space; exact ties go to the known pixel
    with the smallest row-major index. Known pixels are untouched.
    """
    check_aligned(img, unknown)
    known = ~unknown.values
    if not known.any():
        raise NoKnownPixelsError("no known pixel to propagate from")
    if not unknown.values.any():
        return RgbImage(img.pixels.copy(), camera=img.camera)

    known_rc = np.argwhere(known)  # row-major order
    query_rc = np.argwhere(unknown.values)
    tree = cKDTree(known_rc.astype(np.float64))
    k = 2 if known_rc.shape[0] > 1 else 1
    dist, idx = tree.query(query_rc.astype(np.float64), k=k)
    if k == 1:
        dist = dist[:, None]
        idx = idx[:, None]

    chosen = idx[:, 0].copy()
    # Integer squared distances make tie detection exact.
    d2_first = _int_sq_dist(query_rc, known_rc[idx[:, 0]])
    if k == 2:
        d2_second = _int_sq_dist(query_rc, known_rc[idx[:, 1]])
        ties = d2_second == d2_first
        for q in np.nonzero(ties)[0]:
            candidates = tree.query_ball_point(
                query_rc[q].astype(np.float64), np.sqrt(d2_first[q]) + 1e-6
            )
            cand = np.asarray(candidates, dtype=np.int64)
            d2 = _int_sq_dist(query_rc[q][None, :], known_rc[cand])
            exact = cand[d2 == d2_first[q]]
            chosen[q] = exact.min()  # known_rc is row-major, so min index wins

    out = img.pixels.copy()
    src = known_rc[chosen]
    out[query_rc[:, 0], query_rc[:, 1]] = img.pixels[src[:, 0], src[:, 1]]
    return RgbImage(out, camera=img.camera)


def _int_sq_dist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = a.astype(np.int64) - b.astype(np.int64)
    return d[:, 0] ** 2 + d[:, 1] ** 2


@dataclass(frozen=True)
class RegionClassification:
    """Split of the unknown mask into sparse pin-holes and dense regions."""

    sparse: BitMask
    dense: BitMask
    window: int
    threshold: float


def classify_unknown(
    unknown: BitMask, window: int = 7, threshold: float = 0.3
) -> RegionClassification:
    """An unknown pixel is sparse iff its window is mostly known.

    The fraction uses only in-bounds window pixels, so border pixels are not
    penalized. Windows that see no known pixel classify as dense.
    """
    if window % 2 != 1 or window < 1:
        raise ValidationError("window", "must be odd and >= 1")
    if not 0 < threshold < 1:
        raise ValidationError("threshold", "must be in (0, 1)")
    known = (~unknown.values).astype(np.int64)
    known_count = _box_sum(known, window)
    valid_count = _box_sum(np.ones_like(known), window)
    sparse = unknown.values & (known_count >= threshold * valid_count)
    dense = unknown.values & ~sparse
    cam = unknown.camera
    return RegionClassification(
        BitMask(sparse, camera=cam), BitMask(dense, camera=cam), window, threshold
    )


def _box_sum(arr: np.ndarray, window: int) -> np.ndarray:
    """Exact integer sum over the centered window, clipped at the borders."""
    h, w = arr.shape
    half = window // 2
    sat = np.zeros((h + 1, w + 1), dtype=np.int64)
    sat[1:, 1:] = arr.cumsum(0).cumsum(1)
    rows = np.arange(h)
    cols = np.arange(w)
    r0 = np.clip(rows - half, 0, h)[:, None]
    r1 = np.clip(rows + half + 1, 0, h)[:, None]
    c0 = np.clip(cols - half, 0, w)[None, :]
    c1 = np.clip(cols + half + 1, 0, w)[None, :]
    return sat[r1, c1] - sat[r0, c1] - sat[r1, c0] + sat[r0, c0]


def interp_inpaint(img: RgbImage, fill: BitMask, needed: BitMask | None = None) -> RgbImage:
    """Telea-style fast-marching fill of the masked pixels.

    Pixels are filled in increasing distance-to-boundary order. Each takes a
    normalized weighted average of first-order extrapolations from the
    known/already-filled pixels in its band, weighted by direction alignment
    with the fill front, proximity, and level-set closeness. Accumulation is
    in float64 with one final rounding, so constant fields reproduce exactly
    and linear ramps stay within quantization error. Known pixels are
    unchanged; a pixel whose band holds no source falls back to the nearest
    known color.

    ``needed`` (a subset of ``fill``) stops the march once every needed pixel
    is filled; masked pixels beyond that distance stay untouched. Callers use
    it when only the sparse pin-holes of a larger unknown region are read.
    """
    check_aligned(img, fill)
    mask = fill.values
    if not mask.any():
        return RgbImage(img.pixels.copy(), camera=img.camera)
    if mask.all():
        raise NoKnownPixelsError("cannot interpolate with no known pixel")

    h, w = mask.shape
    pad = _TELEA_BAND
    dist = ndimage.distance_transform_edt(mask)
    # Fill-front normal per pixel, from the distance field.
    grad_r, grad_c = np.gradient(dist)

    offsets = [
        (dy, dx)
        for dy in range(-pad, pad + 1)
        for dx in range(-pad, pad + 1)
        if 0 < dy * dy + dx * dx <= pad * pad
    ]
    off = np.array(offsets)
    off_norm2 = (off[:, 0] ** 2 + off[:, 1] ** 2).astype(np.float64)
    off_norm = np.sqrt(off_norm2)

    values = np.pad(img.pixels.astype(np.float64), ((pad, pad), (pad, pad), (0, 0)))
    avail = np.pad(~mask, pad)
    dist_p = np.pad(dist, pad)

    rings = np.unique(dist[mask])
    if needed is not None and needed.values.any():
        rings = rings[rings <= dist[needed.values].max()]

    fallback_needed = []
    for t in rings:
        ring = (dist == t) & mask
        rows, cols = np.nonzero(ring)
        pr, pc = rows + pad, cols + pad
        n_r = grad_r[rows, cols]
        n_c = grad_c[rows, cols]
        n_len = np.hypot(n_r, n_c)

        g_row, g_col = _masked_gradient(values, avail)
        total_w = np.zeros(rows.size)
        total_v = np.zeros((rows.size, 3))
        for k, (dy, dx) in enumerate(offsets):
            qr, qc = pr + dy, pc + dx
            ok = avail[qr, qc]
            if not ok.any():
                continue
            # Direction weight: alignment of (p - q) with the front normal.
            dot = n_r * (-dy) + n_c * (-dx)
            denom = np.maximum(n_len * off_norm[k], 1e-300)
            direction = np.where(n_len > 0, np.abs(dot) / denom, 1.0)
            direction = np.maximum(direction, 1e-6)
            dst = 1.0 / off_norm2[k]
            lev = 1.0 / (1.0 + np.abs(t - dist_p[qr, qc]))
            weight = np.where(ok, direction * dst * lev, 0.0)
            extrap = (
                values[qr, qc]
                + g_row[qr, qc] * (-dy)
                + g_col[qr, qc] * (-dx)
            )
            total_w += weight
            total_v += weight[:, None] * extrap
        has_source = total_w > 0
        filled = np.zeros((rows.size, 3))
        filled[has_source] = total_v[has_source] / total_w[has_source, None]
        if not has_source.all():
            fallback_needed.extend(zip(rows[~has_source], cols[~has_source]))
        values[pr[has_source], pc[has_source]] = filled[has_source]
        avail[pr[has_source], pc[has_source]] = True

    out = np.clip(np.rint(values[pad:-pad, pad:-pad]), 0, 255).astype(np.uint8)
    out[~mask] = img.pixels[~mask]
    if fallback_needed:
        rows = np.array([r for r, _ in fallback_needed])
        cols = np.array([c for _, c in fallback_needed])
        near = nearest_color_fill(img, BitMask(mask, camera=img.camera))
        out[rows, cols] = near.pixels[rows, cols]
    return RgbImage(out, camera=img.camera)


def _masked_gradient(values: np.ndarray, avail: np.ndarray):
    """Central differences falling back to one-sided where neighbors are missing."""
    up = np.roll(values, 1, axis=0)
    down = np.roll(values, -1, axis=0)
    left = np.roll(values, 1, axis=1)
    right = np.roll(values, -1, axis=1)
    up_ok = np.roll(avail, 1, axis=0)
    down_ok = np.roll(avail, -1, axis=0)
    left_ok = np.roll(avail, 1, axis=1)
    right_ok = np.roll(avail, -1, axis=1)

    g_row = np.zeros_like(values)
    both = (up_ok & down_ok)[..., None]
    only_down = (down_ok & ~up_ok)[..., None]
    only_up = (up_ok & ~down_ok)[..., None]
    g_row = np.where(both, (down - up) / 2.0, g_row)
    g_row = np.where(only_down, down - values, g_row)
    g_row = np.where(only_up, values - up, g_row)

    g_col = np.zeros_like(values)
    both = (left_ok & right_ok)[..., None]
    only_right = (right_ok & ~left_ok)[..., None]
    only_left = (left_ok & ~right_ok)[..., None]
    g_col = np.where(both, (right - left) / 2.0, g_col)
    g_col = np.where(only_right, right - values, g_col)
    g_col = np.where(only_left, values - left, g_col)
    return g_row, g_col


def composite(fg: RgbImage, bg: RgbImage, mask: BitMask) -> RgbImage:
    """Exact pixel select: fg where mask, bg elsewhere."""
    check_aligned(fg, bg, mask)
    out = np.where(mask.values[..., None], fg.pixels, bg.pixels)
    return RgbImage(out, camera=fg.camera)


def combine_final(
    warped: RgbImage,
    interp: RgbImage,
    painted: RgbImage,
    unknown: BitMask,
    sparse: BitMask,
) -> RgbImage:
    """Three-way partition: warped on known, interp on sparse, painted on the rest."""
    check_aligned(warped, interp, painted, unknown, sparse)
    if (sparse.values & ~unknown.values).any():
        raise MaskContractError("sparse mask must be a subset of the unknown mask")
    out = warped.pixels.copy()
    out[sparse.values] = interp.pixels[sparse.values]
    dense = unknown.values & ~sparse.values
    out[dense] = painted.pixels[dense]
    return RgbImage(out, camera=warped.camera)
