"""Deterministic procedural painter for desk-scale verification.

Color rule (pure function of request content and seed):

1. Normalize depth per :meth:`PaintRequest.normalized_depth` and quantize into
   8 bands: ``band = min(7, floor(norm * 8))``.
2. Per band, take ``h = fnv1a64(utf8(prompt) + b"|" + bytes([band]))`` and a
   base hue ``(h % 3600) / 3600``.
3. Candidate ``j`` rotates the hue by ``j * ((seed % 97) + 1) / 997`` (mod 1)
   and colors the band with HSV (hue, 0.55, 0.85) scaled to 0..255, rounded.
4. ``generate`` paints every pixel this way. Inpaint kinds paint only masked
   pixels with ``round(0.7 * band_color + 0.3 * nearest_fill)`` where
   ``nearest_fill`` is the nearest-color fill of the base over the mask
   (pure band color if the mask covers the whole frame). Sketch-covered
   masked pixels are then halved (integer division) to read as dark strokes.
"""

from __future__ import annotations

import colorsys
import time

import numpy as np

from scenepaint.errors import NoKnownPixelsError
from scenepaint.hashing import fnv1a64
from scenepaint.imaging.fill import nearest_color_fill
from scenepaint.painter.contract import PaintKind, PaintRequest, PaintResult, finalize_result

BAND_COUNT = 8


def band_color(prompt: str, band: int, seed: int = 0, candidate: int = 0) -> np.ndarray:
    """The documented band color as a (3,) uint8 array."""
    h = fnv1a64(prompt.encode("utf-8") + b"|" + bytes([band]))
    hue = (h % 3600) / 3600.0
    hue = (hue + candidate * (((seed % 97) + 1) / 997.0)) % 1.0
    rgb = colorsys.hsv_to_rgb(hue, 0.55, 0.85)
    return np.array([round(c * 255.0) for c in rgb], dtype=np.uint8)


class MockPainter:
    """Pure, hash-colored painter; bands follow the conditioning depth."""

    name = "mock"

    def paint(self, request: PaintRequest) -> PaintResult:
        started = time.monotonic()
        bands = np.minimum(
            (request.normalized_depth() * BAND_COUNT).astype(np.int64), BAND_COUNT - 1
        )
        raw = [self._candidate(request, bands, j) for j in range(request.candidates)]
        return finalize_result(request, raw, self.name, started)

    def _candidate(self, request: PaintRequest, bands: np.ndarray, j: int) -> np.ndarray:
        palette = np.stack(
            [band_color(request.prompt, b, request.seed, j) for b in range(BAND_COUNT)]
        )
        banded = palette[bands]
        if request.kind is PaintKind.GENERATE:
            return banded
        mask = request.mask.values
        out = request.base.pixels.copy()
        if not mask.any():
            return out
        if mask.all():
            fill = banded
        else:
            try:
                filled = nearest_color_fill(request.base, request.mask)
                fill = np.rint(
                    0.7 * banded.astype(np.float64) + 0.3 * filled.pixels.astype(np.float64)
                ).astype(np.uint8)
            except NoKnownPixelsError:
                fill = banded
        out[mask] = fill[mask]
        if request.kind is PaintKind.SKETCH_INPAINT:
            stroke = mask & request.sketch.values
            out[stroke] //= 2
        return out
