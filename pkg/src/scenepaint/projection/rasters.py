"""Raster buffers and the colored point cloud, the currency of every stage."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from scenepaint.errors import ValidationError


@dataclass(frozen=True)
class DepthMap:
    """Per-pixel Euclidean ray-length depth in meters; misses are +inf."""

    values: np.ndarray
    camera: object | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise ValidationError("values", "depth map must be 2-D")
        finite = v[np.isfinite(v)]
        if finite.size and finite.min() <= 0:
            raise ValidationError("values", "finite depths must be > 0")
        if np.isnan(v).any():
            raise ValidationError("values", "NaN depth not allowed")
        object.__setattr__(self, "values", v)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def finite_mask(self) -> np.ndarray:
        return np.isfinite(self.values)


@dataclass(frozen=True)
class RgbImage:
    """8-bit RGB raster."""

    pixels: np.ndarray
    camera: object | None = None

    def __post_init__(self):
        p = np.asarray(self.pixels)
        if p.ndim != 3 or p.shape[2] != 3 or p.dtype != np.uint8:
            raise ValidationError("pixels", "expected (H, W, 3) uint8")
        object.__setattr__(self, "pixels", p)

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape[:2]

    @classmethod
    def filled(cls, shape: tuple[int, int], color=(0, 0, 0)) -> "RgbImage":
        px = np.empty((shape[0], shape[1], 3), dtype=np.uint8)
        px[:] = np.asarray(color, dtype=np.uint8)
        return cls(px)


@dataclass(frozen=True)
class BitMask:
    """Boolean raster."""

    values: np.ndarray
    camera: object | None = None

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2 or v.dtype != np.bool_:
            raise ValidationError("values", "expected (H, W) bool")
        object.__setattr__(self, "values", v)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def count(self) -> int:
        return int(self.values.sum())

    @classmethod
    def full(cls, shape: tuple[int, int], value: bool = False) -> "BitMask":
        return cls(np.full(shape, value, dtype=bool))


def check_aligned(*rasters) -> tuple[int, int]:
    """Assert all rasters share one resolution; returns it."""
    shapes = {r.shape for r in rasters if r is not None}
    if len(shapes) != 1:
        raise ValidationError("rasters", f"misaligned resolutions: {sorted(shapes)}")
    return next(iter(shapes))


@dataclass(frozen=True)
class ColoredPointCloud:
    """World-space points with colors and provenance.

    ``view_ids`` index the source view within the owning texturing job;
    ``owners`` are indices into the job's owner registry (0 is the room).
    """

    points: np.ndarray
    colors: np.ndarray
    view_ids: np.ndarray
    owners: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        c = np.asarray(self.colors, dtype=np.uint8).reshape(-1, 3)
        v = np.asarray(self.view_ids, dtype=np.int32).reshape(-1)
        o = np.asarray(self.owners, dtype=np.uint16).reshape(-1)
        n = p.shape[0]
        if not (c.shape[0] == v.shape[0] == o.shape[0] == n):
            raise ValidationError("points", "points/colors/provenance lengths differ")
        if not np.all(np.isfinite(p)):
            raise ValidationError("points", "coordinates must be finite")
        for name, arr in (("points", p), ("colors", c), ("view_ids", v), ("owners", o)):
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return self.points.shape[0]

    @classmethod
    def empty(cls) -> "ColoredPointCloud":
        return cls(
            np.empty((0, 3)), np.empty((0, 3), dtype=np.uint8),
            np.empty(0, dtype=np.int32), np.empty(0, dtype=np.uint16),
        )

    def select(self, mask: np.ndarray) -> "ColoredPointCloud":
        return ColoredPointCloud(
            self.points[mask], self.colors[mask], self.view_ids[mask], self.owners[mask]
        )

    def transformed(self, rotation: np.ndarray, translation: np.ndarray, pivot=None) -> "ColoredPointCloud":
        """Rigidly transform points about ``pivot`` (defaults to the origin)."""
        rot = np.asarray(rotation, dtype=np.float64).reshape(3, 3)
        t = np.asarray(translation, dtype=np.float64).reshape(3)
        pts = self.points
        if pivot is not None:
            piv = np.asarray(pivot, dtype=np.float64).reshape(3)
            pts = (pts - piv) @ rot.T + piv + t
        else:
            pts = pts @ rot.T + t
        return ColoredPointCloud(pts, self.colors, self.view_ids, self.owners)
